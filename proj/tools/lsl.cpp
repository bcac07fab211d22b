// Batch front end: proof-script checking, evaluation, reachability
// elimination, bounded satisfaction, formula classification, and the
// shipped corpus runner.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lsl/eval.hpp"
#include "lsl/model.hpp"
#include "lsl/oracle.hpp"
#include "lsl/parser.hpp"
#include "lsl/proof.hpp"
#include "lsl/rewrite.hpp"

using nlohmann::json;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitFile = 66;

long env_long(const char* name, long dflt) {
  const char* v = std::getenv(name);
  if (!v || !*v) return dflt;
  try {
    return std::stol(v);
  } catch (...) {
    return dflt;
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::system_error(ENOENT, std::generic_category(), path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

lsl::Env env_from_decls(const std::vector<std::string>& decls) {
  lsl::Env e;
  for (const auto& d : decls) {
    auto colon = d.find(':');
    if (colon == std::string::npos) throw std::runtime_error("bad --var, want name:Type: " + d);
    std::string name = d.substr(0, colon);
    while (!name.empty() && name.back() == ' ') name.pop_back();
    e.vars[name] = lsl::parse_type(d.substr(colon + 1));
  }
  return e;
}

int run_check(const std::string& path, const lsl::CheckOptions& opts, bool as_json) {
  lsl::ProofScript script = lsl::parse_script(slurp(path));
  lsl::CheckReport rep = lsl::check_script(script, opts);
  std::cout << (as_json ? lsl::report_json(rep) : lsl::report_text(rep)) << "\n";
  if (!rep.accepted) return 4;
  return rep.fully_verified ? 0 : 3;
}

int run_eval(const std::string& path, long fuel, bool as_json) {
  lsl::TermPtr prog = lsl::parse_program(slurp(path));
  lsl::Env empty;
  lsl::typecheck_term(empty, prog);
  lsl::EvalResult r = lsl::evaluate({prog, {}, {}}, fuel);
  bool ok = r.status == lsl::EvalResult::Status::Converged;
  std::string value = lsl::print_term(r.config.term);
  if (as_json) {
    json out = {{"status", ok ? "converged" : "out_of_fuel"},
                {"value", ok ? value : ""},
                {"store_cells", r.config.store.size()},
                {"hidden_labels", r.config.hidden.size()}};
    std::cout << out.dump(2) << "\n";
  } else if (ok) {
    std::cout << value << "\n";
  } else {
    std::cout << "out of fuel after " << fuel << " steps\n";
  }
  return ok ? 0 : 1;
}

int run_elim(const std::string& text, const std::vector<std::string>& vars, bool trace,
             bool as_json) {
  lsl::Env env = env_from_decls(vars);
  lsl::FormulaPtr f = lsl::parse_formula(text);
  lsl::typecheck_formula(env, f);
  auto [g, tr] = lsl::eliminate_reachability(f, env);
  g = lsl::simplify(g, env);
  if (as_json) {
    json steps = json::array();
    for (const auto& s : tr.steps)
      steps.push_back({{"path", s.path}, {"rule", s.rule}, {"result", s.result}});
    json out = {{"input", lsl::print_formula(f)}, {"result", lsl::print_formula(g)}};
    if (trace) out["trace"] = steps;
    std::cout << out.dump(2) << "\n";
  } else {
    if (trace)
      for (const auto& s : tr.steps)
        std::cout << "[" << s.path << "] " << s.rule << "  ~>  " << s.result << "\n";
    std::cout << lsl::print_formula(g) << "\n";
  }
  return 0;
}

int run_sat(const std::string& model_path, const std::string& formula, const lsl::Bounds& b,
            bool as_json) {
  lsl::Model m = lsl::parse_model(slurp(model_path));
  lsl::check_model(m);
  lsl::FormulaPtr f = lsl::parse_formula(formula);
  lsl::Verdict v = lsl::satisfies(m, f, b);
  const char* name = v.v == lsl::VKind::True ? "True" : v.v == lsl::VKind::False ? "False" : "Unknown";
  if (as_json) {
    json out = {{"verdict", name}, {"reason", v.reason}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << name;
    if (!v.reason.empty()) std::cout << "  (" << v.reason << ")";
    std::cout << "\n";
  }
  return v.v == lsl::VKind::True ? 0 : v.v == lsl::VKind::False ? 1 : 2;
}

int run_classify(const std::string& kind, const std::string& text,
                 const std::vector<std::string>& vars, const std::string& y,
                 const std::vector<std::string>& except, bool as_json) {
  lsl::FormulaPtr f = lsl::parse_formula(text);
  lsl::Classification c;
  if (kind == "thin") {
    c = lsl::classify_thin(f, y, env_from_decls(vars));
  } else if (kind == "monotone") {
    c = lsl::classify_monotone(f);
  } else if (kind == "antimonotone") {
    c = lsl::classify_antimonotone(f);
  } else if (kind == "stateless") {
    c = lsl::classify_stateless(f);
  } else if (kind == "tame") {
    c = lsl::classify_tame(f);
  } else if (kind == "stateless-except") {
    c = lsl::classify_stateless_except(f, {except.begin(), except.end()});
  } else {
    std::cerr << "unknown kind '" << kind
              << "' (thin|monotone|antimonotone|stateless|tame|stateless-except)\n";
    return kExitUsage;
  }
  bool proven = c == lsl::Classification::Proven;
  if (as_json)
    std::cout << json{{"kind", kind}, {"verdict", proven ? "Proven" : "NotProven"}}.dump(2)
              << "\n";
  else
    std::cout << (proven ? "Proven" : "NotProven") << "\n";
  return proven ? 0 : 1;
}

// One corpus bundle: a program, its proof script, the report level the
// script is expected to reach, and optionally the program's value.
struct Bundle {
  std::string name;
  std::string program;   // path, relative to the manifest
  std::string script;    // path, relative to the manifest
  std::string expect;    // "fully_verified" | "open"
  std::string value;     // expected printed value ("" = don't evaluate)
};

std::vector<Bundle> load_manifest(const std::string& dir) {
  json m = json::parse(slurp(dir + "/corpus.json"));
  std::vector<Bundle> out;
  for (const auto& b : m.at("bundles"))
    out.push_back({b.at("name"), b.at("program"), b.at("script"), b.at("expect"),
                   b.value("value", "")});
  return out;
}

int run_corpus(const std::string& dir, const lsl::CheckOptions& opts, long fuel, bool as_json) {
  std::vector<Bundle> bundles = load_manifest(dir);
  json results = json::array();
  bool all_ok = true;
  for (const auto& b : bundles) {
    auto t0 = std::chrono::steady_clock::now();
    std::string level, value, error;
    bool ok = true;
    try {
      lsl::CheckReport rep = lsl::check_script(lsl::parse_script(slurp(dir + "/" + b.script)), opts);
      level = !rep.accepted ? "rule_error" : rep.fully_verified ? "fully_verified" : "open";
      if (level != b.expect) ok = false;
      if (!b.value.empty()) {
        lsl::TermPtr prog = lsl::parse_program(slurp(dir + "/" + b.program));
        lsl::Env empty;
        lsl::typecheck_term(empty, prog);
        lsl::EvalResult r = lsl::evaluate({prog, {}, {}}, fuel);
        if (r.status != lsl::EvalResult::Status::Converged) {
          ok = false;
          value = "<out of fuel>";
        } else {
          value = lsl::print_term(r.config.term);
          if (value != b.value) ok = false;
        }
      }
    } catch (const std::exception& ex) {
      ok = false;
      error = ex.what();
    }
    all_ok = all_ok && ok;
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    if (as_json) {
      json r = {{"name", b.name}, {"level", level},    {"expect", b.expect},
                {"ok", ok},       {"elapsed_ms", ms}};
      if (!b.value.empty()) r["value"] = value, r["expect_value"] = b.value;
      if (!error.empty()) r["error"] = error;
      results.push_back(r);
    } else {
      std::cout << (ok ? "ok   " : "FAIL ") << b.name << ": " << (error.empty() ? level : error);
      if (!b.value.empty() && error.empty()) std::cout << ", value " << value;
      std::cout << " (" << ms << " ms)\n";
    }
  }
  if (as_json)
    std::cout << json{{"ok", all_ok}, {"bundles", results}}.dump(2) << "\n";
  else
    std::cout << (all_ok ? "corpus: all bundles at expected level\n" : "corpus: FAILURES\n");
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toolkit for a program logic with local state"};
  app.require_subcommand(1);

  long dflt_fuel = env_long("LSL_FUEL", 1000000);
  lsl::Bounds dflt_bounds;
  dflt_bounds.nat_bound = static_cast<int>(env_long("LSL_NAT_BOUND", dflt_bounds.nat_bound));
  dflt_bounds.value_depth = static_cast<int>(env_long("LSL_VALUE_DEPTH", dflt_bounds.value_depth));

  bool as_json = false;
  std::uint64_t seed = 1;
  app.add_flag("--json", as_json, "emit JSON instead of text");
  app.add_option("--seed", seed, "seed for randomized searches");

  // check
  auto* check = app.add_subcommand("check", "check a proof script");
  std::string script_path;
  int trials = 60;
  bool trust = false;
  check->add_option("script", script_path, "proof script file")->required();
  check->add_option("--trials", trials, "refutation trials per obligation");
  check->add_flag("--trust-oracle", trust, "count refutation-free obligations as discharged");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a closed program");
  std::string prog_path;
  long fuel = dflt_fuel;
  ev->add_option("program", prog_path, "program file")->required();
  ev->add_option("--fuel", fuel, "maximum reduction steps");

  // elim
  auto* el = app.add_subcommand("elim", "eliminate reachability at finite types");
  std::string formula_text;
  std::vector<std::string> var_decls;
  bool trace = false;
  el->add_option("formula", formula_text, "formula")->required();
  el->add_option("--var", var_decls, "free variable typing, name:Type");
  el->add_flag("--trace", trace, "print the rewrite trace");

  // sat
  auto* sat = app.add_subcommand("sat", "bounded satisfaction on a model");
  std::string model_path, sat_formula;
  lsl::Bounds bounds = dflt_bounds;
  sat->add_option("model", model_path, "model file")->required();
  sat->add_option("formula", sat_formula, "formula")->required();
  sat->add_option("--nat-bound", bounds.nat_bound, "bound for Nat quantifiers");
  sat->add_option("--value-depth", bounds.value_depth, "depth for value enumeration");
  sat->add_option("--fuel", bounds.fuel, "evaluation fuel inside satisfaction");

  // classify
  auto* cl = app.add_subcommand("classify", "syntactic formula classifiers");
  std::string cl_kind, cl_formula, cl_y;
  std::vector<std::string> cl_vars, cl_except;
  cl->add_option("kind", cl_kind, "thin|monotone|antimonotone|stateless|tame|stateless-except")
      ->required();
  cl->add_option("formula", cl_formula, "formula")->required();
  cl->add_option("--var", cl_vars, "free variable typing, name:Type (for thin)");
  cl->add_option("--anchor", cl_y, "distinguished variable (for thin)");
  cl->add_option("--except", cl_except, "exempt references (for stateless-except)");

  // corpus
  auto* co = app.add_subcommand("corpus", "operate on the shipped corpus");
  auto* co_run = co->add_subcommand("run", "check every bundle and compare values");
  std::string corpus_dir = "corpus";
  co->require_subcommand(1);
  co_run->add_option("--dir", corpus_dir, "corpus directory (with corpus.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  lsl::CheckOptions copts;
  copts.bounds = bounds;
  copts.refute_trials = trials;
  copts.seed = seed;
  copts.trust_oracle = trust;

  try {
    if (*check) return run_check(script_path, copts, as_json);
    if (*ev) return run_eval(prog_path, fuel, as_json);
    if (*el) return run_elim(formula_text, var_decls, trace, as_json);
    if (*sat) return run_sat(model_path, sat_formula, bounds, as_json);
    if (*cl) return run_classify(cl_kind, cl_formula, cl_vars, cl_y, cl_except, as_json);
    if (*co_run) return run_corpus(corpus_dir, copts, fuel, as_json);
  } catch (const std::system_error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitFile;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
