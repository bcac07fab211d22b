#include "lsl/model.hpp"

#include <sstream>
#include <stdexcept>
#include <vector>

#include "lsl/parser.hpp"

namespace lsl {

namespace {

TermPtr relabel(const TermPtr& t, const std::map<int, int>& ren) {
  if (t->kind == TermKind::Loc) {
    auto it = ren.find(t->label);
    if (it == ren.end()) return t;
    return m_loc(it->second);
  }
  bool changed = false;
  std::vector<TermPtr> kids;
  kids.reserve(t->kids.size());
  for (const auto& k : t->kids) {
    TermPtr r = relabel(k, ren);
    changed |= (r != k);
    kids.push_back(r);
  }
  if (!changed) return t;
  auto t2 = std::make_shared<Term>(*t);
  t2->kids = std::move(kids);
  return t2;
}

void collect_labels_preorder(const TermPtr& t, std::vector<int>& out) {
  if (t->kind == TermKind::Loc) out.push_back(t->label);
  for (const auto& k : t->kids) collect_labels_preorder(k, out);
}

}  // namespace

Env model_env(const Model& m) {
  Env env;
  for (const auto& [l, ct] : m.labtypes) env.labels[l] = t_ref(ct);
  Env label_only = env;
  for (const auto& [x, v] : m.env) env.vars[x] = typecheck_term(label_only, v);
  return env;
}

void check_model(const Model& m) {
  for (int l : m.hidden)
    if (!m.store.count(l))
      throw std::runtime_error("hidden label #l" + std::to_string(l) + " not in store");
  for (const auto& [l, v] : m.store) {
    (void)v;
    if (!m.labtypes.count(l))
      throw std::runtime_error("no content type for label #l" + std::to_string(l));
  }
  Env env = model_env(m);  // typechecks env values
  typecheck_store(env, m.store);
  for (const auto& [x, v] : m.env) {
    if (!is_value(v)) throw std::runtime_error("environment value for " + x + " is not a value");
    if (!free_vars(v).empty())
      throw std::runtime_error("environment value for " + x + " is open");
    for (int l : free_labels(v))
      if (!m.store.count(l))
        throw std::runtime_error("environment value for " + x + " has dangling label");
  }
  for (const auto& [l, v] : m.store)
    for (int l2 : free_labels(v))
      if (!m.store.count(l2))
        throw std::runtime_error("store value at #l" + std::to_string(l) + " has dangling label");
}

std::optional<Model> model_extend(const Model& m, const std::string& name, const TermPtr& t,
                                  long fuel) {
  // Close the program over the model environment.
  TermPtr closed = t;
  for (const auto& [x, v] : m.env)
    if (free_vars(closed).count(x)) closed = substitute(closed, v, x);
  if (!free_vars(closed).empty())
    throw std::runtime_error("program has free variables outside the model: " +
                             *free_vars(closed).begin());

  Model out = m;
  Config cur{closed, m.store, m.hidden};
  // Step manually so each fresh allocation can be typed at allocation time
  // (contents may later be knotted through the store, but the initial value
  // is always typable under the labels that already exist).
  for (long k = 0; k < fuel; k++) {
    auto next = step(cur);
    if (!next) {
      out.store = cur.store;
      out.hidden = cur.hidden;
      out.env[name] = cur.term;
      return out;
    }
    if (next->store.size() != cur.store.size()) {
      Env lab;
      for (const auto& [l, ct] : out.labtypes) lab.labels[l] = t_ref(ct);
      for (const auto& [l, v] : next->store)
        if (!out.labtypes.count(l)) out.labtypes[l] = typecheck_term(lab, v);
    }
    cur = *next;
  }
  return std::nullopt;
}

Model model_update_label(const Model& m, int label, const TermPtr& v) {
  if (!m.store.count(label))
    throw std::runtime_error("update at unallocated label #l" + std::to_string(label));
  Model out = m;
  out.store[label] = v;
  return out;
}

std::set<int> reachable_labels(const Model& m, const TermPtr& v) {
  return label_closure(free_labels(v), m.store);
}

Model permute(const Model& m, const Permutation& p) {
  // Validate: a bijection on model variables, type-preserving.
  Env env = model_env(m);
  std::set<std::string> range;
  for (const auto& [x, y] : p) {
    if (!m.env.count(x) || !m.env.count(y))
      throw std::runtime_error("permutation mentions unknown variable");
    if (!range.insert(y).second) throw std::runtime_error("permutation is not injective");
    if (!type_equal(env.vars.at(x), env.vars.at(y)))
      throw std::runtime_error("permutation does not preserve types: " + x + " vs " + y);
  }
  for (const auto& [x, y] : p) {
    (void)y;
    if (!range.count(x)) throw std::runtime_error("permutation domain differs from codomain");
  }
  Model out = m;
  for (const auto& [x, y] : p) out.env[y] = m.env.at(x);
  return out;
}

Model canonicalize(const Model& m) {
  // (i) Garbage-collect hidden cells not reachable from the environment or
  // the visible store.
  std::set<int> seed;
  for (const auto& [l, v] : m.store) {
    (void)v;
    if (!m.hidden.count(l)) seed.insert(l);
  }
  for (const auto& [x, v] : m.env) {
    (void)x;
    auto fl = free_labels(v);
    seed.insert(fl.begin(), fl.end());
  }
  std::set<int> keep = label_closure(seed, m.store);

  Model g;
  g.env = m.env;
  g.tymap = m.tymap;
  for (const auto& [l, v] : m.store)
    if (keep.count(l) || !m.hidden.count(l)) {
      g.store[l] = v;
      if (m.labtypes.count(l)) g.labtypes[l] = m.labtypes.at(l);
      if (m.hidden.count(l)) g.hidden.insert(l);
    }

  // (ii) Rename hidden labels in first-use order: environment values by
  // variable name, then visible store cells by label, then breadth-first
  // through the discovered hidden cells.
  std::vector<int> order;
  std::set<int> seen;
  auto visit = [&](const TermPtr& v) {
    std::vector<int> ls;
    collect_labels_preorder(v, ls);
    for (int l : ls)
      if (g.hidden.count(l) && seen.insert(l).second) order.push_back(l);
  };
  for (const auto& [x, v] : g.env) {
    (void)x;
    visit(v);
  }
  for (const auto& [l, v] : g.store)
    if (!g.hidden.count(l)) {
      (void)l;
      visit(v);
    }
  for (size_t i = 0; i < order.size(); i++) {
    auto it = g.store.find(order[i]);
    if (it != g.store.end()) visit(it->second);
  }
  // Hidden cells unreachable from anywhere visible were GC'd, except those
  // reachable only from other kept-but-unvisited cells; sweep any remainder
  // in label order for determinism.
  for (const auto& [l, v] : g.store) {
    (void)v;
    if (g.hidden.count(l) && seen.insert(l).second) order.push_back(l);
  }
  for (size_t i = 0; i < order.size(); i++) {
    auto it = g.store.find(order[i]);
    if (it != g.store.end()) visit(it->second);
  }

  std::map<int, int> ren;
  std::set<int> visible;
  for (const auto& [l, v] : g.store) {
    (void)v;
    if (!g.hidden.count(l)) visible.insert(l);
  }
  int next = 0;
  for (int l : order) {
    while (visible.count(next)) next++;
    ren[l] = next++;
  }

  Model out;
  out.tymap = g.tymap;
  for (const auto& [x, v] : g.env) out.env[x] = relabel(v, ren);
  for (const auto& [l, v] : g.store) {
    int l2 = g.hidden.count(l) ? ren.at(l) : l;
    out.store[l2] = relabel(v, ren);
    if (g.hidden.count(l)) out.hidden.insert(l2);
    if (g.labtypes.count(l)) out.labtypes[l2] = g.labtypes.at(l);
  }
  return out;
}

Approx model_equiv_approx(const Model& a, const Model& b) {
  Model ca = canonicalize(a);
  Model cb = canonicalize(b);
  if (ca.hidden != cb.hidden) return Approx::Unknown;
  if (ca.env.size() != cb.env.size() || ca.store.size() != cb.store.size())
    return Approx::Unknown;
  if (ca.tymap.size() != cb.tymap.size()) return Approx::Unknown;
  for (const auto& [x, t] : ca.tymap) {
    auto it = cb.tymap.find(x);
    if (it == cb.tymap.end() || !type_equal(t, it->second)) return Approx::Unknown;
  }
  for (const auto& [x, v] : ca.env) {
    auto it = cb.env.find(x);
    if (it == cb.env.end() || !alpha_eq(v, it->second)) return Approx::Unknown;
  }
  for (const auto& [l, v] : ca.store) {
    auto it = cb.store.find(l);
    if (it == cb.store.end() || !alpha_eq(v, it->second)) return Approx::Unknown;
  }
  return Approx::Equal;
}

Symmetry is_symmetry(const Model& m, const Permutation& p) {
  return model_equiv_approx(permute(m, p), m) == Approx::Equal ? Symmetry::Proven
                                                              : Symmetry::NotProven;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

int parse_label_tok(const std::string& tok) {
  std::string t = trim(tok);
  if (t.size() < 2 || t[0] != 'l') throw std::runtime_error("bad label '" + t + "'");
  return std::stoi(t.substr(1));
}

// Splits "VALUE : TYPE" on the last " : " outside the value (printed values
// never contain a spaced colon). Returns {value-text, type-or-empty}.
std::pair<std::string, std::string> split_annot(const std::string& s) {
  size_t p = s.rfind(" : ");
  if (p == std::string::npos) return {trim(s), ""};
  return {trim(s.substr(0, p)), trim(s.substr(p + 3))};
}

}  // namespace

Model parse_model(const std::string& text) {
  Model m;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<std::pair<int, std::string>> untyped_store;  // inferred later
  while (std::getline(in, line)) {
    lineno++;
    std::string s = trim(line);
    if (s.empty() || s.rfind("//", 0) == 0) continue;
    auto fail = [&](const std::string& msg) -> void {
      throw std::runtime_error("model file line " + std::to_string(lineno) + ": " + msg);
    };
    if (s.rfind("hidden:", 0) == 0) {
      std::string rest = trim(s.substr(7));
      if (rest.front() != '[' || rest.back() != ']') fail("expected [l0, ...]");
      std::string body = rest.substr(1, rest.size() - 2);
      std::istringstream toks(body);
      std::string tok;
      while (std::getline(toks, tok, ','))
        if (!trim(tok).empty()) m.hidden.insert(parse_label_tok(tok));
    } else if (s.rfind("tyvar:", 0) == 0) {
      std::string rest = trim(s.substr(6));
      size_t eq = rest.find('=');
      if (eq == std::string::npos) fail("expected X = T");
      m.tymap[trim(rest.substr(0, eq))] = parse_type(trim(rest.substr(eq + 1)));
    } else if (s.rfind("env:", 0) == 0) {
      std::string rest = trim(s.substr(4));
      size_t eq = rest.find('=');
      if (eq == std::string::npos) fail("expected x = value");
      std::string x = trim(rest.substr(0, eq));
      auto [vtxt, ttxt] = split_annot(rest.substr(eq + 1));
      m.env[x] = parse_value_literal(vtxt);
      (void)ttxt;  // env types are recomputed from the value
    } else if (s.rfind("store:", 0) == 0) {
      std::string rest = trim(s.substr(6));
      size_t arrow = rest.find("|->");
      if (arrow == std::string::npos) fail("expected l |-> value");
      int l = parse_label_tok(rest.substr(0, arrow));
      auto [vtxt, ttxt] = split_annot(rest.substr(arrow + 3));
      m.store[l] = parse_value_literal(vtxt);
      if (!ttxt.empty())
        m.labtypes[l] = parse_type(ttxt);
      else
        untyped_store.emplace_back(l, vtxt);
    } else {
      fail("unrecognized line");
    }
  }
  // Infer missing content types bottom-up to a fixpoint.
  bool progress = true;
  while (progress && !untyped_store.empty()) {
    progress = false;
    for (auto it = untyped_store.begin(); it != untyped_store.end();) {
      Env lab;
      for (const auto& [l, ct] : m.labtypes) lab.labels[l] = t_ref(ct);
      try {
        m.labtypes[it->first] = typecheck_term(lab, m.store.at(it->first));
        it = untyped_store.erase(it);
        progress = true;
      } catch (const TypeError&) {
        ++it;
      }
    }
  }
  if (!untyped_store.empty())
    throw std::runtime_error(
        "cannot infer content type for label l" + std::to_string(untyped_store.front().first) +
        "; annotate the store line with ': T'");
  check_model(m);
  return m;
}

std::string print_model(const Model& m) {
  std::ostringstream os;
  os << "hidden: [";
  bool first = true;
  for (int l : m.hidden) {
    if (!first) os << ", ";
    os << "l" << l;
    first = false;
  }
  os << "]\n";
  for (const auto& [x, t] : m.tymap) os << "tyvar: " << x << " = " << print_type(t) << "\n";
  for (const auto& [x, v] : m.env) os << "env: " << x << " = " << print_term(v) << "\n";
  for (const auto& [l, v] : m.store) {
    os << "store: l" << l << " |-> " << print_term(v);
    if (m.labtypes.count(l)) os << " : " << print_type(m.labtypes.at(l));
    os << "\n";
  }
  return os.str();
}

}  // namespace lsl
