#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "lsl/parser.hpp"
#include "lsl/proof.hpp"

using namespace lsl;

namespace {

Env env_of(std::initializer_list<std::pair<std::string, std::string>> vars) {
  Env e;
  for (const auto& [x, t] : vars) e.vars[x] = parse_type(t);
  return e;
}

bool matches(const std::string& text, const Env& e, const std::string& id) {
  auto r = match_axiom(parse_formula(text), e);
  if (!r) {
    MESSAGE("no match for: " << text);
    return false;
  }
  if (r->find(id) == std::string::npos) {
    MESSAGE("matched '" << *r << "', wanted '" << id << "' for: " << text);
    return false;
  }
  return true;
}

CheckReport run(const std::string& script, int trials = 40) {
  CheckOptions o;
  o.refute_trials = trials;
  return check_script(parse_script(script), o);
}

bool all_valid(const CheckReport& r) {
  return std::all_of(r.steps.begin(), r.steps.end(), [](const StepReport& s) {
    if (s.state != StepState::Valid) MESSAGE("step " << s.index << ": " << s.detail);
    return s.state == StepState::Valid;
  });
}

bool some_rule_error(const CheckReport& r) {
  return std::any_of(r.steps.begin(), r.steps.end(),
                     [](const StepReport& s) { return s.state == StepState::RuleError; });
}

// The derived new-reference rule, instantiated at M = 3, N = x.
const char* kLetRef = R"(
# let x = ref(3) in x, with the cell kept disjoint from z
var z : Ref(Nat)
var y : Ref(Nat)
var i : X
var x : Ref(Nat)
1. {3 = 3} 3 :m {m = 3}  by Const
2. {!x = 3 & z # x} x :u {!x = 3 & z # x}  by Var
3. {3 = 3} ref(3) :x {nu y. ((!x = 3 & i # x) & x = y)}  by Ref(prem=1)
4. {3 = 3} ref(3) :x {nu y. ((!x = 3 & z # x) & x = y)}  by Subs(prem=3; i=i; e=z)
5. {(!x = 3 & z # x) & x = y} x :u {(!x = 3 & z # x) & x = y}  by InvVal(prem=2)
6. {3 = 3} let x = ref(3) in x :u {nu y. ((!x = 3 & z # x) & x = y)}  by LetOpen(prem=4,5)
7. {3 = 3} let x = ref(3) in x :u {nu x:Ref(Nat). (!x = 3 & z # x)}  by Conseq(prem=6)
)";

}  // namespace

TEST_CASE("tableau: propositional validity over opaque atoms") {
  CHECK(tableau_valid(parse_formula("(!x = 1 & y # x) => !x = 1")));
  CHECK(tableau_valid(parse_formula("((!x = 1 => y # x) & !x = 1) => y # x")));
  CHECK(tableau_valid(parse_formula("!x = 1 | ~(!x = 1)")));
  CHECK(!tableau_valid(parse_formula("!x = 1 => (!x = 1 & y # x)")));
  CHECK(!tableau_valid(parse_formula("!x = 1 => !x = 2")));
  // Quantified subformulas are atoms: alpha-equivalent forms close the branch.
  CHECK(tableau_valid(parse_formula("(all a:Nat. a = a) => (all b:Nat. b = b)")));
}

TEST_CASE("axiom matching: hiding, necessity, stability") {
  Env e = env_of({{"u", "Nat"}, {"x", "Ref(Nat)"}, {"w", "Ref(Nat)"}});
  CHECK(matches("(nu x. u = 3) => u = 3", e, "hiding-elim"));
  CHECK(matches("box (!x = 1 & u = 2) => (box !x = 1 & box u = 2)", e, "necessity-and"));
  CHECK(matches("(box !x = 1 & box u = 2) => box (!x = 1 & u = 2)", e, "necessity-and"));
  CHECK(matches("(box all a:Nat. box (u = a)) => (box all a:Nat. u = a)", e,
                "necessity-forall-stable"));
  CHECK(matches("(nu y. (w = y & !w = 3)) => nu w. !w = 3", e, "hiding-rename"));
  CHECK(!match_axiom(parse_formula("u = 3 => u = 4"), e).has_value());
}

TEST_CASE("axiom matching: reachability facts respect the source/target order") {
  Env e = env_of({{"n", "Nat"}, {"x", "Ref(Nat)"}, {"y", "Ref(Nat)"}});
  CHECK(matches("n # x", e, "unreach-base"));
  CHECK(matches("x ~> x", e, "reach-refl"));
  CHECK(matches("(y # x & y ~> y) => y # x", e, "unreach-trans"));
}

TEST_CASE("discharge pipeline tiers") {
  Env e = env_of({{"u", "Nat"}, {"x", "Ref(Nat)"}});
  CheckOptions o;
  o.refute_trials = 40;

  auto a = discharge(parse_formula("(u = 1 & !x = 2) => (u = 1 & !x = 2)"), e, o);
  CHECK(a.kind == DischargeKind::Discharged);
  CHECK(a.evidence == Evidence::Alpha);

  auto p = discharge(parse_formula("(u = 1 & !x = 2) => u = 1"), e, o);
  CHECK(p.kind == DischargeKind::Discharged);
  CHECK(p.evidence == Evidence::Propositional);

  auto s = discharge(parse_formula("(nu y. u = 3) => u = 3"), e, o);
  CHECK(s.kind == DischargeKind::Discharged);
  CHECK(s.evidence == Evidence::SchemaMatch);

  auto r = discharge(parse_formula("!x = !x => F"), e, o);
  CHECK(r.kind == DischargeKind::Refuted);

  auto open = discharge(parse_formula("all a:Nat. ex b:Nat. b = a + 1"), e, o);
  CHECK(open.kind == DischargeKind::Open);
  CHECK(open.evidence == Evidence::NoCounterexample);
  CheckOptions trust = o;
  trust.trust_oracle = true;
  auto t = discharge(parse_formula("all a:Nat. ex b:Nat. b = a + 1"), e, trust);
  CHECK(t.kind == DischargeKind::Discharged);
}

TEST_CASE("parse_script: steps, declarations, abbreviations") {
  ProofScript s = parse_script(kLetRef);
  CHECK(s.steps.size() == 7);
  CHECK(s.steps[0].rule == "Const");
  CHECK(s.steps[3].rule == "Subs");
  CHECK(s.steps[3].hints.at("e") == "z");
  CHECK(s.steps[5].premises == std::vector<int>{4, 5});
  CHECK(s.env.vars.count("z") == 1);

  CHECK_THROWS(parse_script("1. {T} 3 :m {m = 3}  by Const(prem=9)"));
  CHECK_THROWS(parse_script("1. {T} 3 :m {m = 3}  by NoSuchRule"));
  CHECK_THROWS(parse_script("1. {T} 3 :m {m = 3}"));

  ProofScript d = parse_script(
      "var x : Ref(Nat)\n"
      "def Inc = fun u:Unit. (x := !x + 1; !x)\n"
      "defc Spec(j) = !x = j\n"
      "1. {$Spec(2)} Inc 5 :m {$Spec(2)}  by assume\n");
  CHECK(d.steps.size() == 1);
  CHECK(d.steps[0].j.program->kind == TermKind::App);
  CHECK(formula_alpha_eq(d.steps[0].j.pre, parse_formula("!x = 2")));
}

TEST_CASE("check_script: the derived new-reference derivation is fully verified") {
  CheckReport r = run(kLetRef);
  CHECK(all_valid(r));
  CHECK(r.accepted);
  CHECK(r.fully_verified);
  // Step 7's consequence obligation went through the schema layer.
  bool saw_schema = false;
  for (const auto& ob : r.obligations)
    if (ob.step == 7 && ob.evidence == Evidence::SchemaMatch) saw_schema = true;
  CHECK(saw_schema);
}

TEST_CASE("check_script: universal auxiliaries require a base type over non-values") {
  // r has a Ref type, and the program is not a value: [AuxAll] must refuse.
  CheckReport r = run(
      "var x : Ref(Nat)\n"
      "var r : Ref(Nat)\n"
      "1. {T} x := 5 :u {u = () & r # x}  by assume\n"
      "2. {T} x := 5 :u {all r:Ref(Nat). (u = () & r # x)}  by AuxAll(prem=1)\n");
  REQUIRE(r.steps.size() == 2);
  CHECK(r.steps[1].state == StepState::RuleError);

  // The value form has no such restriction.
  CheckReport v = run(
      "var r : Ref(Nat)\n"
      "1. {T} 7 :u {u = 7}  by assume\n"
      "2. {T} 7 :u {all r:Ref(Nat). u = 7}  by AuxAllV(prem=1)\n");
  REQUIRE(v.steps.size() == 2);
  CHECK(v.steps[1].state == StepState::Valid);
}

TEST_CASE("check_script: assume steps stay open and block full verification") {
  CheckReport r = run(
      "var x : Ref(Nat)\n"
      "1. {T} !x :m {T}  by assume\n");
  CHECK(r.accepted);
  CHECK(!r.fully_verified);
  REQUIRE(r.obligations.size() == 1);
  CHECK(r.obligations[0].evidence == Evidence::AssumedByUser);
  CHECK(r.steps[0].state == StepState::ObligationOpen);
}

TEST_CASE("check_script: mutated conclusions are rejected") {
  // Anchor swapped for a program variable inside step 1's post-condition.
  std::string s1 = kLetRef;
  size_t p = s1.find("1. {3 = 3} 3 :m {m = 3}");
  REQUIRE(p != std::string::npos);
  s1.replace(p, 23, "1. {3 = 3} 3 :m {z = 3}");
  CHECK(some_rule_error(run(s1)));

  // Dropped conjunct in step 3's hidden post-condition.
  std::string s2 = kLetRef;
  p = s2.find("{nu y. ((!x = 3 & i # x) & x = y)}");
  REQUIRE(p != std::string::npos);
  s2.replace(p, 34, "{nu y. (!x = 3 & x = y)}");
  CHECK(some_rule_error(run(s2)));

  // Effect enlargement on a [Const] step.
  CHECK(some_rule_error(run(
      "var z : Ref(Nat)\n"
      "1. {3 = 3} 3 :m {m = 3} @ [z]  by Const\n")));
}

TEST_CASE("check_script: the located invariant rule derives the disjointness rule") {
  // [Inv-#] as a canned derivation: [Inv] with C0 = e # x, then [Conseq]
  // through the content-quantification axiom for unreachability.
  CheckReport r = run(
      "var x : Ref(Nat)\n"
      "var e : Ref(Nat)\n"
      "1. {T} x := 5 :m {m = ()} @ [x]  by assume\n"
      "2. {T & [!x] e # x} x := 5 :m {m = () & [!x] e # x} @ [x]  by Inv(prem=1)\n"
      "3. {T & e # x} x := 5 :m {m = () & e # x} @ [x]  by Conseq(prem=2)\n");
  REQUIRE(r.steps.size() == 3);
  CHECK(r.steps[1].state == StepState::Valid);
  CHECK(r.steps[2].state == StepState::Valid);
  for (const auto& ob : r.obligations)
    if (ob.step == 3) CHECK(!ob.open);
}

TEST_CASE("check_script: direct [InvSharp] application") {
  CheckReport r = run(
      "var x : Ref(Nat)\n"
      "var e : Ref(Nat)\n"
      "1. {T} x := 5 :m {m = ()} @ [x]  by assume\n"
      "2. {T & e # x} x := 5 :m {m = () & e # x} @ [x]  by InvSharp(prem=1)\n");
  REQUIRE(r.steps.size() == 2);
  CHECK(r.steps[1].state == StepState::Valid);
}

TEST_CASE("report rendering") {
  CheckReport r = run(kLetRef);
  std::string txt = report_text(r);
  CHECK(txt.find("fully verified") != std::string::npos);
  std::string js = report_json(r);
  CHECK(js.find("\"fully_verified\": true") != std::string::npos);
  CHECK(rule_names().size() > 35);
  CHECK(!axiom_ids().empty());
}
