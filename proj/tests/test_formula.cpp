#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lsl/formula.hpp"

using namespace lsl;

static FormulaPtr pf(const std::string& s) { return parse_formula(s); }

static Env env_with(std::initializer_list<std::pair<std::string, std::string>> vs) {
  Env e;
  for (const auto& [x, t] : vs) e.vars[x] = parse_type(t);
  return e;
}

TEST_CASE("basic parsing and printing round-trips") {
  for (const char* s :
       {"x = y", "x != y", "!x = 2", "~(x = y)", "x = y & y = z", "x = y | y = z",
        "x = y => y = x", "all n:Nat. n = n", "ex r:Ref(Nat). !r = 0", "nu x. x = y",
        "nubar x. x # y", "[!x]x # y", "<!x>x ~> y", "box x = y", "dia x = y", "x ~> y",
        "x # y", "f . x = z {z = 1}", "f . x = z {z = 1} @ [w, v]", "T", "F"}) {
    FormulaPtr f = pf(s);
    FormulaPtr g = pf(print_formula(f));
    CHECK_MESSAGE(formula_alpha_eq(f, g), "round-trip failed for: ", s);
  }
}

TEST_CASE("inequality desugars to negated equality") {
  FormulaPtr f = pf("x != y");
  REQUIRE(f->kind == FKind::Not);
  CHECK(f->kids[0]->kind == FKind::Eq);
}

TEST_CASE("T and F are the canonical abbreviations") {
  CHECK(is_false(pf("F")));
  CHECK(is_true(pf("T")));
  CHECK(formula_alpha_eq(pf("F"), pf("1 != 1")));
  CHECK(is_true(pf("~F")));
  CHECK(is_false(pf("~T")));
}

TEST_CASE("convergence sugar") {
  // f . x dv  ==  f . x = z {T}
  FormulaPtr f = pf("f . x dv");
  REQUIRE(f->kind == FKind::Eval);
  CHECK(is_true(f->kids[0]));
  CHECK(formula_alpha_eq(f, pf("f . x = z {T}")));
}

TEST_CASE("hoare-triple sugar is an implication") {
  FormulaPtr f = pf("{x = 1} f . x = z {z = 2}");
  REQUIRE(f->kind == FKind::Implies);
  CHECK(f->kids[1]->kind == FKind::Eval);
}

TEST_CASE("equality-anchor sugar introduces a fresh anchor") {
  // f . x = 3 {C}  ==  f . x = z {z = 3 & C}
  FormulaPtr f = pf("f . x = 3 {y = 1}");
  REQUIRE(f->kind == FKind::Eval);
  REQUIRE(f->kids[0]->kind == FKind::And);
  CHECK(f->kids[0]->kids[0]->kind == FKind::Eq);
  CHECK(formula_alpha_eq(f, pf("f . x = w {w = 3 & y = 1}")));
  // unit sugar
  CHECK(formula_alpha_eq(pf("f . x {y = 1}"), pf("f . x = w {w = () & y = 1}")));
}

TEST_CASE("multi-name content quantification nests") {
  CHECK(formula_alpha_eq(pf("[!x, y]x # y"), pf("[!x][!y]x # y")));
}

TEST_CASE("tuple unreachability sugar") {
  CHECK(formula_alpha_eq(pf("x # [y, z]"), pf("x # y & x # z")));
}

TEST_CASE("projections are compiled away") {
  FormulaPtr f = pf("pi1(e) = w");
  CHECK(formula_alpha_eq(f, pf("ex p, q. (e = <p, q> & p = w)")));
  FormulaPtr g = pf("pi2(e) = w");
  CHECK(formula_alpha_eq(g, pf("ex p, q. (e = <q, p> & p = w)")));
}

TEST_CASE("non-variable content subjects desugar via a fresh name") {
  FormulaPtr f = pf("[!!x](!x = 1)");
  // [!e]C with e = !x:  all c.(c = !x => [!c](!x = 1))
  REQUIRE(f->kind == FKind::Forall);
  REQUIRE(f->kids[0]->kind == FKind::Implies);
  CHECK(f->kids[0]->kids[1]->kind == FKind::AllContent);
}

TEST_CASE("free variables and binding") {
  auto fv = formula_free_vars(pf("all n:Nat. f . n = z {z = m}"));
  CHECK(fv == std::set<std::string>{"f", "m"});
  auto fv2 = formula_free_vars(pf("nu x. x = y"));
  CHECK(fv2 == std::set<std::string>{"y"});
}

TEST_CASE("alpha equivalence of binders") {
  CHECK(formula_alpha_eq(pf("all x:Nat. x = y"), pf("all z:Nat. z = y")));
  CHECK(!formula_alpha_eq(pf("all x:Nat. x = y"), pf("all z:Nat. y = y")));
  CHECK(formula_alpha_eq(pf("f . a = z {z = 1}"), pf("f . a = w {w = 1}")));
}

TEST_CASE("substitution for variables is capture avoiding") {
  FormulaPtr f = pf("ex y:Nat. x = y");
  FormulaPtr g = subst_var(f, m_var("y"), "x");
  REQUIRE(g->kind == FKind::Exists);
  CHECK(g->var != "y");
  CHECK(formula_alpha_eq(g, pf("ex w:Nat. y = w")));
}

TEST_CASE("substitution for dereferences") {
  FormulaPtr f = pf("!x = 1 & [!x](!x = 2) & y = !x");
  FormulaPtr g = subst_deref(f, m_nat(7), "x");
  // occurrences under [!x] are not replaced
  CHECK(formula_alpha_eq(g, pf("7 = 1 & [!x](!x = 2) & y = 7")));
}

TEST_CASE("logical substitution has the prescribed shape") {
  Env env = env_with({{"x", "Ref(Nat)"}, {"u", "Nat"}});
  FormulaPtr f = pf("!x = u");
  FormulaPtr g = logical_subst(f, m_nat(3), m_var("x"), env);
  CHECK(formula_alpha_eq(g, pf("all m:Nat. (m = 3 => [!x](!x = m => !x = u))")));
}

TEST_CASE("formula typechecking") {
  Env env = env_with({{"x", "Ref(Nat)"}, {"y", "Nat"}, {"f", "Nat -> Nat"}});
  CHECK_NOTHROW(typecheck_formula(env, pf("!x = 2")));
  CHECK_NOTHROW(typecheck_formula(env, pf("f . y = z {z = y}")));
  CHECK_NOTHROW(typecheck_formula(env, pf("x = f")));  // unmatchable but legal
  CHECK_THROWS_AS(typecheck_formula(env, pf("y ~> y")), TypeError);   // target not Ref
  CHECK_THROWS_AS(typecheck_formula(env, pf("nu n:Nat. n = y")), TypeError);
  CHECK_THROWS_AS(typecheck_formula(env, pf("[!y](y = 2)")), TypeError);
  CHECK_THROWS_AS(typecheck_formula(env, pf("f . x = z {z = 0}")), TypeError);
  // effect entries must be deref-free Refs
  CHECK_THROWS_AS(typecheck_formula(env, pf("f . y = z {z = y} @ [y]")), TypeError);
}

TEST_CASE("binder types are inferred from equations") {
  Env env = env_with({{"u", "Ref(Nat)"}});
  CHECK_NOTHROW(typecheck_formula(env, pf("nu x. (u = x & u # x)")));
  CHECK_NOTHROW(typecheck_formula(env, pf("ex m. m = !u & m = 3")));
  // A used binder with no constraining equation cannot be inferred.
  CHECK_THROWS_AS(typecheck_formula(env, pf("ex m. m ~> u")), TypeError);
}

TEST_CASE("fpn clauses") {
  CHECK(fpn(m_var("x")) == std::set<std::string>{"x"});
  CHECK(fpn(parse_formula("!x = 1")->e1).empty());
  CHECK(fpn(m_pair(m_var("x"), m_deref(m_var("y")))) == std::set<std::string>{"x"});
  CHECK(fpn(m_inj(1, m_var("x"), nullptr)) == std::set<std::string>{"x"});
  CHECK(fpn(m_unit()).empty());
}

TEST_CASE("active dereferences") {
  CHECK(active_derefs(pf("!x = 1 & !y = 2")) == std::set<std::string>{"x", "y"});
  CHECK(active_derefs(pf("box !x = 1")).empty());
  CHECK(active_derefs(pf("[!x](!x = 1)")).empty());
  CHECK(active_derefs(pf("<!x>(!x = 1)")).empty());
  CHECK(active_derefs(pf("ex x:Ref(Nat). !x = 1")).empty());  // bound
}

TEST_CASE("classifier: thin") {
  Env env = env_with({{"y", "Nat"}, {"x", "Ref(Nat)"}, {"u", "Unit -> Nat"}});
  CHECK(classify_thin(pf("e = e2"), "x", env) == Classification::Proven);
  CHECK(classify_thin(pf("dia u . () = z {z = 2}"), "x", env) == Classification::NotProven);
  CHECK(classify_thin(pf("dia u . () = z {z = 2}"), "y", env) == Classification::Proven);
  CHECK(classify_thin(pf("box u . () = z {z = 2}"), "x", env) == Classification::Proven);
  CHECK(classify_thin(pf("ex n:Nat. x ~> w & n = 1"), "x", env) == Classification::Proven);
}

TEST_CASE("classifier: monotone and antimonotone") {
  CHECK(classify_monotone(pf("x = y & w ~> v")) == Classification::Proven);
  CHECK(classify_monotone(pf("x # y")) == Classification::Proven);
  CHECK(classify_antimonotone(pf("~(x = y)")) == Classification::Proven);
  CHECK(classify_monotone(pf("dia u . () = z {z = 0}")) == Classification::NotProven);
  CHECK(classify_monotone(pf("all x:Ref(Nat). x # y")) == Classification::Proven);
  CHECK(classify_monotone(pf("ex x:Nat. x = y")) == Classification::Proven);
  CHECK(classify_monotone(pf("ex x:Ref(Nat). x = y")) == Classification::NotProven);
}

TEST_CASE("classifier: stateless and tame") {
  CHECK(classify_stateless(pf("box !x = 1")) == Classification::Proven);
  CHECK(classify_stateless(pf("x = y & y # z")) == Classification::Proven);
  CHECK(classify_stateless(pf("!x = 7")) == Classification::NotProven);
  CHECK(classify_stateless_except(pf("!x = 7"), {"x"}) == Classification::Proven);
  CHECK(classify_stateless_except(pf("!x = 7 & !y = 1"), {"x"}) == Classification::NotProven);
  CHECK(classify_tame(pf("[!w]box u . () = z {T}")) == Classification::Proven);
  CHECK(classify_tame(pf("dia u . () = z {T}")) == Classification::NotProven);
  CHECK(classify_tame(pf("x = y => y = x")) == Classification::NotProven);
}

TEST_CASE("desugaring is idempotent") {
  for (const char* s : {"pi1(e) = w", "[!!x](!x = 1)", "x # [y, z]", "f . x = 3 {y = 1}"}) {
    FormulaPtr f = pf(s);
    CHECK(formula_alpha_eq(desugar(f), f));
  }
}

TEST_CASE("bare boolean terms act as equations with true") {
  FormulaPtr f = pf("odd(n)");
  REQUIRE(f->kind == FKind::Eq);
  CHECK(formula_alpha_eq(f, pf("odd(n) = true")));
  Env env = env_with({{"n", "Nat"}});
  CHECK_NOTHROW(typecheck_formula(env, f));
}
