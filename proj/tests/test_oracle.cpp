#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lsl/oracle.hpp"
#include "lsl/parser.hpp"

using namespace lsl;

namespace {

struct Cell {
  TermPtr v;
  TypePtr t;
};

Model mk(std::map<std::string, TermPtr> env, std::map<int, Cell> cells,
         std::set<int> hidden = {}) {
  Model m;
  m.env = std::move(env);
  for (auto& [l, c] : cells) {
    m.store[l] = c.v;
    m.labtypes[l] = c.t;
  }
  m.hidden = std::move(hidden);
  return m;
}

Verdict sat(const Model& m, const std::string& f, Bounds b = {}) {
  return satisfies(m, parse_formula(f), b);
}

}  // namespace

TEST_CASE("term interpretation: lookups, pairs, dereference chains") {
  Model m = mk({{"x", m_loc(0)}}, {{0, {m_nat(2), t_nat()}}});
  CHECK(alpha_eq(interpret_term(m, m_deref(m_var("x"))), m_nat(2)));
  CHECK(alpha_eq(interpret_term(m, m_pair(m_var("x"), m_deref(m_var("x")))),
                 m_pair(m_loc(0), m_nat(2))));

  Model m2 = mk({{"x", m_loc(0)}},
                {{0, {m_loc(1), t_ref(t_nat())}}, {1, {m_nat(7), t_nat()}}});
  CHECK(alpha_eq(interpret_term(m2, m_deref(m_deref(m_var("x")))), m_nat(7)));

  CHECK_THROWS(interpret_term(m, m_var("zz")));
}

TEST_CASE("equality on the shared-label model") {
  Model m = mk({{"x", m_loc(0)}, {"w", m_loc(0)}}, {{0, {m_nat(5), t_nat()}}});
  CHECK(sat(m, "x = w").v == VKind::True);
  CHECK(sat(m, "x != w").v == VKind::False);
  CHECK(sat(m, "!x = 5").v == VKind::True);
  CHECK(sat(m, "!x = 4").v == VKind::False);
  CHECK(sat(m, "!x = 5 & !w = 5").v == VKind::True);
  CHECK(sat(m, "!x = 4 | !w = 5").v == VKind::True);
  CHECK(sat(m, "!x = 5 => !w = 4").v == VKind::False);
}

TEST_CASE("hiding quantifier: the shared-label counterexample to C => nu x.C") {
  Model m = mk({{"x", m_loc(0)}, {"w", m_loc(0)}}, {{0, {m_nat(5), t_nat()}}});
  CHECK(sat(m, "x = w").v == VKind::True);
  CHECK(sat(m, "nu y. y = w").v == VKind::False);  // l is certainly not hidden
  CHECK(sat(m, "x = w => nu y. y = w").v == VKind::False);
}

TEST_CASE("hiding quantifier: true on hidden cells and on garbage extensions") {
  Model m = mk({{"u", m_loc(0)}}, {{0, {m_nat(1), t_nat()}}}, {0});
  CHECK(sat(m, "nu y. y = u").v == VKind::True);   // witness: the hidden cell
  CHECK(sat(m, "nu y. 1 = 1").v == VKind::True);   // hmm: y unconstrained
  Model m2 = mk({}, {{0, {m_nat(1), t_nat()}}});
  CHECK(sat(m2, "nu y:Ref(Nat). !y = 0").v == VKind::True);  // fresh garbage cell
}

TEST_CASE("quantifiers over base types") {
  Model m = mk({{"x", m_loc(0)}}, {{0, {m_nat(2), t_nat()}}});
  Bounds b;
  b.nat_bound = 3;
  CHECK(sat(m, "ex y:Nat. !x = y", b).v == VKind::True);
  CHECK(sat(m, "all y:Bool. y = true | y = false").v == VKind::True);
  CHECK(sat(m, "ex y:Nat. y = 12").v == VKind::Unknown);  // beyond nat_bound
  CHECK(sat(m, "ex y:Nat. y = 3").v == VKind::True);
  CHECK(sat(m, "all y:Nat. y = y").v == VKind::Unknown);  // the bound decides
  CHECK(sat(m, "all y:Nat. y = 1").v == VKind::False);
  CHECK(sat(m, "all y:Unit. y = ()").v == VKind::True);
  CHECK(sat(m, "ex p:Nat*Bool. p = <2, true>").v == VKind::True);
}

TEST_CASE("quantifiers over reference types include fresh cells") {
  Model m = mk({{"x", m_loc(0)}}, {{0, {m_nat(2), t_nat()}}});
  CHECK(sat(m, "all y:Ref(Nat). y ~> y").v == VKind::True);
  CHECK(sat(m, "ex y:Ref(Nat). y = x").v == VKind::True);
  // a fresh cell differs from every existing reference
  CHECK(sat(m, "ex y:Ref(Nat). y != x").v == VKind::True);
  CHECK(sat(m, "all y:Ref(Nat). y = x").v == VKind::False);
}

TEST_CASE("reachability and unreachability") {
  Model m = mk({{"x", m_loc(0)}, {"y", m_loc(1)}},
               {{0, {m_loc(1), t_ref(t_nat())}}, {1, {m_nat(3), t_nat()}}});
  CHECK(reachable_in_model(m, m_var("x"), m_var("y")));
  CHECK(!reachable_in_model(m, m_var("y"), m_var("x")));
  CHECK(sat(m, "x ~> y").v == VKind::True);
  CHECK(sat(m, "y # x").v == VKind::True);
  CHECK(sat(m, "x # y").v == VKind::False);
  CHECK(sat(m, "x ~> x").v == VKind::True);
  CHECK(sat(m, "3 # y").v == VKind::True);  // base values reach nothing
}

TEST_CASE("content quantification") {
  Model m = mk({{"x", m_loc(0)}}, {{0, {m_nat(2), t_nat()}}});
  CHECK(sat(m, "<!x> !x = 7").v == VKind::True);
  CHECK(sat(m, "[!x] !x = 2").v == VKind::False);
  CHECK(sat(m, "[!x] !x = !x").v == VKind::Unknown);  // Nat universe is truncated
  Model mb = mk({{"x", m_loc(0)}}, {{0, {m_bool(true), t_bool()}}});
  CHECK(sat(mb, "[!x] (!x = true | !x = false)").v == VKind::True);
  CHECK(sat(mb, "<!x> !x = false").v == VKind::True);
  // content quantification does not touch the actual store
  CHECK(sat(m, "(<!x> !x = 7) & !x = 2").v == VKind::True);
}

TEST_CASE("evaluation formulae") {
  Model m = mk({{"f", parse_program("fun a:Nat. a + 1")}}, {});
  CHECK(sat(m, "f . 2 = z {z = 3}").v == VKind::True);
  CHECK(sat(m, "f . 2 = z {z = 4}").v == VKind::False);
  CHECK(sat(m, "f . 2 dv").v == VKind::True);

  Model md = mk({{"d", parse_program("mu g:Nat -> Nat. fun a:Nat. g a")}}, {});
  Bounds small;
  small.fuel = 2000;
  CHECK(satisfies(md, parse_formula("d . 1 dv"), small).v == VKind::Unknown);
}

TEST_CASE("located evaluation formulae check the effect set") {
  Model m = mk({{"x", m_loc(0)}, {"f", parse_program("fun a:Nat. (x := a; a)")}},
               {{0, {m_nat(2), t_nat()}}});
  // writes only x: located form with effect {x} holds
  CHECK(sat(m, "f . 5 = z {z = 5} @ [x]").v == VKind::True);
  // claiming no effects is not provable: the write to x is observable
  CHECK(sat(m, "f . 5 = z {z = 5} @ []").v == VKind::Unknown);
  // a pure function supports the empty effect set
  Model mp = mk({{"g", parse_program("fun a:Nat. a * a")}, {"x", m_loc(0)}},
                {{0, {m_nat(2), t_nat()}}});
  CHECK(sat(mp, "g . 3 = z {z = 9} @ []").v == VKind::True);
}

TEST_CASE("necessity and possibility stay sound") {
  Model m = mk({{"x", m_loc(0)}}, {{0, {m_nat(5), t_nat()}}});
  CHECK(sat(m, "box 1 = 1").v == VKind::True);        // stateless and true
  CHECK(sat(m, "box !x = 5").v == VKind::Unknown);    // state-dependent
  CHECK(sat(m, "dia !x = 5").v == VKind::True);       // true here and now
  CHECK(sat(m, "dia !x = 9").v == VKind::Unknown);
  CHECK(sat(m, "box x = x").v == VKind::True);
}

TEST_CASE("the hidden-cell counterexample to nu x.C => C") {
  // (nu l)({u: fun().!l}, l |-> 5): the cell is hidden and inaccessible, yet
  // revealing it through nu makes it reachable from u.
  Model m = mk({{"u", parse_value_literal("fun().!#l0")}},
               {{0, {m_nat(5), t_nat()}}}, {0});
  CHECK(sat(m, "ex y:Ref(Nat). u ~> y").v == VKind::False);
  CHECK(sat(m, "nu x. ex y:Ref(Nat). u ~> y").v == VKind::True);
  CHECK(sat(m, "(nu x. ex y:Ref(Nat). u ~> y) => (ex y:Ref(Nat). u ~> y)").v ==
        VKind::False);
}

TEST_CASE("judgements on models: increments and assignment") {
  Judgement inc_shared;
  inc_shared.pre = parse_formula("T");
  inc_shared.program = parse_program(
      "let a = (let x = ref(0) in fun().(x := !x + 1; !x)) in a () + a ()");
  inc_shared.anchor = "u";
  inc_shared.post = parse_formula("u = 3");
  CHECK(check_judgement_on_model({}, inc_shared).v == VKind::True);

  Judgement inc_unshared;
  inc_unshared.pre = parse_formula("T");
  inc_unshared.program = parse_program(
      "let b = (fun().(let x = ref(0) in (x := !x + 1; !x))) in b () + b ()");
  inc_unshared.anchor = "u";
  inc_unshared.post = parse_formula("u = 2");
  CHECK(check_judgement_on_model({}, inc_unshared).v == VKind::True);

  Model m = mk({{"x", m_loc(0)}}, {{0, {m_nat(2), t_nat()}}});
  Judgement assign;
  assign.pre = parse_formula("!x = 2");
  assign.program = parse_program("x := 3");
  assign.anchor = "u";
  assign.post = parse_formula("!x = 3");
  CHECK(check_judgement_on_model(m, assign).v == VKind::True);

  Judgement wrong;
  wrong.pre = parse_formula("T");
  wrong.program = parse_program("1 + 1");
  wrong.anchor = "u";
  wrong.post = parse_formula("u = 3");
  CHECK(check_judgement_on_model({}, wrong).v == VKind::False);

  // unsatisfied precondition: no verdict about the triple
  Judgement mism;
  mism.pre = parse_formula("!x = 9");
  mism.program = parse_program("x := 3");
  mism.anchor = "u";
  mism.post = parse_formula("!x = 3");
  CHECK(check_judgement_on_model(m, mism).v == VKind::Unknown);
}

TEST_CASE("random models are deterministic per seed and well formed") {
  for (std::uint64_t s = 0; s < 100; s++) {
    Model a = gen_random_model(s);
    Model b = gen_random_model(s);
    CHECK(print_model(a) == print_model(b));
    CHECK_NOTHROW(check_model(a));
  }
  CHECK(print_model(gen_random_model(12)) != print_model(gen_random_model(13)));
}

TEST_CASE("refute: valid reachability axioms survive, absurdities fall") {
  Bounds b;
  CHECK(!refute(parse_formula("x ~> x"), b, 200, 7).countermodel.has_value());
  CHECK(!refute(parse_formula("<x1, x2> ~> y => (x1 ~> y | x2 ~> y)"), b, 200, 7)
             .countermodel.has_value());
  auto r = refute(parse_formula("!x = !x => F"), b, 50, 7);
  CHECK(r.countermodel.has_value());
  CHECK(r.trials_run <= 10);
}

TEST_CASE("refute finds the documented non-axiom countermodels") {
  Bounds b;
  GenParams p;
  p.max_labels = 2;
  p.max_env_vars = 3;
  auto r1 = refute(parse_formula("x = w => nu y. y = w"), b, 100, 11, p);
  REQUIRE(r1.countermodel.has_value());
  // shape: x and w share a visible label
  CHECK(alpha_eq(r1.countermodel->env.at("x"), r1.countermodel->env.at("w")));

  GenParams p2;
  p2.max_labels = 1;
  p2.max_env_vars = 2;
  auto r2 = refute(
      parse_formula("(nu x. ex y:Ref(Nat). u ~> y) => (ex y:Ref(Nat). u ~> y)"),
      b, 100, 11, p2);
  REQUIRE(r2.countermodel.has_value());
  // shape: a hidden cell reachable only through a closure
  CHECK(!r2.countermodel->hidden.empty());
}
