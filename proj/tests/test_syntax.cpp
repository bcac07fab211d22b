#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lsl/parser.hpp"
#include "lsl/term.hpp"
#include "lsl/types.hpp"

using namespace lsl;

static TermPtr reparse(const TermPtr& m) { return parse_program(print_term(m)); }

TEST_CASE("type parse and print round-trip") {
  for (const char* s : {"Nat", "Unit -> Bool", "Nat -> Nat -> Nat", "(Nat -> Nat) -> Nat",
                        "Ref(Nat)", "Nat * Bool + Unit", "mu X.Unit + Nat * X",
                        "Ref(Nat -> Nat)", "(Nat + Bool) * Unit"}) {
    TypePtr t = parse_type(s);
    TypePtr t2 = parse_type(print_type(t));
    CHECK(type_equal(t, t2));
    CHECK(print_type(t) == print_type(t2));
  }
}

TEST_CASE("type equality unfolds mu") {
  TypePtr list = parse_type("mu X.Unit + Nat * X");
  CHECK(type_equal(list, unfold_mu(list)));
  CHECK(type_equal(parse_type("Unit + Nat * (mu X.Unit + Nat * X)"), list));
  CHECK(!type_equal(list, parse_type("mu X.Unit + Bool * X")));
  CHECK(type_equal(parse_type("mu X.Nat -> X"), parse_type("mu Y.Nat -> Y")));
}

TEST_CASE("finite types exclude arrows and genuine recursion") {
  CHECK(finite_type(parse_type("Nat * (Bool + Unit)")));
  CHECK(finite_type(parse_type("Ref(Ref(Nat))")));
  CHECK(!finite_type(parse_type("Nat -> Nat")));
  CHECK(!finite_type(parse_type("Ref(Nat -> Nat)")));
  CHECK(!finite_type(parse_type("mu X.Unit + X")));
  CHECK(finite_type(parse_type("mu X.Unit + Nat")));  // vacuous binder
}

TEST_CASE("arithmetic precedence") {
  TermPtr m = parse_program("1 + 2 * 3");
  REQUIRE(m->kind == TermKind::Op);
  CHECK(m->name == "add");
  CHECK(m->kids[1]->name == "mul");
  CHECK(print_term(m) == "1 + 2 * 3");
  CHECK(print_term(parse_program("(1 + 2) * 3")) == "(1 + 2) * 3");
}

TEST_CASE("application binds tighter than arithmetic") {
  TermPtr m = parse_program("fun f:Nat -> Nat. f 1 + f 2");
  REQUIRE(m->kind == TermKind::Lam);
  CHECK(m->kids[0]->name == "add");
  CHECK(m->kids[0]->kids[0]->kind == TermKind::App);
}

TEST_CASE("dereference and assignment") {
  TermPtr m = parse_program("fun x:Ref(Nat). x := !x + 1");
  REQUIRE(m->kind == TermKind::Lam);
  CHECK(m->kids[0]->kind == TermKind::Assign);
  CHECK(m->kids[0]->kids[1]->name == "add");
  CHECK(alpha_eq(reparse(m), m));
}

TEST_CASE("the increment generator parses and round-trips") {
  const char* inc = "let x = ref(0) in fun().(x := !x + 1; !x)";
  TermPtr m = parse_program(inc);
  // let is application of an abstraction to ref(0)
  REQUIRE(m->kind == TermKind::App);
  CHECK(m->kids[0]->kind == TermKind::Lam);
  CHECK(m->kids[1]->kind == TermKind::RefNew);
  CHECK(alpha_eq(reparse(m), m));
}

TEST_CASE("multi-binding let desugars to nested lets") {
  TermPtr m = parse_program("let a = ref(0), b = ref(1) in !a + !b");
  REQUIRE(m->kind == TermKind::App);
  TermPtr inner = m->kids[0]->kids[0];
  CHECK(inner->kind == TermKind::App);
  CHECK(alpha_eq(m, parse_program("let a = ref(0) in let b = ref(1) in !a + !b")));
}

TEST_CASE("sequencing is sugar for unit-parameter application") {
  TermPtr m = parse_program("x := 1; !x");
  REQUIRE(m->kind == TermKind::App);
  CHECK(m->kids[0]->kind == TermKind::Lam);
  CHECK(m->kids[1]->kind == TermKind::Assign);
  CHECK(print_term(m) == "x := 1; !x");
}

TEST_CASE("pairs, projections, sums, case") {
  TermPtr m = parse_program("pi1(<1, true>)");
  REQUIRE(m->kind == TermKind::Proj);
  CHECK(m->kids[0]->kind == TermKind::Pair);
  CHECK(alpha_eq(reparse(m), m));

  TermPtr c = parse_program("case inj1[Nat + Bool](3) of { inj1(x).x + 1 | inj2(y).0 }");
  REQUIRE(c->kind == TermKind::Case);
  CHECK(c->kids[0]->kind == TermKind::Inj);
  CHECK(c->kids[0]->idx == 1);
  CHECK(type_equal(c->kids[0]->type, parse_type("Nat + Bool")));
  CHECK(alpha_eq(reparse(c), c));
}

TEST_CASE("comparison vs pair disambiguation") {
  TermPtr cmp = parse_program("fun x:Nat. x < 3");
  CHECK(cmp->kids[0]->name == "lt");
  TermPtr pr = parse_program("<1, 2>");
  CHECK(pr->kind == TermKind::Pair);
}

TEST_CASE("recursion syntax") {
  const char* fact =
      "mu f:Nat -> Nat. fun n:Nat. if n = 0 then 1 else n * f (n - 1)";
  TermPtr m = parse_program(fact);
  REQUIRE(m->kind == TermKind::Rec);
  CHECK(m->kids[0]->kind == TermKind::Lam);
  CHECK(alpha_eq(reparse(m), m));
}

TEST_CASE("if/then/else extends maximally right") {
  TermPtr m = parse_program("if true then 1 + 2 else 3 + 4");
  REQUIRE(m->kind == TermKind::If);
  CHECK(m->kids[1]->name == "add");
  CHECK(m->kids[2]->name == "add");
}

TEST_CASE("location literals only in value literals") {
  CHECK_THROWS(parse_program("!#l0"));
  TermPtr v = parse_value_literal("#l3");
  REQUIRE(v->kind == TermKind::Loc);
  CHECK(v->label == 3);
}

TEST_CASE("substitution is capture avoiding") {
  // (fun y:Nat. x + y)[y/x] must rename the binder.
  TermPtr body = parse_program("fun y:Nat. x + y");
  TermPtr r = substitute(body, m_var("y"), "x");
  REQUIRE(r->kind == TermKind::Lam);
  CHECK(r->name != "y");
  CHECK(r->kids[0]->kids[0]->name == "y");   // the substituted free y
  CHECK(r->kids[0]->kids[1]->name == r->name);
  CHECK(alpha_eq(substitute(parse_program("fun z:Nat. x + z"), m_nat(5), "x"),
                 parse_program("fun z:Nat. 5 + z")));
}

TEST_CASE("substitution rejects non-values") {
  CHECK_THROWS(substitute(m_var("x"), parse_program("1 + 2"), "x"));
}

TEST_CASE("alpha equivalence") {
  CHECK(alpha_eq(parse_program("fun x:Nat. x"), parse_program("fun y:Nat. y")));
  CHECK(!alpha_eq(parse_program("fun x:Nat. x"), parse_program("fun y:Nat. 1")));
  CHECK(!alpha_eq(parse_program("fun x:Nat. z"), parse_program("fun y:Nat. w")));
  CHECK(alpha_eq(parse_program("mu f:Nat -> Nat. fun x:Nat. f x"),
                 parse_program("mu g:Nat -> Nat. fun y:Nat. g y")));
}

TEST_CASE("free variables and labels") {
  auto fv = free_vars(parse_program("fun x:Nat. x + y * z"));
  CHECK(fv == std::set<std::string>{"y", "z"});
  auto fl = free_labels(parse_value_literal("<#l1, fun().!#l4>"));
  CHECK(fl == std::set<int>{1, 4});
}

TEST_CASE("fresh name avoids clashes") {
  std::set<std::string> used = {"x", "x1"};
  CHECK(fresh_name("x", used) == "x2");
  CHECK(fresh_name("y", used) == "y");
}

TEST_CASE("values are recognized") {
  CHECK(is_value(parse_program("fun x:Nat. x + 1")));
  CHECK(is_value(parse_program("<1, <true, ()>>")));
  CHECK(is_value(parse_program("inj2[Nat + Bool](false)")));
  CHECK(!is_value(parse_program("1 + 2")));
  CHECK(!is_value(parse_program("ref(0)")));
  CHECK(!is_value(parse_program("<1, !x>")));
}

TEST_CASE("parse errors carry positions") {
  try {
    parse_program("fun x:Nat.\n  x +");
    CHECK(false);
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}
