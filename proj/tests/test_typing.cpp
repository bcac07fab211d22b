#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lsl/parser.hpp"
#include "lsl/typecheck.hpp"

using namespace lsl;

static TypePtr ty(const std::string& prog, const Env& env = {}) {
  return typecheck_term(env, parse_program(prog));
}

TEST_CASE("constants and operators") {
  CHECK(type_equal(ty("()"), t_unit()));
  CHECK(type_equal(ty("true"), t_bool()));
  CHECK(type_equal(ty("41 + 1"), t_nat()));
  CHECK(type_equal(ty("1 <= 2"), t_bool()));
  CHECK(type_equal(ty("not(odd(3))"), t_bool()));
  CHECK(type_equal(ty("fact(5)"), t_nat()));
  CHECK_THROWS_AS(ty("1 + true"), TypeError);
}

TEST_CASE("the increment generator has type Unit -> Nat") {
  CHECK(type_equal(ty("let x = ref(0) in fun().(x := !x + 1; !x)"),
                   parse_type("Unit -> Nat")));
}

TEST_CASE("dereference under an environment") {
  Env env;
  env.vars["x"] = parse_type("Ref(Nat)");
  CHECK(type_equal(ty("!x", env), t_nat()));
  CHECK(type_equal(ty("x := !x + 1", env), t_unit()));
}

TEST_CASE("assignment to a non-reference is rejected") {
  CHECK_THROWS_WITH_AS(ty("3 := 4"), doctest::Contains("[Assign]"), TypeError);
}

TEST_CASE("equality is restricted to base types") {
  CHECK(type_equal(ty("1 = 2"), t_bool()));
  CHECK(type_equal(ty("true = false"), t_bool()));
  CHECK_THROWS_AS(ty("(fun x:Nat. x) = (fun x:Nat. x)"), TypeError);
}

TEST_CASE("sums, products, case") {
  CHECK(type_equal(ty("<1, true>"), parse_type("Nat * Bool")));
  CHECK(type_equal(ty("pi2(<1, true>)"), t_bool()));
  CHECK(type_equal(ty("case inj1[Nat + Bool](3) of { inj1(x).x | inj2(y).0 }"), t_nat()));
  CHECK_THROWS_AS(ty("inj1[Nat + Bool](true)"), TypeError);
  CHECK_THROWS_AS(ty("case 3 of { inj1(x).x | inj2(y).y }"), TypeError);
}

TEST_CASE("recursion") {
  CHECK(type_equal(ty("mu f:Nat -> Nat. fun n:Nat. if n = 0 then 1 else n * f (n - 1)"),
                   parse_type("Nat -> Nat")));
  CHECK_THROWS_AS(ty("mu f:Nat. fun n:Nat. n"), TypeError);
}

TEST_CASE("recursive types via unfolding") {
  // A value of type mu X.Ref(X) can be dereferenced at the unfolded type.
  Env env;
  env.vars["r"] = parse_type("mu X.Ref(X)");
  CHECK(type_equal(ty("!r", env), parse_type("mu X.Ref(X)")));
  // Landin's knot shape: a reference holding a function that reads it.
  Env env2;
  env2.vars["k"] = parse_type("Ref(Unit -> Unit)");
  CHECK(type_equal(ty("k := fun().(!k) ()", env2), t_unit()));
}

TEST_CASE("if branches must agree") {
  CHECK_THROWS_AS(ty("if true then 1 else false"), TypeError);
  CHECK_THROWS_AS(ty("if 1 then 2 else 3"), TypeError);
}

TEST_CASE("store typing") {
  Env env;
  env.labels[0] = parse_type("Ref(Nat)");
  env.labels[1] = parse_type("Ref(Nat -> Nat)");
  Store ok = {{0, parse_value_literal("2")},
              {1, parse_value_literal("fun x:Nat. x + 1")}};
  CHECK_NOTHROW(typecheck_store(env, ok));

  Store bad_type = {{0, parse_value_literal("true")}};
  CHECK_THROWS_AS(typecheck_store(env, bad_type), TypeError);

  Store open_val = {{1, parse_value_literal("fun x:Nat. x + y")}};
  CHECK_THROWS_AS(typecheck_store(env, open_val), TypeError);

  Store nonvalue = {{0, parse_program("1 + 1")}};
  CHECK_THROWS_AS(typecheck_store(env, nonvalue), TypeError);
}

TEST_CASE("stored locations typecheck against the label environment") {
  Env env;
  env.labels[0] = parse_type("Ref(Ref(Nat))");
  env.labels[1] = parse_type("Ref(Nat)");
  Store s = {{0, parse_value_literal("#l1")}, {1, parse_value_literal("7")}};
  CHECK_NOTHROW(typecheck_store(env, s));
  Store wrong = {{0, parse_value_literal("#l0")}};
  CHECK_THROWS_AS(typecheck_store(env, wrong), TypeError);
}

TEST_CASE("determinism: repeated checks agree") {
  const char* p = "let a = ref(0), b = ref(1) in fun x:Nat. if x = !a then !b else (a := x; b := fact(x); !b)";
  CHECK(print_type(ty(p)) == print_type(ty(p)));
  CHECK(type_equal(ty(p), parse_type("Nat -> Nat")));
}
