#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lsl/model.hpp"
#include "lsl/parser.hpp"

using namespace lsl;

namespace {

const char* kInc = "let x = ref(0) in fun().(x := !x + 1; !x)";

TermPtr run(const std::string& prog, long fuel = 100000) {
  EvalResult r = evaluate({parse_program(prog), {}, {}}, fuel);
  REQUIRE(r.status == EvalResult::Status::Converged);
  return r.config.term;
}

}  // namespace

TEST_CASE("allocation picks the smallest unused label and hides it") {
  auto c = step({parse_program("ref(2)"), {}, {}});
  REQUIRE(c.has_value());
  CHECK(c->term->kind == TermKind::Loc);
  CHECK(c->term->label == 0);
  CHECK(alpha_eq(c->store.at(0), m_nat(2)));
  CHECK(c->hidden == std::set<int>{0});

  Store s = {{0, m_nat(1)}, {2, m_nat(1)}};
  auto c2 = step({parse_program("ref(9)"), s, {}});
  CHECK(c2->term->label == 1);
}

TEST_CASE("beta and conditional steps") {
  auto c = step({parse_program("(fun x:Nat. x) 3"), {}, {}});
  REQUIRE(c.has_value());
  CHECK(alpha_eq(c->term, m_nat(3)));
  auto c2 = step({parse_program("if true then 1 else 2"), {}, {}});
  CHECK(alpha_eq(c2->term, m_nat(1)));
}

TEST_CASE("step is deterministic and stuck only on values") {
  Config c{parse_program("(1 + 2) * (3 + 4)"), {}, {}};
  int n = 0;
  while (auto next = step(c)) {
    c = *next;
    n++;
  }
  CHECK(alpha_eq(c.term, m_nat(21)));
  CHECK(is_value(c.term));
  CHECK(n == 3);
}

TEST_CASE("factorial by recursion") {
  CHECK(alpha_eq(run("(mu f:Nat -> Nat. fun n:Nat. if n = 0 then 1 else n * f (n - 1)) 5"),
                 m_nat(120)));
}

TEST_CASE("shared versus unshared increment generators") {
  std::string shared =
      std::string("let inc = ") + kInc +
      " in let a = ref(inc) in let b = ref(!a) in"
      " let z1 = ref((!a) ()) in let z2 = ref((!b) ()) in !z1 + !z2";
  CHECK(alpha_eq(run(shared), m_nat(3)));

  std::string unshared =
      std::string("let a = ref(") + kInc + ") in let b = ref(" + kInc +
      ") in let z1 = ref((!a) ()) in let z2 = ref((!b) ()) in !z1 + !z2";
  CHECK(alpha_eq(run(unshared), m_nat(2)));
}

TEST_CASE("divergence exhausts fuel") {
  EvalResult r = evaluate({parse_program("(mu f:Unit -> Unit. fun u:Unit. f u) ()"), {}, {}}, 1000);
  CHECK(r.status == EvalResult::Status::OutOfFuel);
}

TEST_CASE("label closure") {
  Store s = {{0, parse_value_literal("#l1")}, {1, m_nat(3)}};
  CHECK(label_closure({0}, s) == std::set<int>{0, 1});
  CHECK(label_closure({}, s).empty());
  Store s2 = {{0, parse_value_literal("fun().!#l1")}, {1, m_nat(0)}};
  CHECK(label_closure({0}, s2) == std::set<int>{0, 1});
  // Monotone and idempotent.
  auto lc = label_closure({0}, s2);
  CHECK(label_closure(lc, s2) == lc);
}

TEST_CASE("model_extend evaluates under the model store") {
  Model m;
  auto m1 = model_extend(m, "u", parse_program(kInc));
  REQUIRE(m1.has_value());
  CHECK(m1->hidden.size() == 1);
  CHECK(m1->env.at("u")->kind == TermKind::Lam);
  // Calling the generator twice through the model counts up.
  auto m2 = model_extend(*m1, "r1", parse_program("u ()"));
  auto m3 = model_extend(*m2, "r2", parse_program("u ()"));
  CHECK(alpha_eq(m3->env.at("r1"), m_nat(1)));
  CHECK(alpha_eq(m3->env.at("r2"), m_nat(2)));
}

TEST_CASE("memoized factorial agrees with factorial") {
  const char* memfact =
      "let a = ref(0), b = ref(1) in"
      " fun x:Nat. if x = !a then !b else (a := x; b := fact(x); !b)";
  Model m;
  auto m1 = model_extend(m, "u", parse_program(memfact));
  REQUIRE(m1.has_value());
  auto r1 = model_extend(*m1, "v1", parse_program("u 5"));
  CHECK(alpha_eq(r1->env.at("v1"), m_nat(120)));
  auto r2 = model_extend(*r1, "v2", parse_program("u 5"));  // memoized path
  CHECK(alpha_eq(r2->env.at("v2"), m_nat(120)));
  auto r3 = model_extend(*r2, "v3", parse_program("u 3"));
  CHECK(alpha_eq(r3->env.at("v3"), m_nat(6)));
}

TEST_CASE("model equivalence ignores hidden label names and garbage") {
  Model m;
  auto m1 = *model_extend(m, "u", parse_program(kInc));
  // Same model with the hidden cell at a different label.
  Model shifted;
  int l = *m1.hidden.begin();
  std::map<int, int> ren = {{l, l + 7}};
  shifted.hidden = {l + 7};
  shifted.env["u"] = parse_value_literal(
      ("fun().(#l" + std::to_string(l + 7) + " := !#l" + std::to_string(l + 7) +
       " + 1; !#l" + std::to_string(l + 7) + ")")
          .c_str());
  shifted.store[l + 7] = m_nat(0);
  shifted.labtypes[l + 7] = t_nat();
  CHECK(model_equiv_approx(m1, shifted) == Approx::Equal);

  // Adding an unreachable hidden cell does not change the model.
  Model junk = m1;
  junk.store[99] = m_nat(42);
  junk.hidden.insert(99);
  junk.labtypes[99] = t_nat();
  CHECK(model_equiv_approx(m1, junk) == Approx::Equal);

  // A visibly different store is not Equal.
  Model diff = m1;
  diff.store[l] = m_nat(5);
  CHECK(model_equiv_approx(m1, diff) == Approx::Unknown);
}

TEST_CASE("permutation symmetries: shared cell versus two cells") {
  // Shared: v and w are the same visible label.
  Model m1;
  m1.store[0] = m_nat(2);
  m1.labtypes[0] = t_nat();
  m1.env["v"] = m_loc(0);
  m1.env["w"] = m_loc(0);
  Permutation swap = {{"v", "w"}, {"w", "v"}};
  CHECK(is_symmetry(m1, swap) == Symmetry::Proven);

  // Two distinct visible cells with equal contents.
  Model m2;
  m2.store[0] = m_nat(2);
  m2.store[1] = m_nat(2);
  m2.labtypes[0] = m2.labtypes[1] = t_nat();
  m2.env["v"] = m_loc(0);
  m2.env["w"] = m_loc(1);
  CHECK(is_symmetry(m2, swap) == Symmetry::NotProven);
  CHECK(is_symmetry(m2, {}) == Symmetry::Proven);

  // Type-violating permutations are rejected.
  Model m3 = m1;
  m3.env["n"] = m_nat(1);
  CHECK_THROWS(permute(m3, {{"v", "n"}, {"n", "v"}}));
}

TEST_CASE("reachability in models") {
  // store: l0 |-> l1, l1 |-> 3; x names l0, y names l1, z names a fresh cell.
  Model m;
  m.store[0] = m_loc(1);
  m.store[1] = m_nat(3);
  m.store[2] = m_nat(7);
  m.labtypes[0] = t_ref(t_nat());
  m.labtypes[1] = t_nat();
  m.labtypes[2] = t_nat();
  m.env["x"] = m_loc(0);
  m.env["y"] = m_loc(1);
  m.env["w"] = m_loc(2);
  auto r = reachable_labels(m, m.env["x"]);
  CHECK(r == std::set<int>{0, 1});
  CHECK(r.count(2) == 0);  // w is unreachable from x
  CHECK(reachable_labels(m, m.env["w"]) == std::set<int>{2});
}

TEST_CASE("model files round-trip") {
  Model m;
  auto m1 = *model_extend(m, "u", parse_program(kInc));
  auto m2 = *model_extend(m1, "n", parse_program("3"));
  std::string txt = print_model(m2);
  Model back = parse_model(txt);
  CHECK(model_equiv_approx(m2, back) == Approx::Equal);
  CHECK(print_model(canonicalize(back)) == print_model(canonicalize(m2)));
}

TEST_CASE("model files support annotated recursive stores") {
  // Two mutually recursive closures through the store need annotations.
  std::string txt =
      "hidden: []\n"
      "env: x = #l0\n"
      "env: y = #l1\n"
      "store: l0 |-> fun n:Nat. if n = 0 then false else (!#l1) (n - 1) : Nat -> Bool\n"
      "store: l1 |-> fun n:Nat. if n = 0 then true else (!#l0) (n - 1) : Nat -> Bool\n";
  Model m = parse_model(txt);
  auto r = model_extend(m, "odd3", parse_program("(!x) 3"));
  CHECK(alpha_eq(r->env.at("odd3"), m_bool(true)));
  auto r2 = model_extend(m, "odd16", parse_program("(!x) 16"));
  CHECK(alpha_eq(r2->env.at("odd16"), m_bool(false)));
}

TEST_CASE("check_model rejects broken models") {
  Model m;
  m.hidden = {0};
  CHECK_THROWS(check_model(m));  // hidden label outside store
  Model m2;
  m2.store[0] = m_nat(1);
  m2.labtypes[0] = t_nat();
  m2.env["x"] = parse_value_literal("#l5");
  CHECK_THROWS(check_model(m2));  // dangling label
}
