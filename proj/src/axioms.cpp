// Axiom-schema registry, first-order schema matching, equivalence-rewriting
// chains, and the dedicated matchers for the information-hiding axioms.

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

#include "lsl/proof.hpp"

namespace lsl {

namespace {

// ---------------------------------------------------------------------------
// Bindings and signatures
// ---------------------------------------------------------------------------

struct MatchBind {
  std::map<std::string, FormulaPtr> fm;               // formula metavariables
  std::map<std::string, TermPtr> tm;                  // term metavariables
  std::map<std::string, TypePtr> tym;                 // type metavariables
  std::map<std::string, std::string> tvm;             // type-binder metavariables
  std::map<std::string, std::vector<TermPtr>> vm;     // effect-vector metavariables
  std::map<std::string, TypePtr> bty;                 // binder annotation seen at match
};

struct Sig {
  std::set<std::string> tmeta;   // term metavariable names (Var spelling)
  std::set<std::string> tymeta;  // type metavariable names (TypeVar spelling)
  std::set<std::string> vmeta;   // effect-vector metavariable names
};

bool term_eq(const TermPtr& a, const TermPtr& b) { return alpha_eq(a, b); }

bool match_type(const TypePtr& p, const TypePtr& g, MatchBind& B, const Sig& S) {
  if (!p) return true;  // wildcard annotation
  if (p->kind == TypeKind::Var && S.tymeta.count(p->name)) {
    auto it = B.tym.find(p->name);
    if (it != B.tym.end()) return g && type_equal(it->second, g);
    if (!g) return false;
    B.tym[p->name] = g;
    return true;
  }
  return g && type_equal(p, g);
}

bool match_term(const TermPtr& p, const TermPtr& g, MatchBind& B, const Sig& S) {
  if (p->kind == TermKind::Var && S.tmeta.count(p->name)) {
    auto it = B.tm.find(p->name);
    if (it != B.tm.end()) return term_eq(it->second, g);
    B.tm[p->name] = g;
    return true;
  }
  if (p->kind != g->kind) return false;
  switch (p->kind) {
    case TermKind::Const:
      return p->cval == g->cval;
    case TermKind::Var:
      return p->name == g->name;
    case TermKind::Loc:
      return p->label == g->label;
    case TermKind::Op:
      if (p->name != g->name) return false;
      break;
    case TermKind::Inj:
    case TermKind::Proj:
      if (p->idx != g->idx) return false;
      if (p->kind == TermKind::Inj && !match_type(p->type, g->type, B, S)) return false;
      break;
    default:
      break;  // patterns contain no abstractions
  }
  if (p->kids.size() != g->kids.size()) return false;
  for (size_t i = 0; i < p->kids.size(); i++)
    if (!match_term(p->kids[i], g->kids[i], B, S)) return false;
  return true;
}

// Binds a pattern binder variable (a term metavariable) to the goal's binder.
bool bind_binder(const std::string& pv, const std::string& gv, const TypePtr& gty, MatchBind& B,
                 const Sig& S) {
  if (!S.tmeta.count(pv)) return pv == gv;
  auto it = B.tm.find(pv);
  if (it != B.tm.end())
    return it->second->kind == TermKind::Var && it->second->name == gv;
  B.tm[pv] = m_var(gv);
  if (gty) B.bty[pv] = gty;
  return true;
}

bool match_effects(const std::vector<TermPtr>& p, const std::vector<TermPtr>& g, MatchBind& B,
                   const Sig& S) {
  // At most one vector metavariable, matching a contiguous (possibly empty)
  // middle slice; other entries match positionally around it.
  int vpos = -1;
  for (size_t i = 0; i < p.size(); i++)
    if (p[i]->kind == TermKind::Var && S.vmeta.count(p[i]->name)) vpos = (int)i;
  if (vpos < 0) {
    if (p.size() != g.size()) return false;
    for (size_t i = 0; i < p.size(); i++)
      if (!match_term(p[i], g[i], B, S)) return false;
    return true;
  }
  size_t before = vpos, after = p.size() - vpos - 1;
  if (g.size() < before + after) return false;
  for (size_t i = 0; i < before; i++)
    if (!match_term(p[i], g[i], B, S)) return false;
  for (size_t i = 0; i < after; i++)
    if (!match_term(p[p.size() - 1 - i], g[g.size() - 1 - i], B, S)) return false;
  std::vector<TermPtr> mid(g.begin() + before, g.end() - after);
  const std::string& vn = p[vpos]->name;
  auto it = B.vm.find(vn);
  if (it != B.vm.end()) {
    if (it->second.size() != mid.size()) return false;
    for (size_t i = 0; i < mid.size(); i++)
      if (!term_eq(it->second[i], mid[i])) return false;
    return true;
  }
  B.vm[vn] = mid;
  return true;
}

bool match_formula(const FormulaPtr& p, const FormulaPtr& g, MatchBind& B, const Sig& S) {
  if (p->kind == FKind::Meta) {
    auto it = B.fm.find(p->meta);
    if (it != B.fm.end()) return formula_alpha_eq(it->second, g);
    B.fm[p->meta] = g;
    return true;
  }
  if (p->kind != g->kind) return false;
  switch (p->kind) {
    case FKind::Eq:
    case FKind::Reach:
    case FKind::NotReach:
      return match_term(p->e1, g->e1, B, S) && match_term(p->e2, g->e2, B, S);
    case FKind::Not:
    case FKind::And:
    case FKind::Or:
    case FKind::Implies:
    case FKind::Always:
    case FKind::Someday:
      for (size_t i = 0; i < p->kids.size(); i++)
        if (!match_formula(p->kids[i], g->kids[i], B, S)) return false;
      return true;
    case FKind::Forall:
    case FKind::Exists:
    case FKind::Nu:
    case FKind::NuBar:
      if (!bind_binder(p->var, g->var, g->type, B, S)) return false;
      if (p->type && !match_type(p->type, g->type, B, S)) return false;
      return match_formula(p->kids[0], g->kids[0], B, S);
    case FKind::ForallTy:
    case FKind::ExistsTy: {
      if (S.tymeta.count(p->var)) {
        auto it = B.tvm.find(p->var);
        if (it != B.tvm.end()) {
          if (it->second != g->var) return false;
        } else {
          B.tvm[p->var] = g->var;
        }
      } else if (p->var != g->var) {
        return false;
      }
      return match_formula(p->kids[0], g->kids[0], B, S);
    }
    case FKind::AllContent:
    case FKind::SomeContent:
      return match_term(p->e1, g->e1, B, S) && match_formula(p->kids[0], g->kids[0], B, S);
    case FKind::Eval: {
      if (!match_term(p->e1, g->e1, B, S) || !match_term(p->e2, g->e2, B, S)) return false;
      if (!bind_binder(p->var, g->var, nullptr, B, S)) return false;
      if (p->located != g->located) {
        // A lone vector metavariable also matches an unlocated goal.
        bool vec_only = p->located && p->effects.size() == 1 &&
                        p->effects[0]->kind == TermKind::Var &&
                        S.vmeta.count(p->effects[0]->name);
        if (!(vec_only && !g->located)) return false;
        return B.vm.emplace(p->effects[0]->name, std::vector<TermPtr>{}).first->second.empty() &&
               match_formula(p->kids[0], g->kids[0], B, S);
      }
      if (p->located && !match_effects(p->effects, g->effects, B, S)) return false;
      return match_formula(p->kids[0], g->kids[0], B, S);
    }
    case FKind::Meta:
      return false;  // unreachable
  }
  return false;
}

TypePtr inst_type(const TypePtr& t, const MatchBind& B) {
  if (!t) return t;
  if (t->kind == TypeKind::Var) {
    auto it = B.tym.find(t->name);
    if (it != B.tym.end()) return it->second;
    return t;
  }
  TypeExpr c = *t;
  c.a = inst_type(t->a, B);
  c.b = inst_type(t->b, B);
  return std::make_shared<const TypeExpr>(c);
}

TermPtr inst_term(const TermPtr& t, const MatchBind& B, const Sig& S) {
  if (t->kind == TermKind::Var && S.tmeta.count(t->name)) {
    auto it = B.tm.find(t->name);
    if (it != B.tm.end()) return it->second;
    return t;
  }
  Term c = *t;
  c.type = inst_type(t->type, B);
  for (auto& k : c.kids) k = inst_term(k, B, S);
  return std::make_shared<const Term>(c);
}

FormulaPtr inst_formula(const FormulaPtr& p, const MatchBind& B, const Sig& S) {
  if (p->kind == FKind::Meta) {
    auto it = B.fm.find(p->meta);
    if (it != B.fm.end()) return it->second;
    return p;
  }
  Formula c = *p;
  if (c.e1) c.e1 = inst_term(c.e1, B, S);
  if (c.e2) c.e2 = inst_term(c.e2, B, S);
  // Binder / anchor variables.
  bool term_binder = p->kind == FKind::Forall || p->kind == FKind::Exists ||
                     p->kind == FKind::Nu || p->kind == FKind::NuBar || p->kind == FKind::Eval;
  if (term_binder && S.tmeta.count(p->var)) {
    auto it = B.tm.find(p->var);
    if (it != B.tm.end() && it->second->kind == TermKind::Var) c.var = it->second->name;
  }
  if ((p->kind == FKind::ForallTy || p->kind == FKind::ExistsTy) && S.tymeta.count(p->var)) {
    auto it = B.tvm.find(p->var);
    if (it != B.tvm.end()) c.var = it->second;
  }
  c.type = inst_type(p->type, B);
  if (!c.type && (p->kind == FKind::Forall || p->kind == FKind::Exists) &&
      S.tmeta.count(p->var)) {
    auto it = B.bty.find(p->var);
    if (it != B.bty.end()) c.type = it->second;
  }
  if (p->located) {
    std::vector<TermPtr> es;
    for (const auto& e : p->effects) {
      if (e->kind == TermKind::Var && S.vmeta.count(e->name)) {
        auto it = B.vm.find(e->name);
        if (it != B.vm.end()) {
          es.insert(es.end(), it->second.begin(), it->second.end());
          continue;
        }
      }
      es.push_back(inst_term(e, B, S));
    }
    c.effects = std::move(es);
    c.located = !c.effects.empty() || p->effects.empty();
    if (p->kind == FKind::Eval && c.effects.empty()) {
      // A lone vector metavariable bound to the empty list yields an
      // unlocated evaluation formula only when the goal side was unlocated;
      // keep located-with-empty otherwise. Located-with-empty is the safe
      // default (it is the stronger statement @emptyset).
      c.located = true;
    }
  }
  for (auto& k : c.kids) k = inst_formula(k, B, S);
  return std::make_shared<const Formula>(c);
}

// ---------------------------------------------------------------------------
// Schemas
// ---------------------------------------------------------------------------

struct Cond {
  std::string descr;
  std::function<bool(const MatchBind&, const Env&)> ok;
};

struct Schema {
  std::string id;
  FormulaPtr lhs;  // null for facts
  FormulaPtr rhs;
  bool equiv = false;
  Sig sig;
  std::vector<Cond> conds;
};

FormulaPtr M(const std::string& n) { return f_meta(n); }
TermPtr V(const std::string& n) { return m_var(n); }

std::string var_of(const MatchBind& B, const std::string& x) {
  auto it = B.tm.find(x);
  if (it != B.tm.end() && it->second->kind == TermKind::Var) return it->second->name;
  return x;
}

bool deref_free(const TermPtr& t) {
  if (t->kind == TermKind::Deref) return false;
  for (const auto& k : t->kids)
    if (!deref_free(k)) return false;
  return true;
}

Cond c_notin_fv(const std::string& x, const std::string& C) {
  return {x + " not free in " + C, [x, C](const MatchBind& B, const Env&) {
            auto it = B.fm.find(C);
            if (it == B.fm.end()) return false;
            return !formula_free_vars(it->second).count(var_of(B, x));
          }};
}

Cond c_monotone(const std::string& C) {
  return {C + " monotone", [C](const MatchBind& B, const Env&) {
            return classify_monotone(B.fm.at(C)) == Classification::Proven;
          }};
}

Cond c_stateless(const std::string& C) {
  return {C + " stateless", [C](const MatchBind& B, const Env&) {
            return classify_stateless(B.fm.at(C)) == Classification::Proven;
          }};
}

Cond c_thin(const std::string& C, const std::string& x) {
  return {C + " thin w.r.t. " + x, [C, x](const MatchBind& B, const Env& env) {
            return classify_thin(B.fm.at(C), var_of(B, x), env) == Classification::Proven;
          }};
}

Cond c_deref_free(const std::string& e) {
  return {e + " dereference-free", [e](const MatchBind& B, const Env&) {
            auto it = B.tm.find(e);
            return it != B.tm.end() && deref_free(it->second);
          }};
}

Cond c_base_tymeta(const std::string& a) {
  return {a + " a base type", [a](const MatchBind& B, const Env&) {
            auto it = B.tym.find(a);
            return it != B.tym.end() && is_base_type(it->second);
          }};
}

Cond c_term_base(const std::string& e) {
  return {e + " of base type", [e](const MatchBind& B, const Env& env) {
            auto it = B.tm.find(e);
            if (it == B.tm.end()) return false;
            try {
              return is_base_type(typecheck_term(env, it->second));
            } catch (const std::exception&) {
              return false;
            }
          }};
}

Cond c_term_ref(const std::string& e) {
  return {e + " of reference type", [e](const MatchBind& B, const Env& env) {
            auto it = B.tm.find(e);
            if (it == B.tm.end()) return false;
            try {
              return typecheck_term(env, it->second)->kind == TypeKind::Ref;
            } catch (const std::exception&) {
              return false;
            }
          }};
}

// Short constructors used when building the registry.
FormulaPtr BX(FormulaPtr c) { return f_always(std::move(c)); }
FormulaPtr DI(FormulaPtr c) { return f_someday(std::move(c)); }
FormulaPtr AND(FormulaPtr a, FormulaPtr b) { return f_and(std::move(a), std::move(b)); }
FormulaPtr OR(FormulaPtr a, FormulaPtr b) { return f_or(std::move(a), std::move(b)); }
FormulaPtr IMP(FormulaPtr a, FormulaPtr b) { return f_implies(std::move(a), std::move(b)); }
FormulaPtr NOT(FormulaPtr a) { return f_not(std::move(a)); }
FormulaPtr ALL(const std::string& x, FormulaPtr c) { return f_forall(x, nullptr, std::move(c)); }
FormulaPtr EX(const std::string& x, FormulaPtr c) { return f_exists(x, nullptr, std::move(c)); }
FormulaPtr NU(const std::string& x, FormulaPtr c) { return f_nu(x, nullptr, std::move(c)); }
FormulaPtr NUB(const std::string& x, FormulaPtr c) { return f_nubar(x, nullptr, std::move(c)); }
FormulaPtr AC(const std::string& x, FormulaPtr c) { return f_allcontent(V(x), std::move(c)); }
FormulaPtr SC(const std::string& x, FormulaPtr c) { return f_somecontent(V(x), std::move(c)); }
FormulaPtr EQ(TermPtr a, TermPtr b) { return f_eq(std::move(a), std::move(b)); }
FormulaPtr RCH(TermPtr a, TermPtr b) { return f_reach(std::move(a), std::move(b)); }
FormulaPtr NR(TermPtr a, TermPtr b) { return f_notreach(std::move(a), std::move(b)); }
TermPtr DRF(TermPtr a) { return m_deref(std::move(a)); }

// e1 . e2 = z { C } with an effect-vector metavariable W.
FormulaPtr EVW(TermPtr f, TermPtr a, const std::string& z, FormulaPtr c, const std::string& W) {
  return f_eval_at(std::move(f), std::move(a), z, std::move(c), {V(W)});
}

Sig sig(std::initializer_list<std::string> tmeta, std::initializer_list<std::string> tymeta = {},
        std::initializer_list<std::string> vmeta = {}) {
  Sig s;
  s.tmeta = tmeta;
  s.tymeta = tymeta;
  s.vmeta = vmeta;
  return s;
}

std::vector<Schema> build_registry() {
  std::vector<Schema> r;
  auto add = [&](std::string id, FormulaPtr lhs, FormulaPtr rhs, bool equiv, Sig s,
                 std::vector<Cond> conds = {}) {
    r.push_back({std::move(id), std::move(lhs), std::move(rhs), equiv, std::move(s),
                 std::move(conds)});
  };
  FormulaPtr C = M("C"), C1 = M("C1"), C2 = M("C2"), A = M("A");

  // --- necessity operator ---
  add("necessity-K", BX(IMP(C1, C2)), IMP(BX(C1), BX(C2)), false, sig({}));
  add("necessity-T", BX(C), C, false, sig({}));
  add("necessity-4", BX(BX(C)), BX(C), true, sig({}));
  add("possibility-intro", C, DI(C), false, sig({}));
  add("necessity-possibility", BX(C), DI(C), false, sig({}));
  add("necessity-eq", BX(EQ(V("e1"), V("e2"))), EQ(V("e1"), V("e2")), true, sig({"e1", "e2"}),
      {c_deref_free("e1"), c_deref_free("e2")});
  add("necessity-neq", BX(NOT(EQ(V("e1"), V("e2")))), NOT(EQ(V("e1"), V("e2"))), true,
      sig({"e1", "e2"}), {c_deref_free("e1"), c_deref_free("e2")});
  add("necessity-and", BX(AND(C1, C2)), AND(BX(C1), BX(C2)), true, sig({}));
  add("necessity-or", OR(BX(C1), BX(C2)), BX(OR(C1, C2)), false, sig({}));
  add("necessity-forall", BX(ALL("x", C)), ALL("x", BX(C)), false, sig({"x"}));
  add("necessity-forall-stable", BX(ALL("x", BX(C))), BX(ALL("x", C)), true, sig({"x"}));
  add("necessity-exists", EX("x", BX(C)), BX(EX("x", C)), false, sig({"x"}));
  add("necessity-exists-base", BX(f_exists("x", t_var("a"), C)), f_exists("x", t_var("a"), BX(C)),
      true, sig({"x"}, {"a"}), {c_base_tymeta("a")});
  add("necessity-nubar", BX(NUB("x", C)), NUB("x", BX(C)), true, sig({"x"}));
  add("necessity-nu", NU("x", BX(C)), BX(NU("x", C)), false, sig({"x"}));
  add("necessity-tyexists", BX(f_exists_ty("X", C)), f_exists_ty("X", BX(C)), true,
      sig({}, {"X"}));
  add("necessity-tyforall", BX(f_forall_ty("X", C)), f_forall_ty("X", BX(C)), true,
      sig({}, {"X"}));
  add("necessity-allcontent", BX(AC("x", C)), AC("x", BX(C)), true, sig({"x"}));
  add("necessity-allcontent-drop", AC("x", BX(C)), BX(C), true, sig({"x"}));
  add("necessity-somecontent-drop", SC("x", BX(C)), BX(C), true, sig({"x"}));
  add("necessity-somecontent-intro", BX(C), BX(SC("x", C)), false, sig({"x"}));

  // --- hiding quantifiers (Axioms for forall/exists/nu, items 1-11) ---
  add("hiding-intro", C, NU("x", C), false, sig({"x"}), {c_notin_fv("x", "C")});
  add("hiding-elim", NU("x", C), C, true, sig({"x"}),
      {c_notin_fv("x", "C"), c_monotone("C")});
  add("exists-intro", C, EX("x", C), false, sig({"x"}));
  add("exists-elim", EX("x", C), C, false, sig({"x"}),
      {c_notin_fv("x", "C"), c_thin("C", "x")});
  add("forall-elim", ALL("x", C), C, false, sig({"x"}));
  add("forall-intro", C, ALL("x", C), false, sig({"x"}),
      {c_notin_fv("x", "C"), c_thin("C", "x")});
  add("hiding-and-split", NU("x", AND(C1, C2)), AND(NU("x", C1), NU("x", C2)), false,
      sig({"x"}));
  add("hiding-or", NU("x", OR(C1, C2)), OR(NU("x", C1), NU("x", C2)), true, sig({"x"}));
  add("hiding-forall-swap", NU("y", ALL("x", C)), ALL("x", NU("y", C)), false, sig({"x", "y"}));
  add("hiding-exists-swap", EX("x", NU("y", C)), NU("y", EX("x", C)), false, sig({"x", "y"}));
  add("hiding-exists-base", f_exists("x", t_var("a"), NU("y", C)),
      NU("y", f_exists("x", t_var("a"), C)), true, sig({"x", "y"}, {"a"}),
      {c_base_tymeta("a")});
  add("hiding-nubar-swap", NU("y", NUB("x", C)), NUB("x", NU("y", C)), false, sig({"x", "y"}));
  add("hiding-comm", NU("y", NU("x", C)), NU("x", NU("y", C)), true, sig({"x", "y"}));
  add("hiding-tyexists-swap", NU("y", f_exists_ty("X", C)), f_exists_ty("X", NU("y", C)), true,
      sig({"y"}, {"X"}));
  add("hiding-tyforall-swap", NU("y", f_forall_ty("X", C)), f_forall_ty("X", NU("y", C)), false,
      sig({"y"}, {"X"}));
  add("hiding-allcontent-swap", NU("y", AC("x", C)), AC("x", NU("y", C)), false,
      sig({"x", "y"}));
  add("hiding-somecontent-swap", NU("y", SC("x", C)), SC("x", NU("y", C)), false,
      sig({"x", "y"}));

  // --- content quantification (items 1-7) ---
  add("content-stateless", AC("x", A), A, true, sig({"x"}), {c_stateless("A")});
  add("content-deref", AC("x", EQ(DRF(V("y")), V("z"))),
      AND(NOT(EQ(V("x"), V("y"))), EQ(DRF(V("y")), V("z"))), true, sig({"x", "y", "z"}));
  add("content-K", AC("x", IMP(AC("x", C1), C2)), IMP(AC("x", C1), AC("x", C2)), false,
      sig({"x"}));
  add("content-idem", AC("x", AC("x", C)), AC("x", C), true, sig({"x"}));
  add("content-comm", AC("x", AC("y", C)), AC("y", AC("x", C)), true, sig({"x", "y"}));
  add("content-and", AC("x", AND(C1, C2)), AND(AC("x", C1), AC("x", C2)), true, sig({"x"}));
  add("content-or", OR(AC("x", C1), AC("x", C2)), AC("x", OR(C1, C2)), false, sig({"x"}));

  // --- reachability ---
  add("reach-refl", nullptr, RCH(V("x"), V("x")), false, sig({"x"}));
  add("reach-trans", AND(RCH(V("x"), V("y")), RCH(V("y"), V("z"))), RCH(V("x"), V("z")), false,
      sig({"x", "y", "z"}));
  add("unreach-base", nullptr, NR(V("x"), V("y")), false, sig({"x", "y"}), {c_term_base("x")});
  add("unreach-neq", NR(V("x"), V("y")), NOT(EQ(V("x"), V("y"))), false, sig({"x", "y"}));
  add("unreach-trans", AND(NR(V("w"), V("x")), RCH(V("w"), V("u"))), NR(V("u"), V("x")), false,
      sig({"x", "w", "u"}));
  add("reach-pair", RCH(m_pair(V("x1"), V("x2")), V("y")),
      OR(RCH(V("x1"), V("y")), RCH(V("x2"), V("y"))), true, sig({"x1", "x2", "y"}));
  add("reach-inj1", RCH(m_inj(1, V("x"), nullptr), V("y")), RCH(V("x"), V("y")), true,
      sig({"x", "y"}));
  add("reach-inj2", RCH(m_inj(2, V("x"), nullptr), V("y")), RCH(V("x"), V("y")), true,
      sig({"x", "y"}));
  add("reach-content", RCH(V("x"), V("y")), RCH(V("x"), DRF(V("y"))), false, sig({"x", "y"}),
      {c_term_ref("y")});
  add("reach-step", AND(RCH(V("x"), V("y")), NOT(EQ(V("x"), V("y")))),
      RCH(DRF(V("x")), V("y")), false, sig({"x", "y"}), {c_term_ref("x")});
  add("content-reach-to", AC("x", RCH(V("y"), V("x"))), RCH(V("y"), V("x")), true,
      sig({"x", "y"}));
  add("content-unreach-from", AC("x", NR(V("y"), V("x"))), NR(V("y"), V("x")), true,
      sig({"x", "y"}));

  // --- equality ---
  add("eq-refl", nullptr, EQ(V("e"), V("e")), false, sig({"e"}));
  add("eq-sym", EQ(V("e1"), V("e2")), EQ(V("e2"), V("e1")), false, sig({"e1", "e2"}));
  add("eq-trans", AND(EQ(V("e1"), V("e2")), EQ(V("e2"), V("e3"))), EQ(V("e1"), V("e3")), false,
      sig({"e1", "e2", "e3"}));

  // --- evaluation formulae ---
  // {C} f.x = y {C1 & C2} @ W  implies each conjunct separately.
  add("eval-conj-split-1", IMP(C, EVW(V("f"), V("x"), "y", AND(C1, C2), "W")),
      IMP(C, EVW(V("f"), V("x"), "y", C1, "W")), false, sig({"f", "x", "y"}, {}, {"W"}));
  add("eval-conj-split-2", IMP(C, EVW(V("f"), V("x"), "y", AND(C1, C2), "W")),
      IMP(C, EVW(V("f"), V("x"), "y", C2, "W")), false, sig({"f", "x", "y"}, {}, {"W"}));
  // {C & A} e1.e2 = z {C'}  ==  A => {C} e1.e2 = z {C'}   (A stateless)
  add("eval-hoisting", IMP(AND(C, A), EVW(V("e1"), V("e2"), "z", M("C'"), "W")),
      IMP(A, IMP(C, EVW(V("e1"), V("e2"), "z", M("C'"), "W"))), true,
      sig({"e1", "e2", "z"}, {}, {"W"}), {c_stateless("A")});
  add("eval-hoisting-swap", IMP(AND(A, C), EVW(V("e1"), V("e2"), "z", M("C'"), "W")),
      IMP(A, IMP(C, EVW(V("e1"), V("e2"), "z", M("C'"), "W"))), true,
      sig({"e1", "e2", "z"}, {}, {"W"}), {c_stateless("A")});
  // Axiom (e8): internalised consequence on an evaluation formula.
  add("eval-consequence",
      AND(AND(IMP(C, M("C0")), IMP(M("C0"), EVW(V("x"), V("y"), "z", M("C0'"), "W"))),
          IMP(M("C0'"), M("C'"))),
      IMP(C, EVW(V("x"), V("y"), "z", M("C'"), "W")), false, sig({"x", "y", "z"}, {}, {"W"}));
  // Perpetuity (second form): box C through an arbitrary application.
  add("perpetuity",
      BX(C),
      f_forall_ty("X", f_forall_ty(
          "Y", f_forall("f", t_arrow(t_var("X"), t_var("Y")),
                        f_forall("x", t_var("X"),
                                 IMP(f_eval(V("f"), V("x"), "_z", f_true()),
                                     f_eval(V("f"), V("x"), "z", C)))))),
      true, sig({"f", "x", "z"}, {"X", "Y"}), {c_notin_fv("z", "C")});
  // Decomposition of a located evaluation formula (singleton effect set).
  add("located-decomposition",
      f_eval_at(V("x"), V("y"), "z", C, {V("w")}),
      f_forall("u", t_arrow(t_unit(), t_unit()),
               IMP(f_eval(V("u"), m_unit(), "_z", f_true()),
                   f_eval(V("x"), V("y"), "z",
                          AND(C, f_somecontent(V("w"), f_eval(V("u"), m_unit(), "_z",
                                                              f_true())))))),
      true, sig({"x", "y", "z", "w", "u"}));
  // Auxiliary quantifier facts used by derivations.
  add("forall-mono-exists", ALL("x", IMP(C1, C2)), IMP(EX("x", C1), EX("x", C2)), false,
      sig({"x"}));
  add("forall-mono", ALL("x", IMP(C1, C2)), IMP(ALL("x", C1), ALL("x", C2)), false, sig({"x"}));
  return r;
}

const std::vector<Schema>& registry() {
  static const std::vector<Schema> r = build_registry();
  return r;
}

// ---------------------------------------------------------------------------
// Direct matching and rewriting
// ---------------------------------------------------------------------------

std::string conds_ok(const Schema& s, const MatchBind& B, const Env& env) {
  for (const auto& c : s.conds)
    if (!c.ok(B, env)) return "side condition failed: " + c.descr;
  return "";
}

bool direct_match(const Schema& s, const FormulaPtr& A, const FormulaPtr& B2, const Env& env,
                  std::string* why) {
  if (!s.lhs || !B2) return false;
  auto attempt = [&](const FormulaPtr& l, const FormulaPtr& r) {
    MatchBind b;
    if (!match_formula(l, A, b, s.sig)) return false;
    if (!match_formula(r, B2, b, s.sig)) return false;
    std::string err = conds_ok(s, b, env);
    if (!err.empty()) {
      // Structure matched but a side condition failed: record the near miss.
      if (why && why->empty()) *why = s.id + ": " + err;
      return false;
    }
    return true;
  };
  if (attempt(s.lhs, s.rhs)) return true;
  if (s.equiv && attempt(s.rhs, s.lhs)) return true;
  return false;
}

bool fact_match(const Schema& s, const FormulaPtr& g, const Env& env) {
  if (s.lhs) return false;
  MatchBind b;
  return match_formula(s.rhs, g, b, s.sig) && conds_ok(s, b, env).empty();
}

// All single-step rewrites of f by equivalence schemas, applied at any
// subformula position, in either direction.
void rewrites_at(const FormulaPtr& f, const Env& env,
                 std::vector<std::pair<FormulaPtr, std::string>>& out) {
  for (const Schema& s : registry()) {
    if (!s.equiv || !s.lhs) continue;
    for (int dir = 0; dir < 2; dir++) {
      const FormulaPtr& from = dir == 0 ? s.lhs : s.rhs;
      const FormulaPtr& to = dir == 0 ? s.rhs : s.lhs;
      MatchBind b;
      if (match_formula(from, f, b, s.sig) && conds_ok(s, b, env).empty())
        out.emplace_back(inst_formula(to, b, s.sig), s.id);
    }
  }
  // Recurse into children, splicing the rewritten child back in.
  for (size_t i = 0; i < f->kids.size(); i++) {
    std::vector<std::pair<FormulaPtr, std::string>> sub;
    rewrites_at(f->kids[i], env, sub);
    for (auto& [g, id] : sub) {
      Formula c = *f;
      c.kids[i] = g;
      out.emplace_back(std::make_shared<const Formula>(c), id);
    }
  }
}

// ---------------------------------------------------------------------------
// Shared deconstruction helpers (also used by the dedicated matchers)
// ---------------------------------------------------------------------------

void conjuncts_of(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
  if (f->kind == FKind::And) {
    conjuncts_of(f->kids[0], out);
    conjuncts_of(f->kids[1], out);
    return;
  }
  if (!is_true(f)) out.push_back(f);
}

FormulaPtr conj_of(const std::vector<FormulaPtr>& cs) {
  if (cs.empty()) return f_true();
  FormulaPtr r = cs[0];
  for (size_t i = 1; i < cs.size(); i++) r = f_and(r, cs[i]);
  return r;
}

struct Binder {
  std::string var;
  TypePtr type;
};

// Strips matching quantifier prefixes from both sides, renaming the right
// side's binders to the left side's. Collects the shared prefix.
bool strip_parallel_prefix(FormulaPtr& L, FormulaPtr& R, std::vector<Binder>& vars,
                           std::vector<std::string>& tyvars) {
  while (true) {
    if (L->kind == FKind::Always && R->kind == FKind::Always) {
      L = L->kids[0];
      R = R->kids[0];
      continue;
    }
    if (L->kind == FKind::ForallTy && R->kind == FKind::ForallTy) {
      std::string X = L->var;
      FormulaPtr rb = R->kids[0];
      if (R->var != X) rb = subst_tyvar(rb, t_var(X), R->var);
      tyvars.push_back(X);
      L = L->kids[0];
      R = rb;
      continue;
    }
    if (L->kind == FKind::Forall && R->kind == FKind::Forall) {
      if (!!L->type != !!R->type) return false;
      if (L->type && !type_equal(L->type, R->type)) return false;
      std::string x = L->var;
      FormulaPtr rb = R->kids[0];
      if (R->var != x) rb = subst_var(rb, m_var(x), R->var);
      vars.push_back({x, L->type});
      L = L->kids[0];
      R = rb;
      continue;
    }
    return true;
  }
}

// Strips a leading implication shared by both sides (the common precondition
// of a Hoare-sugared evaluation formula).
void strip_parallel_pre(FormulaPtr& L, FormulaPtr& R) {
  while (L->kind == FKind::Implies && R->kind == FKind::Implies &&
         formula_alpha_eq(L->kids[0], R->kids[0])) {
    L = L->kids[1];
    R = R->kids[1];
  }
}

// "x is unreachable from y": NotReach with source y and hidden target x.
bool is_notreach_pair(const FormulaPtr& f, const std::string& x, const std::string& y) {
  return f->kind == FKind::NotReach && f->e1->kind == TermKind::Var && f->e1->name == y &&
         f->e2->kind == TermKind::Var && f->e2->name == x;
}

bool base_typed(const Env& env, const std::string& v, const TypePtr& annot) {
  if (annot) return is_base_type(annot);
  auto it = env.vars.find(v);
  if (it != env.vars.end()) return is_base_type(it->second);
  return false;
}

// ---------------------------------------------------------------------------
// Dedicated matcher: nu-elimination
//   all X, i:X. m.()=u { nu x~. ([!x~]C & x~ # u i) }  =>  m.()=u { C }
// ---------------------------------------------------------------------------

bool match_nu_elim(const FormulaPtr& goal, const Env& env, std::string* diag) {
  if (goal->kind != FKind::Implies) return false;
  FormulaPtr L = goal->kids[0], R = goal->kids[1];
  std::vector<Binder> vars;
  std::vector<std::string> tyvars;
  if (!strip_parallel_prefix(L, R, vars, tyvars)) return false;
  // The axiom's universal prefix over the arbitrary datum may appear on the
  // left-hand side only.
  while (L->kind == FKind::ForallTy) {
    tyvars.push_back(L->var);
    L = L->kids[0];
  }
  while (L->kind == FKind::Forall) {
    vars.push_back({L->var, L->type});
    L = L->kids[0];
  }
  strip_parallel_pre(L, R);
  if (L->kind != FKind::Eval || R->kind != FKind::Eval) return false;
  if (!alpha_eq(L->e1, R->e1) || !alpha_eq(L->e2, R->e2)) return false;
  std::string u = L->var;
  FormulaPtr postL = L->kids[0];
  FormulaPtr postR = R->kids[0];
  if (R->var != u) postR = subst_var(postR, m_var(u), R->var);

  std::vector<std::string> xs;
  std::map<std::string, TypePtr> xty;
  while (postL->kind == FKind::Nu) {
    xs.push_back(postL->var);
    xty[postL->var] = postL->type;
    postL = postL->kids[0];
  }
  if (xs.empty()) return false;

  // Body: a content-quantified copy of the conclusion plus disjointness.
  std::vector<FormulaPtr> cs;
  conjuncts_of(postL, cs);
  std::set<std::string> need_unreach;  // "x|v" pairs still required
  for (const auto& x : xs) {
    for (const Binder& b : vars)
      if (!base_typed(env, b.var, b.type)) need_unreach.insert(x + "|" + b.var);
    // Disjointness from the result value, unless it has base type (then the
    // unreachability is trivially true and may be omitted).
  }
  bool found_core = false;
  for (const auto& c : cs) {
    // The content-quantified copy [!x1]..[!xk]C (any subset order), alpha-equal
    // to the conclusion after stripping.
    FormulaPtr body = c;
    std::set<std::string> stripped;
    while (body->kind == FKind::AllContent && body->e1->kind == TermKind::Var &&
           std::count(xs.begin(), xs.end(), body->e1->name)) {
      stripped.insert(body->e1->name);
      body = body->kids[0];
    }
    if (formula_alpha_eq(body, postR)) {
      // C must not mention the hidden names.
      std::set<std::string> fv = formula_free_vars(body);
      bool clean = true;
      for (const auto& x : xs)
        if (fv.count(x)) clean = false;
      if (clean) {
        found_core = true;
        continue;
      }
    }
    if (c->kind == FKind::NotReach && c->e2->kind == TermKind::Var &&
        std::count(xs.begin(), xs.end(), c->e2->name) && c->e1->kind == TermKind::Var) {
      need_unreach.erase(c->e2->name + "|" + c->e1->name);
      continue;
    }
    if (diag && diag->empty())
      *diag = "nu-elimination: unexpected conjunct under the hiding: " + print_formula(c);
    return false;
  }
  if (!found_core) {
    if (diag && diag->empty())
      *diag = "nu-elimination: no content-quantified copy of the conclusion found";
    return false;
  }
  // Disjointness from u: required unless the anchor has base type. The anchor
  // type is not recorded in the formula; accept an explicit x # u conjunct or
  // treat its absence as the base-type case only when no x # u was needed by
  // the remaining obligations. Conservative rule: all prefix binders of
  // non-base type must be covered; x # u conjuncts were consumed above.
  if (!need_unreach.empty()) {
    if (diag && diag->empty()) {
      auto pos = need_unreach.begin()->find('|');
      *diag = "nu-elimination: missing disjointness " +
              need_unreach.begin()->substr(0, pos) + " # " +
              need_unreach.begin()->substr(pos + 1);
    }
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Dedicated matcher: AIH (axiom for information hiding), including the
// component-wise generalisation for pair results.
// ---------------------------------------------------------------------------

struct EvalSpec {
  TermPtr subject;                 // u, pi1(u), pi2(u)
  std::vector<Binder> binders;     // the forall prefix under box
  FormulaPtr pre;                  // T when absent
  std::string arg;                 // argument variable (or "()" marker)
  TermPtr argterm;
  std::string anchor;
  FormulaPtr post;
  std::vector<TermPtr> effects;
  bool located = false;
};

// Deconstructs box all y...  { pre } subj . arg = z { post } @ effects.
bool parse_spec(FormulaPtr f, EvalSpec& out) {
  if (f->kind != FKind::Always) return false;
  f = f->kids[0];
  while (f->kind == FKind::Forall) {
    out.binders.push_back({f->var, f->type});
    f = f->kids[0];
  }
  if (f->kind == FKind::Implies) {
    out.pre = f->kids[0];
    f = f->kids[1];
  } else {
    out.pre = f_true();
  }
  if (f->kind != FKind::Eval) return false;
  out.subject = f->e1;
  out.argterm = f->e2;
  out.arg = f->e2->kind == TermKind::Var ? f->e2->name : "";
  out.anchor = f->var;
  out.post = f->kids[0];
  out.located = f->located;
  out.effects = f->effects;
  return true;
}

bool effects_subset(const std::vector<TermPtr>& small, const std::vector<TermPtr>& big) {
  for (const auto& e : small) {
    bool found = false;
    for (const auto& f : big)
      if (alpha_eq(e, f)) found = true;
    if (!found) return false;
  }
  return true;
}

bool match_aih(const FormulaPtr& goal, const Env& env, std::string* diag) {
  auto note = [&](const std::string& m) {
    if (diag) {
      if (!diag->empty()) *diag += "; ";
      *diag += "AIH: " + m;
    }
  };
  if (goal->kind != FKind::Implies) return false;
  FormulaPtr L = goal->kids[0], R = goal->kids[1];
  std::vector<Binder> vars;
  std::vector<std::string> tyvars;
  if (!strip_parallel_prefix(L, R, vars, tyvars)) return false;
  strip_parallel_pre(L, R);
  if (L->kind != FKind::Eval || R->kind != FKind::Eval) return false;
  if (!alpha_eq(L->e1, R->e1) || !alpha_eq(L->e2, R->e2)) return false;
  std::string u = L->var;
  FormulaPtr postL = L->kids[0];
  FormulaPtr postR = R->kids[0];
  if (R->var != u) postR = subst_var(postR, m_var(u), R->var);

  // Split both posts into the hidden part / E2 part plus a shared rest E.
  std::vector<FormulaPtr> cl, cr;
  conjuncts_of(postL, cl);
  conjuncts_of(postR, cr);
  // The hidden part is the unique nu-conjunct of the left side.
  int nupos = -1;
  for (size_t i = 0; i < cl.size(); i++)
    if (cl[i]->kind == FKind::Nu) nupos = (int)i;
  if (nupos < 0) return false;
  std::vector<FormulaPtr> erest(cl);
  erest.erase(erest.begin() + nupos);
  // E2 parts: conjuncts of the right side not alpha-matched by erest.
  std::vector<FormulaPtr> e2parts(cr);
  for (const auto& e : erest) {
    bool matched = false;
    for (size_t i = 0; i < e2parts.size(); i++)
      if (formula_alpha_eq(e2parts[i], e)) {
        e2parts.erase(e2parts.begin() + i);
        matched = true;
        break;
      }
    if (!matched) {
      note("left-side conjunct outside the hiding has no counterpart on the right: " +
           print_formula(e));
      return false;
    }
  }
  if (e2parts.empty()) {
    note("no specification E2 on the right-hand side");
    return false;
  }

  // Deconstruct the hidden part: nu x~ . ex g~ . E1.
  FormulaPtr hid = cl[nupos];
  std::vector<std::string> xs;
  while (hid->kind == FKind::Nu) {
    xs.push_back(hid->var);
    hid = hid->kids[0];
  }
  std::vector<std::string> gs;
  while (hid->kind == FKind::Exists) {
    gs.push_back(hid->var);
    hid = hid->kids[0];
  }
  std::vector<FormulaPtr> e1parts;
  conjuncts_of(hid, e1parts);

  // Identify the local-invariant clause: an implication between two boxed
  // specifications of the same subject whose right side re-establishes C0.
  FormulaPtr C0;
  std::vector<size_t> used(e1parts.size(), 0);
  for (size_t i = 0; i < e1parts.size(); i++) {
    const FormulaPtr& c = e1parts[i];
    if (c->kind != FKind::Implies) continue;
    EvalSpec lo, hi;
    if (!parse_spec(c->kids[0], lo) || !parse_spec(c->kids[1], hi)) continue;
    if (!is_true(lo.post)) continue;  // the premise is a termination statement
    // hi.post must be C0 (= hi.pre) possibly with x~ # z conjuncts.
    std::vector<FormulaPtr> hp;
    conjuncts_of(hi.post, hp);
    std::vector<FormulaPtr> core;
    for (const auto& p : hp) {
      if (p->kind == FKind::NotReach && p->e2->kind == TermKind::Var &&
          std::count(xs.begin(), xs.end(), p->e2->name) && p->e1->kind == TermKind::Var &&
          p->e1->name == hi.anchor)
        continue;
      core.push_back(p);
    }
    if (!formula_alpha_eq(conj_of(core), hi.pre)) continue;
    if (!formula_alpha_eq(lo.pre, hi.pre)) continue;
    C0 = hi.pre;
    used[i] = 1;
    break;
  }
  if (!C0) {
    note("no local-invariant clause (Inv) found under the hiding");
    return false;
  }
  // The plain C0 conjunct must also be present.
  bool c0_present = false;
  for (size_t i = 0; i < e1parts.size(); i++)
    if (!used[i] && formula_alpha_eq(e1parts[i], C0)) {
      used[i] = 1;
      c0_present = true;
      break;
    }
  if (!c0_present) {
    note("the invariant C0 itself is not asserted under the hiding");
    return false;
  }

  // Every E2 component must have a matching E1 component with C0 added to the
  // precondition and x~ appended to the effect set.
  bool all_ok = true;
  for (const auto& e2 : e2parts) {
    EvalSpec s2;
    if (!parse_spec(e2, s2)) {
      note("right-hand conjunct is not a boxed specification: " + print_formula(e2));
      return false;
    }
    bool found = false;
    for (size_t i = 0; i < e1parts.size() && !found; i++) {
      if (used[i]) continue;
      EvalSpec s1;
      if (!parse_spec(e1parts[i], s1)) continue;
      if (!alpha_eq(s1.subject, s2.subject)) continue;
      // Binders: s2's binders must be a prefix-subsequence; extras are the
      // fresh auxiliary names.
      std::vector<Binder> extra;
      {
        size_t j = 0;
        bool ok = true;
        FormulaPtr dummy;
        for (const Binder& b : s1.binders) {
          if (j < s2.binders.size() && b.var == s2.binders[j].var)
            j++;
          else
            extra.push_back(b);
        }
        if (j != s2.binders.size()) ok = false;
        if (!ok) continue;
      }
      // Precondition: C0 & C (or C0 when C is T).
      FormulaPtr C = s2.pre;
      {
        std::vector<FormulaPtr> p1, want;
        conjuncts_of(s1.pre, p1);
        conjuncts_of(C0, want);
        std::vector<FormulaPtr> cw;
        conjuncts_of(C, cw);
        want.insert(want.end(), cw.begin(), cw.end());
        if (p1.size() != want.size()) continue;
        bool eq = true;
        std::vector<bool> taken(want.size(), false);
        for (const auto& a : p1) {
          bool hit = false;
          for (size_t k = 0; k < want.size(); k++)
            if (!taken[k] && formula_alpha_eq(a, want[k])) {
              taken[k] = true;
              hit = true;
              break;
            }
          if (!hit) eq = false;
        }
        if (!eq) continue;
      }
      if (!formula_alpha_eq(s1.post, s2.post)) continue;
      if (s1.anchor != s2.anchor) continue;
      // Effects: s1's must be s2's plus (a subset of) x~.
      std::vector<TermPtr> xeff;
      for (const auto& x : xs) xeff.push_back(m_var(x));
      if (!effects_subset(s2.effects, s1.effects)) continue;
      bool eff_ok = true;
      for (const auto& e : s1.effects) {
        bool in2 = false;
        for (const auto& f2 : s2.effects)
          if (alpha_eq(e, f2)) in2 = true;
        bool inx = e->kind == TermKind::Var &&
                   std::count(xs.begin(), xs.end(), e->name);
        if (!in2 && !inx) eff_ok = false;
      }
      if (!eff_ok) continue;
      used[i] = 1;
      found = true;

      // --- side conditions (each reported individually) ---
      std::vector<FormulaPtr> c0s;
      conjuncts_of(C0, c0s);
      std::vector<FormulaPtr> c0prime;
      std::set<std::string> gcovered;
      for (const auto& c : c0s) {
        if (c->kind == FKind::NotReach && c->e2->kind == TermKind::Var &&
            std::count(xs.begin(), xs.end(), c->e2->name))
          continue;  // hidden names unreachable from i, y
        if (c->kind == FKind::Forall && c->kids[0]->kind == FKind::Implies &&
            c->kids[0]->kids[0]->kind == FKind::Reach) {
          // g |->* x~ : all z.(g ~> z => z = x1 | ... | z = xk)
          const FormulaPtr& r = c->kids[0]->kids[0];
          if (r->e1->kind == TermKind::Var &&
              std::count(gs.begin(), gs.end(), r->e1->name)) {
            gcovered.insert(r->e1->name);
            continue;
          }
        }
        c0prime.push_back(c);
      }
      for (const auto& g : gs)
        if (!gcovered.count(g)) {
          note("existential " + g + " lacks a reachability capture g |->* x~ in C0");
          all_ok = false;
        }
      std::set<std::string> xset(xs.begin(), xs.end());
      if (classify_stateless_except(conj_of(c0prime), xset) != Classification::Proven) {
        note("C0 without the disjointness part is not stateless except the hidden names");
        all_ok = false;
      }
      if (classify_antimonotone(C) != Classification::Proven) {
        note("the precondition C is not anti-monotone");
        all_ok = false;
      }
      if (classify_monotone(s2.post) != Classification::Proven) {
        note("the postcondition C' is not monotone");
        all_ok = false;
      }
      std::set<std::string> banned(xs.begin(), xs.end());
      banned.insert(gs.begin(), gs.end());
      std::set<std::string> fv = formula_free_vars(C);
      std::set<std::string> fv2 = formula_free_vars(s2.post);
      fv.insert(fv2.begin(), fv2.end());
      for (const auto& e : s2.effects) {
        std::set<std::string> fe = free_vars(e);
        fv.insert(fe.begin(), fe.end());
      }
      for (const auto& x : banned)
        if (fv.count(x)) {
          note("hidden/existential name " + x + " occurs free in C, C' or the effect set");
          all_ok = false;
        }
      // For each hidden x, each fresh extra binder i must be covered by
      // x # i inside C0 unless i has base type.
      for (const auto& x : xs)
        for (const Binder& b : extra) {
          if (base_typed(env, b.var, b.type)) continue;
          bool cover = false;
          for (const auto& c : c0s)
            if (is_notreach_pair(c, x, b.var)) cover = true;
          if (!cover) {
            note("C0 does not assert " + x + " # " + b.var);
            all_ok = false;
          }
        }
    }
    if (!found) {
      note("no matching clause under the hiding for the specification " + print_formula(e2));
      return false;
    }
  }
  return all_ok;
}

// ---------------------------------------------------------------------------
// Dedicated matcher: unreachable functions
// ---------------------------------------------------------------------------

bool match_unreach_funcs(const FormulaPtr& goal, const Env& env, std::string* diag) {
  (void)env;
  if (goal->kind != FKind::Implies) return false;
  const FormulaPtr& L = goal->kids[0];
  FormulaPtr R = goal->kids[1];
  if (L->kind != FKind::Always || R->kind != FKind::Always) return false;
  FormulaPtr l = L->kids[0];
  FormulaPtr r = R->kids[0];
  if (r->kind != FKind::ForallTy) return false;
  std::string X = r->var;
  r = r->kids[0];
  if (r->kind != FKind::Forall) return false;
  std::string i = r->var;
  if (r->type && !(r->type->kind == TypeKind::Var && r->type->name == X)) return false;
  r = r->kids[0];
  if (l->kind != FKind::Implies || r->kind != FKind::Implies) return false;

  // Left: C & x # f y w~  =>  f.y=z {C'} @ w~
  auto split = [&](const FormulaPtr& pre, std::string& x, std::vector<FormulaPtr>& rest,
                   std::set<std::string>& targets) {
    std::vector<FormulaPtr> cs;
    conjuncts_of(pre, cs);
    x.clear();
    for (const auto& c : cs) {
      if (c->kind == FKind::NotReach && c->e1->kind == TermKind::Var &&
          c->e2->kind == TermKind::Var) {
        if (x.empty()) x = c->e2->name;
        if (c->e2->name == x) {
          targets.insert(c->e1->name);
          continue;
        }
      }
      rest.push_back(c);
    }
    return !x.empty();
  };
  std::string x1, x2;
  std::vector<FormulaPtr> rest1, rest2;
  std::set<std::string> t1, t2;
  if (!split(l->kids[0], x1, rest1, t1) || !split(r->kids[0], x2, rest2, t2)) return false;
  if (x1 != x2) return false;
  if (!formula_alpha_eq(conj_of(rest1), conj_of(rest2))) return false;
  const FormulaPtr& ev1 = l->kids[1];
  FormulaPtr ev2 = r->kids[1];
  if (ev1->kind != FKind::Eval || ev2->kind != FKind::Eval) return false;
  if (!alpha_eq(ev1->e1, ev2->e1) || !alpha_eq(ev1->e2, ev2->e2)) return false;
  if (ev1->var != ev2->var) return false;
  if (ev1->located != ev2->located || ev1->effects.size() != ev2->effects.size()) return false;
  for (size_t k = 0; k < ev1->effects.size(); k++)
    if (!alpha_eq(ev1->effects[k], ev2->effects[k])) return false;
  // t2 = t1 + {i}; post2 = post1 & x # (f i y z w~)
  std::set<std::string> expect2(t1);
  expect2.insert(i);
  if (t2 != expect2) {
    if (diag && diag->empty())
      *diag = "unreachable-functions: the conclusion's disjointness set must add exactly the "
              "fresh variable";
    return false;
  }
  std::vector<FormulaPtr> p2;
  conjuncts_of(ev2->kids[0], p2);
  std::set<std::string> post_targets;
  std::vector<FormulaPtr> p2rest;
  for (const auto& c : p2) {
    if (c->kind == FKind::NotReach && c->e2->kind == TermKind::Var && c->e2->name == x1 &&
        c->e1->kind == TermKind::Var) {
      post_targets.insert(c->e1->name);
      continue;
    }
    p2rest.push_back(c);
  }
  if (!formula_alpha_eq(conj_of(p2rest), ev1->kids[0])) return false;
  std::set<std::string> expect_post(expect2);
  expect_post.insert(ev1->var);
  if (post_targets != expect_post) {
    if (diag && diag->empty())
      *diag = "unreachable-functions: the post-condition must assert disjointness from the "
              "result and all inputs";
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Dedicated matcher: invariant by application (transfer)
// ---------------------------------------------------------------------------

bool match_transfer(const FormulaPtr& goal, const Env& env, std::string* diag) {
  if (goal->kind != FKind::Implies || goal->kids[0]->kind != FKind::And) return false;
  const FormulaPtr& inv = goal->kids[0]->kids[0];
  const FormulaPtr& app = goal->kids[0]->kids[1];
  const FormulaPtr& con = goal->kids[1];
  // inv: box all y. (C0 => f.y=z {C0} @ x~)
  EvalSpec si;
  if (!parse_spec(inv, si)) return false;
  if (si.binders.size() != 1) return false;
  if (!formula_alpha_eq(si.pre, si.post)) return false;
  FormulaPtr C0 = si.pre;
  std::vector<std::string> xs;
  for (const auto& e : si.effects) {
    if (e->kind != TermKind::Var) return false;
    xs.push_back(e->name);
  }
  // app: box (C => g.f=z {C'})   con: box (C & C0 & x~ # g => g.f=z {C0 & C'})
  if (app->kind != FKind::Always || con->kind != FKind::Always) return false;
  FormulaPtr a = app->kids[0], c = con->kids[0];
  FormulaPtr apre = f_true(), cpre = f_true();
  if (a->kind == FKind::Implies) {
    apre = a->kids[0];
    a = a->kids[1];
  }
  if (c->kind == FKind::Implies) {
    cpre = c->kids[0];
    c = c->kids[1];
  }
  if (a->kind != FKind::Eval || c->kind != FKind::Eval) return false;
  if (!alpha_eq(a->e1, c->e1) || !alpha_eq(a->e2, c->e2) || a->var != c->var) return false;
  if (!alpha_eq(a->e2, si.subject)) return false;  // argument of g is f
  // conclusion precondition = apre & C0 & x~ # g
  std::vector<FormulaPtr> want;
  conjuncts_of(apre, want);
  conjuncts_of(C0, want);
  for (const auto& x : xs)
    if (a->e1->kind == TermKind::Var) want.push_back(f_notreach(a->e1, m_var(x)));
  std::vector<FormulaPtr> have;
  conjuncts_of(cpre, have);
  if (have.size() != want.size()) return false;
  std::vector<bool> taken(want.size(), false);
  for (const auto& h : have) {
    bool hit = false;
    for (size_t k = 0; k < want.size(); k++)
      if (!taken[k] && formula_alpha_eq(h, want[k])) {
        taken[k] = true;
        hit = true;
        break;
      }
    if (!hit) return false;
  }
  // conclusion post = C0 & C'
  std::vector<FormulaPtr> wpost;
  conjuncts_of(C0, wpost);
  conjuncts_of(a->kids[0], wpost);
  std::vector<FormulaPtr> hpost;
  conjuncts_of(c->kids[0], hpost);
  if (!formula_alpha_eq(conj_of(hpost), conj_of(wpost))) return false;
  // side conditions
  std::set<std::string> xset(xs.begin(), xs.end());
  bool ok = true;
  if (classify_stateless_except(C0, xset) != Classification::Proven) {
    if (diag) *diag = "transfer: C0 is not stateless except the invariant references";
    ok = false;
  }
  const std::string& y = si.binders[0].var;
  if (formula_free_vars(C0).count(y)) {
    if (diag) *diag = "transfer: the argument variable occurs free in C0";
    ok = false;
  }
  if (!base_typed(env, y, si.binders[0].type)) {
    // C0 must entail x~ # y; accept explicit conjuncts.
    std::vector<FormulaPtr> c0s;
    conjuncts_of(C0, c0s);
    for (const auto& x : xs) {
      bool cover = false;
      for (const auto& cc : c0s)
        if (is_notreach_pair(cc, x, y)) cover = true;
      if (!cover) {
        if (diag) *diag = "transfer: C0 does not assert " + x + " # " + y;
        ok = false;
      }
    }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// Dedicated matcher: hiding rename
//   nu y.(C & x = y)  =>  nu x.C
// The hidden name is exported through an equality with a free name; the
// conclusion re-hides the exported name directly.
// ---------------------------------------------------------------------------

bool match_nu_rename(const FormulaPtr& goal) {
  if (goal->kind != FKind::Implies) return false;
  const FormulaPtr& L = goal->kids[0];
  const FormulaPtr& R = goal->kids[1];
  if (L->kind != FKind::Nu || R->kind != FKind::Nu) return false;
  std::string y = L->var;
  std::vector<FormulaPtr> cs;
  conjuncts_of(L->kids[0], cs);
  for (size_t i = 0; i < cs.size(); i++) {
    const FormulaPtr& c = cs[i];
    if (c->kind != FKind::Eq || c->e1->kind != TermKind::Var || c->e2->kind != TermKind::Var)
      continue;
    std::string v;
    if (c->e2->name == y && c->e1->name != y) v = c->e1->name;
    if (c->e1->name == y && c->e2->name != y) v = c->e2->name;
    if (v.empty()) continue;
    std::vector<FormulaPtr> rest;
    for (size_t k = 0; k < cs.size(); k++)
      if (k != i) rest.push_back(cs[k]);
    FormulaPtr body = rest.empty() ? f_true() : conj_of(rest);
    body = subst_var(body, m_var(v), y);
    FormulaPtr cand = f_nu(v, R->type, body);
    if (formula_alpha_eq(cand, R)) return true;
  }
  return false;
}

struct MatchOutcome {
  std::optional<std::string> id;
  std::string diag;
};

MatchOutcome match_axiom_ex(const FormulaPtr& goal_raw, const Env& env) {
  FormulaPtr goal = desugar(goal_raw);
  MatchOutcome out;
  FormulaPtr A, B;
  if (goal->kind == FKind::Implies) {
    A = goal->kids[0];
    B = goal->kids[1];
  }

  std::string why;
  for (const Schema& s : registry()) {
    if (!s.lhs) {
      if (fact_match(s, goal, env) || (B && fact_match(s, B, env))) {
        out.id = s.id;
        return out;
      }
      continue;
    }
    if (A && direct_match(s, A, B, env, &why)) {
      out.id = s.id;
      return out;
    }
  }

  // Dedicated matchers.
  std::string diag;
  if (match_aih(goal, env, &diag)) {
    out.id = "information-hiding";
    return out;
  }
  if (match_nu_elim(goal, env, &diag)) {
    out.id = "nu-elimination";
    return out;
  }
  if (match_unreach_funcs(goal, env, &diag)) {
    out.id = "unreachable-functions";
    return out;
  }
  if (match_transfer(goal, env, &diag)) {
    out.id = "transfer-invariant";
    return out;
  }
  if (match_nu_rename(goal)) {
    out.id = "hiding-rename";
    return out;
  }

  // Chained equivalence rewriting from the antecedent, depth <= 3.
  if (A) {
    struct State {
      FormulaPtr f;
      std::string chain;
      int depth;
    };
    std::deque<State> q;
    q.push_back({A, "", 0});
    std::set<std::string> seen{print_formula(A)};
    int expansions = 0;
    while (!q.empty() && expansions < 400) {
      State st = q.front();
      q.pop_front();
      if (st.depth >= 3) continue;
      std::vector<std::pair<FormulaPtr, std::string>> nexts;
      rewrites_at(st.f, env, nexts);
      for (auto& [g, id] : nexts) {
        expansions++;
        std::string key = print_formula(g);
        if (!seen.insert(key).second) continue;
        std::string chain = st.chain.empty() ? id : st.chain + "," + id;
        if (formula_alpha_eq(g, B)) {
          out.id = chain;
          return out;
        }
        for (const Schema& s : registry())
          if (s.lhs && direct_match(s, g, B, env, nullptr)) {
            out.id = chain + "," + s.id;
            return out;
          }
        q.push_back({g, chain, st.depth + 1});
      }
    }
  }
  if (!why.empty())
    out.diag = why;
  else
    out.diag = diag;
  return out;
}

}  // namespace

std::vector<std::string> axiom_ids() {
  std::vector<std::string> ids;
  for (const Schema& s : registry()) ids.push_back(s.id);
  ids.push_back("information-hiding");
  ids.push_back("nu-elimination");
  ids.push_back("unreachable-functions");
  ids.push_back("transfer-invariant");
  ids.push_back("hiding-rename");
  return ids;
}

std::optional<std::string> match_axiom(const FormulaPtr& goal, const Env& env,
                                       const std::map<std::string, std::string>& hints) {
  (void)hints;
  return match_axiom_ex(goal, env).id;
}

// Exposed to the checker for obligation diagnostics.
namespace detail {
std::pair<std::optional<std::string>, std::string> match_axiom_detail(const FormulaPtr& goal,
                                                                      const Env& env) {
  MatchOutcome o = match_axiom_ex(goal, env);
  return {o.id, o.diag};
}
}  // namespace detail

}  // namespace lsl
