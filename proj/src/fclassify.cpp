#include <functional>
#include <stdexcept>

#include "lsl/formula.hpp"

namespace lsl {

namespace {

bool is_term_binder(FKind k) {
  return k == FKind::Forall || k == FKind::Exists || k == FKind::Nu || k == FKind::NuBar ||
         k == FKind::Eval;
}

TypePtr expose(TypePtr t) {
  int guard = 64;
  while (t && t->kind == TypeKind::Mu && guard-- > 0) t = unfold_mu(t);
  return t;
}

// Typechecking with inference for unannotated binders. Variables with null
// type are "unknown"; a first equation against a typed side resolves them.
struct FCheck {
  Env env;  // known types; unknown binders tracked in `unknown`
  std::set<std::string> unknown;

  [[noreturn]] void fail(const std::string& msg) { throw TypeError("formula: " + msg); }

  // Types a term, or returns nullptr if it depends on an unknown variable.
  TypePtr try_type(const TermPtr& t) {
    for (const auto& x : free_vars(t))
      if (unknown.count(x)) return nullptr;
    return typecheck_term(env, t);
  }

  // Inference pass: resolve unknowns from bare-variable equations.
  void infer(const FormulaPtr& f) {
    bool progress = true;
    while (progress) {
      progress = false;
      infer_walk(f, progress);
    }
  }
  // Assigns type t to the unknowns of pattern a (a variable, or a
  // pair/injection of patterns).
  void resolve_ty(const TermPtr& a, const TypePtr& t, bool& progress) {
    if (!t) return;
    TypePtr te = expose(t);
    if (a->kind == TermKind::Var && unknown.count(a->name)) {
      env.vars[a->name] = t;
      unknown.erase(a->name);
      progress = true;
    } else if (a->kind == TermKind::Pair && te->kind == TypeKind::Prod) {
      resolve_ty(a->kids[0], te->a, progress);
      resolve_ty(a->kids[1], te->b, progress);
    } else if (a->kind == TermKind::Inj && te->kind == TypeKind::Sum) {
      resolve_ty(a->kids[0], a->idx == 1 ? te->a : te->b, progress);
    }
  }

  void infer_walk(const FormulaPtr& f, bool& progress) {
    if (f->kind == FKind::Eq) {
      auto solve = [&](const TermPtr& a, const TermPtr& b) {
        if (a->kind == TermKind::Var || a->kind == TermKind::Pair ||
            a->kind == TermKind::Inj) {
          if (TypePtr tb = try_type(b)) resolve_ty(a, tb, progress);
        }
        if (a->kind == TermKind::Inj && a->type)  // annotation suffices
          resolve_ty(a, a->type, progress);
      };
      solve(f->e1, f->e2);
      solve(f->e2, f->e1);
      return;
    }
    // Reach/NotReach give no content type; content quantification over an
    // unknown cannot resolve it either. Binders shadow.
    if (is_term_binder(f->kind)) {
      bool was_unknown = unknown.count(f->var);
      TypePtr saved;
      auto it = env.vars.find(f->var);
      if (it != env.vars.end()) saved = it->second;
      // Treat the binder as opaque during outer inference: anything learned
      // about it in its own scope is handled when the binder is checked.
      env.vars.erase(f->var);
      unknown.insert(f->var);
      std::set<std::string> before = unknown;
      bool local = false;
      for (const auto& k : f->kids) infer_walk(k, local);
      if (saved)
        env.vars[f->var] = saved;
      else
        env.vars.erase(f->var);
      if (!was_unknown) unknown.erase(f->var);
      // Resolving the binder's own variable is not progress for the outer
      // fixpoint (it is re-inserted on every pass); other resolutions are.
      if (local)
        for (const auto& n : before)
          if (n != f->var && !unknown.count(n)) {
            progress = true;
            break;
          }
      return;
    }
    for (const auto& k : f->kids) infer_walk(k, progress);
  }

  TypePtr type_term(const TermPtr& t, const std::string& where) {
    TypePtr r = try_type(t);
    if (!r) fail("cannot infer the type of `" + print_term(t) + "` in " + where +
                 "; annotate the binder");
    return r;
  }

  void check(const FormulaPtr& f) {
    switch (f->kind) {
      case FKind::Eq: {
        // Equality across unmatchable types is permitted (it is simply
        // false), but both sides must be well-formed.
        type_term(f->e1, "equality");
        type_term(f->e2, "equality");
        return;
      }
      case FKind::Reach:
      case FKind::NotReach: {
        type_term(f->e1, "reachability");
        TypePtr t2 = expose(type_term(f->e2, "reachability"));
        if (t2->kind != TypeKind::Ref) fail("reachability target must have a Ref type");
        return;
      }
      case FKind::Not:
      case FKind::And:
      case FKind::Or:
      case FKind::Implies:
      case FKind::Always:
      case FKind::Someday:
        for (const auto& k : f->kids) check(k);
        return;
      case FKind::Forall:
      case FKind::Exists:
      case FKind::Nu:
      case FKind::NuBar: {
        TypePtr t = f->type;
        if ((f->kind == FKind::Nu || f->kind == FKind::NuBar) && t &&
            expose(t)->kind != TypeKind::Ref)
          fail("nu/nubar bind Ref-typed variables only, got " + print_type(t));
        with_binding(f->var, t, f->kids[0],
                     f->kind == FKind::Nu || f->kind == FKind::NuBar);
        return;
      }
      case FKind::ForallTy:
      case FKind::ExistsTy:
        check(f->kids[0]);
        return;
      case FKind::AllContent:
      case FKind::SomeContent: {
        TypePtr t = expose(type_term(f->e1, "content quantification"));
        if (t->kind != TypeKind::Ref) fail("content quantification needs a Ref-typed subject");
        check(f->kids[0]);
        return;
      }
      case FKind::Eval: {
        TypePtr ft = expose(type_term(f->e1, "evaluation formula"));
        if (ft->kind != TypeKind::Arrow) fail("evaluation formula needs an arrow-typed function");
        TypePtr at = type_term(f->e2, "evaluation formula");
        if (!type_equal(ft->a, at))
          fail("evaluation-formula argument has type " + print_type(at) + ", expected " +
               print_type(ft->a));
        for (const auto& e : f->effects) {
          TypePtr et = expose(type_term(e, "effect set"));
          if (et->kind != TypeKind::Ref) fail("effect-set entries must have Ref types");
          if (has_deref(e)) fail("effect-set entries must not contain dereferences");
        }
        with_binding(f->var, ft->b, f->kids[0], false);
        return;
      }
      case FKind::Meta:
        return;
    }
  }

  static bool has_deref(const TermPtr& t) {
    if (t->kind == TermKind::Deref) return true;
    for (const auto& k : t->kids)
      if (has_deref(k)) return true;
    return false;
  }

  void with_binding(const std::string& x, TypePtr t, const FormulaPtr& body, bool must_ref) {
    TypePtr saved;
    bool had = false;
    auto it = env.vars.find(x);
    if (it != env.vars.end()) {
      saved = it->second;
      had = true;
    }
    bool was_unknown = unknown.count(x);
    if (t) {
      env.vars[x] = t;
      unknown.erase(x);
    } else {
      env.vars.erase(x);
      unknown.insert(x);
      infer(body);
      if (unknown.count(x)) {
        // Unresolved binder: allowed only if the variable is unused.
        if (formula_free_vars(body).count(x))
          fail("cannot infer a type for binder " + x + "; annotate it");
      } else if (must_ref && expose(env.vars[x])->kind != TypeKind::Ref) {
        fail("nu/nubar bind Ref-typed variables only; inferred " + print_type(env.vars[x]) +
             " for " + x);
      }
    }
    check(body);
    if (had)
      env.vars[x] = saved;
    else
      env.vars.erase(x);
    if (was_unknown)
      unknown.insert(x);
    else
      unknown.erase(x);
  }
};

}  // namespace

void typecheck_formula(const Env& env, const FormulaPtr& f) {
  FCheck c;
  c.env = env;
  c.check(f);
}

TypePtr infer_binder_type(const Env& env, const FormulaPtr& f) {
  if (f->type) return f->type;
  if (f->kind != FKind::Forall && f->kind != FKind::Exists && f->kind != FKind::Nu &&
      f->kind != FKind::NuBar)
    return nullptr;
  FCheck c;
  c.env = env;
  c.env.vars.erase(f->var);
  c.unknown.insert(f->var);
  try {
    c.infer(f->kids[0]);
  } catch (const TypeError&) {
    return nullptr;
  }
  auto it = c.env.vars.find(f->var);
  return it == c.env.vars.end() ? nullptr : it->second;
}

namespace {

TermPtr term_subst_ty(const TermPtr& t, const TypePtr& ty, const std::string& X) {
  auto t2 = std::make_shared<Term>(*t);
  if (t->type) t2->type = type_subst(t->type, X, ty);
  for (auto& k : t2->kids) k = term_subst_ty(k, ty, X);
  return t2;
}

}  // namespace

FormulaPtr subst_tyvar(const FormulaPtr& f, const TypePtr& t, const std::string& X) {
  if ((f->kind == FKind::ForallTy || f->kind == FKind::ExistsTy) && f->var == X) return f;
  auto f2 = std::make_shared<Formula>(*f);
  if (f->type) f2->type = type_subst(f->type, X, t);
  if (f->e1) f2->e1 = term_subst_ty(f->e1, t, X);
  if (f->e2) f2->e2 = term_subst_ty(f->e2, t, X);
  for (auto& e : f2->effects) e = term_subst_ty(e, t, X);
  for (auto& k : f2->kids) k = subst_tyvar(k, t, X);
  return f2;
}

std::set<std::string> fpn(const TermPtr& e) {
  switch (e->kind) {
    case TermKind::Var:
      return {e->name};
    case TermKind::Const:
    case TermKind::Loc:
    case TermKind::Deref:
      return {};
    case TermKind::Pair: {
      auto l = fpn(e->kids[0]);
      auto r = fpn(e->kids[1]);
      l.insert(r.begin(), r.end());
      return l;
    }
    case TermKind::Inj:
    case TermKind::Proj:
      return fpn(e->kids[0]);
    case TermKind::Op: {
      std::set<std::string> out;
      for (const auto& k : e->kids) {
        auto s = fpn(k);
        out.insert(s.begin(), s.end());
      }
      return out;
    }
    default:
      throw std::logic_error("fpn: not a logical term");
  }
}

namespace {

void active_walk(const FormulaPtr& f, std::set<std::string> bound, std::set<std::string>& out) {
  // Everything under box / [!e] / <!e> is inactive.
  if (f->kind == FKind::Always || f->kind == FKind::AllContent || f->kind == FKind::SomeContent)
    return;
  std::function<void(const TermPtr&)> scan = [&](const TermPtr& t) {
    if (t->kind == TermKind::Deref && t->kids[0]->kind == TermKind::Var &&
        !bound.count(t->kids[0]->name))
      out.insert(t->kids[0]->name);
    for (const auto& k : t->kids) scan(k);
  };
  if (f->e1) scan(f->e1);
  if (f->e2) scan(f->e2);
  for (const auto& e : f->effects) scan(e);
  if (is_term_binder(f->kind)) bound.insert(f->var);
  for (const auto& k : f->kids) active_walk(k, bound, out);
}

}  // namespace

std::set<std::string> active_derefs(const FormulaPtr& f) {
  std::set<std::string> out;
  active_walk(f, {}, out);
  return out;
}

namespace {

bool atom_like(const FormulaPtr& f) {
  if (f->kind == FKind::Eq || f->kind == FKind::Reach || f->kind == FKind::NotReach) return true;
  if (f->kind == FKind::Not && f->kids[0]->kind == FKind::Eq) return true;  // e != e'
  return false;
}

bool tame(const FormulaPtr& f) {
  if (atom_like(f)) return true;
  switch (f->kind) {
    case FKind::Always:
      return true;  // box C is tame for any C
    case FKind::And:
    case FKind::Or:
      return tame(f->kids[0]) && tame(f->kids[1]);
    case FKind::Forall:
    case FKind::Exists:
    case FKind::ForallTy:
    case FKind::ExistsTy:
    case FKind::AllContent:
    case FKind::SomeContent:
      return tame(f->kids[0]);
    default:
      return false;
  }
}

bool mono(const FormulaPtr& f);
bool anti(const FormulaPtr& f);

bool mono(const FormulaPtr& f) {
  if (atom_like(f)) return true;
  switch (f->kind) {
    case FKind::Not:
      return anti(f->kids[0]);
    case FKind::And:
    case FKind::Or:
      return mono(f->kids[0]) && mono(f->kids[1]);
    case FKind::Implies:
      return anti(f->kids[0]) && mono(f->kids[1]);
    case FKind::Forall:
      return mono(f->kids[0]);
    case FKind::Exists:
      return f->type && is_base_type(f->type) && mono(f->kids[0]);
    case FKind::ForallTy:
    case FKind::ExistsTy:
    case FKind::Nu:
    case FKind::NuBar:
    case FKind::Always:
    case FKind::AllContent:
      return mono(f->kids[0]);
    case FKind::Eval:
      return mono(f->kids[0]);
    default:
      return false;
  }
}

bool anti(const FormulaPtr& f) {
  if (atom_like(f)) return true;
  switch (f->kind) {
    case FKind::Not:
      return mono(f->kids[0]);
    case FKind::And:
    case FKind::Or:
      return anti(f->kids[0]) && anti(f->kids[1]);
    case FKind::Implies:
      return mono(f->kids[0]) && anti(f->kids[1]);
    case FKind::Forall:
      return f->type && is_base_type(f->type) && anti(f->kids[0]);
    case FKind::Exists:
      return anti(f->kids[0]);
    case FKind::ForallTy:
    case FKind::ExistsTy:
    case FKind::Nu:
    case FKind::NuBar:
      return anti(f->kids[0]);
    default:
      return false;
  }
}

bool thin(const FormulaPtr& f, const std::string& y, const Env& env) {
  // A base-typed variable can always be dropped. (Mere absence of y from the
  // formula is NOT enough: y may keep a label visible that a modal formula
  // depends on.)
  auto it = env.vars.find(y);
  if (it != env.vars.end() && is_base_type(it->second)) return true;
  if (atom_like(f)) return true;
  switch (f->kind) {
    case FKind::And:
    case FKind::Or:
      return thin(f->kids[0], y, env) && thin(f->kids[1], y, env);
    case FKind::Forall:
      return thin(f->kids[0], y, env);
    case FKind::Exists:
      return f->type && is_base_type(f->type) && thin(f->kids[0], y, env);
    case FKind::ForallTy:
    case FKind::ExistsTy:
    case FKind::Nu:
    case FKind::NuBar:
    case FKind::Always:
    case FKind::AllContent:
      return thin(f->kids[0], y, env);
    case FKind::Eval:
      return thin(f->kids[0], y, env);
    default:
      return false;
  }
}

}  // namespace

Classification classify_thin(const FormulaPtr& f, const std::string& y, const Env& env) {
  return thin(f, y, env) ? Classification::Proven : Classification::NotProven;
}
Classification classify_monotone(const FormulaPtr& f) {
  return mono(f) ? Classification::Proven : Classification::NotProven;
}
Classification classify_antimonotone(const FormulaPtr& f) {
  return anti(f) ? Classification::Proven : Classification::NotProven;
}
Classification classify_tame(const FormulaPtr& f) {
  return tame(f) ? Classification::Proven : Classification::NotProven;
}
Classification classify_stateless_except(const FormulaPtr& f, const std::set<std::string>& xs) {
  if (!tame(f)) return Classification::NotProven;
  for (const auto& x : active_derefs(f))
    if (!xs.count(x)) return Classification::NotProven;
  return Classification::Proven;
}
Classification classify_stateless(const FormulaPtr& f) {
  if (f->kind == FKind::Always) return Classification::Proven;
  return classify_stateless_except(f, {});
}

}  // namespace lsl
