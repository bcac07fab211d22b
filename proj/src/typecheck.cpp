#include "lsl/typecheck.hpp"

namespace lsl {

namespace {

[[noreturn]] void terr(const std::string& rule, const TermPtr& at, const std::string& msg) {
  throw TypeError("[" + rule + "] " + msg + " in `" + print_term(at) + "`");
}

// Unfolds top-level mu binders to expose a concrete constructor (the
// isomorphism rule applied where a specific shape is demanded).
TypePtr expose(TypePtr t) {
  int guard = 64;
  while (t->kind == TypeKind::Mu && guard-- > 0) t = unfold_mu(t);
  return t;
}

void require_eq(const std::string& rule, const TermPtr& at, const TypePtr& want,
                const TypePtr& got) {
  if (!type_equal(want, got))
    terr(rule, at, "expected type " + print_type(want) + " but found " + print_type(got));
}

TypePtr tc(const Env& env, const TermPtr& t);

// First-order operation signatures. `eq` is polymorphic over base types and
// handled separately.
struct OpSig {
  std::vector<TypePtr> args;
  TypePtr res;
};

const std::map<std::string, OpSig>& op_sigs() {
  static const std::map<std::string, OpSig> sigs = {
      {"add", {{t_nat(), t_nat()}, t_nat()}},  {"sub", {{t_nat(), t_nat()}, t_nat()}},
      {"mul", {{t_nat(), t_nat()}, t_nat()}},  {"le", {{t_nat(), t_nat()}, t_bool()}},
      {"lt", {{t_nat(), t_nat()}, t_bool()}},  {"ge", {{t_nat(), t_nat()}, t_bool()}},
      {"gt", {{t_nat(), t_nat()}, t_bool()}},  {"not", {{t_bool()}, t_bool()}},
      {"fact", {{t_nat()}, t_nat()}},          {"odd", {{t_nat()}, t_bool()}},
      {"even", {{t_nat()}, t_bool()}},
  };
  return sigs;
}

TypePtr tc(const Env& env, const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Const:
      if (std::holds_alternative<std::monostate>(t->cval)) return t_unit();
      if (std::holds_alternative<bool>(t->cval)) return t_bool();
      return t_nat();
    case TermKind::Var: {
      auto it = env.vars.find(t->name);
      if (it == env.vars.end()) terr("Var", t, "unbound variable " + t->name);
      return it->second;
    }
    case TermKind::Loc: {
      auto it = env.labels.find(t->label);
      if (it == env.labels.end()) terr("Loc", t, "unknown label #l" + std::to_string(t->label));
      return it->second;
    }
    case TermKind::Lam: {
      if (!t->type) terr("Abs", t, "missing parameter annotation");
      Env e2 = env;
      e2.vars[t->name] = t->type;
      return t_arrow(t->type, tc(e2, t->kids[0]));
    }
    case TermKind::Rec: {
      TypePtr ft = expose(t->type);
      if (ft->kind != TypeKind::Arrow) terr("Rec", t, "recursion annotation must be an arrow type");
      Env e2 = env;
      e2.vars[t->name] = t->type;
      TypePtr bt = tc(e2, t->kids[0]);
      require_eq("Rec", t, t->type, bt);
      return t->type;
    }
    case TermKind::Pair:
      return t_prod(tc(env, t->kids[0]), tc(env, t->kids[1]));
    case TermKind::Inj: {
      if (!t->type) terr("Inj", t, "missing sum-type annotation");
      TypePtr st = expose(t->type);
      if (st->kind != TypeKind::Sum) terr("Inj", t, "annotation must be a sum type");
      require_eq("Inj", t, t->idx == 1 ? st->a : st->b, tc(env, t->kids[0]));
      return t->type;
    }
    case TermKind::App: {
      // Unannotated abstraction in function position is the let form: the
      // binder's type is taken from the argument.
      const TermPtr& f = t->kids[0];
      if (f->kind == TermKind::Lam && !f->type) {
        TypePtr at = tc(env, t->kids[1]);
        Env e2 = env;
        e2.vars[f->name] = at;
        return tc(e2, f->kids[0]);
      }
      TypePtr ft = expose(tc(env, f));
      if (ft->kind != TypeKind::Arrow) terr("App", t, "function position has non-arrow type " + print_type(ft));
      require_eq("App", t, ft->a, tc(env, t->kids[1]));
      return ft->b;
    }
    case TermKind::Op: {
      if (t->name == "eq") {
        TypePtr a = tc(env, t->kids[0]);
        TypePtr b = tc(env, t->kids[1]);
        require_eq("Op", t, a, b);
        if (!is_base_type(expose(a))) terr("Op", t, "= requires base-type operands");
        return t_bool();
      }
      auto it = op_sigs().find(t->name);
      if (it == op_sigs().end()) terr("Op", t, "unknown operation " + t->name);
      if (it->second.args.size() != t->kids.size()) terr("Op", t, "arity mismatch for " + t->name);
      for (size_t k = 0; k < t->kids.size(); k++)
        require_eq("Op", t, it->second.args[k], tc(env, t->kids[k]));
      return it->second.res;
    }
    case TermKind::Proj: {
      TypePtr pt = expose(tc(env, t->kids[0]));
      if (pt->kind != TypeKind::Prod) terr("Proj", t, "projection from non-product");
      return t->idx == 1 ? pt->a : pt->b;
    }
    case TermKind::If: {
      require_eq("If", t, t_bool(), tc(env, t->kids[0]));
      TypePtr a = tc(env, t->kids[1]);
      require_eq("If", t, a, tc(env, t->kids[2]));
      return a;
    }
    case TermKind::Case: {
      TypePtr st = expose(tc(env, t->kids[0]));
      if (st->kind != TypeKind::Sum) terr("Case", t, "scrutinee has non-sum type");
      Env e1 = env;
      e1.vars[t->name] = st->a;
      TypePtr r1 = tc(e1, t->kids[1]);
      Env e2 = env;
      e2.vars[t->name2] = st->b;
      require_eq("Case", t, r1, tc(e2, t->kids[2]));
      return r1;
    }
    case TermKind::Deref: {
      TypePtr rt = expose(tc(env, t->kids[0]));
      if (rt->kind != TypeKind::Ref) terr("Deref", t, "dereference of non-reference");
      return rt->a;
    }
    case TermKind::Assign: {
      TypePtr rt = expose(tc(env, t->kids[0]));
      if (rt->kind != TypeKind::Ref) terr("Assign", t, "assignment target is not a reference");
      require_eq("Assign", t, rt->a, tc(env, t->kids[1]));
      return t_unit();
    }
    case TermKind::RefNew:
      return t_ref(tc(env, t->kids[0]));
  }
  throw std::logic_error("typecheck: bad kind");
}

}  // namespace

TypePtr typecheck_term(const Env& env, const TermPtr& t) { return tc(env, t); }

void typecheck_store(const Env& env, const Store& s) {
  Env label_env;
  label_env.labels = env.labels;
  for (const auto& [l, v] : s) {
    auto it = env.labels.find(l);
    if (it == env.labels.end())
      throw TypeError("store label #l" + std::to_string(l) + " missing from environment");
    TypePtr rt = expose(it->second);
    if (rt->kind != TypeKind::Ref)
      throw TypeError("label #l" + std::to_string(l) + " has non-reference type");
    if (!is_value(v))
      throw TypeError("store maps #l" + std::to_string(l) + " to a non-value");
    if (!free_vars(v).empty())
      throw TypeError("store maps #l" + std::to_string(l) + " to an open value");
    TypePtr vt = typecheck_term(label_env, v);
    if (!type_equal(rt->a, vt))
      throw TypeError("store content for #l" + std::to_string(l) + " has type " + print_type(vt) +
                      ", expected " + print_type(rt->a));
  }
}

}  // namespace lsl
