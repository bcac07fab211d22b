#include "lsl/rewrite.hpp"

#include <sstream>
#include <stdexcept>

#include "lsl/oracle.hpp"

namespace lsl {

namespace {

// Unfolds mu-types towards a finite form; throws naming the type when the
// predicate source is not finite.
TypePtr expose_finite(const TypePtr& t0) {
  TypePtr t = t0;
  int guard = 64;
  while (t->kind == TypeKind::Mu && guard-- > 0) t = unfold_mu(t);
  if (!finite_type(t) || t->kind == TypeKind::Mu)
    throw std::runtime_error("reachability predicate at non-finite type " + print_type(t0));
  return t;
}

// Structural matchability of types; a type variable on either side blocks
// the verdict (the equality may hold for some instantiation).
bool types_may_match(const TypePtr& a0, const TypePtr& b0, int depth = 32) {
  if (depth <= 0) return true;
  TypePtr a = a0, b = b0;
  int guard = 32;
  while (a->kind == TypeKind::Mu && guard-- > 0) a = unfold_mu(a);
  guard = 32;
  while (b->kind == TypeKind::Mu && guard-- > 0) b = unfold_mu(b);
  if (a->kind == TypeKind::Var || b->kind == TypeKind::Var) return true;
  if (a->kind == TypeKind::Mu || b->kind == TypeKind::Mu) return true;  // give up
  if (a->kind != b->kind) return false;
  if (a->a && !types_may_match(a->a, b->a, depth - 1)) return false;
  if (a->b && !types_may_match(a->b, b->b, depth - 1)) return false;
  return true;
}

bool closed_first_order(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Deref:
    case TermKind::Var:
    case TermKind::Loc:
    case TermKind::Lam:
    case TermKind::Rec:
      return false;
    default:
      for (const auto& k : t->kids)
        if (!closed_first_order(k)) return false;
      return true;
  }
}

struct Simplifier {
  const Env* env;  // may be null

  TypePtr try_type(const TermPtr& t) {
    if (!env) return nullptr;
    try {
      return typecheck_term(*env, t);
    } catch (const std::exception&) {
      return nullptr;
    }
  }

  void collect(const FormulaPtr& f, FKind k, std::vector<FormulaPtr>& out) {
    if (f->kind == k) {
      collect(f->kids[0], k, out);
      collect(f->kids[1], k, out);
    } else {
      out.push_back(f);
    }
  }

  FormulaPtr rebuild(std::vector<FormulaPtr>& parts, FKind k, const FormulaPtr& unit) {
    if (parts.empty()) return unit;
    FormulaPtr out = parts.back();
    for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it)
      out = k == FKind::And ? f_and(*it, out) : f_or(*it, out);
    return out;
  }

  FormulaPtr go(const FormulaPtr& f) {
    switch (f->kind) {
      case FKind::Eq: {
        if (alpha_eq(f->e1, f->e2)) return f_true();
        if (closed_first_order(f->e1) && closed_first_order(f->e2)) {
          try {
            Model empty;
            return alpha_eq(interpret_term(empty, f->e1), interpret_term(empty, f->e2))
                       ? f_true()
                       : f_false();
          } catch (const std::exception&) {
          }
        }
        TypePtr t1 = try_type(f->e1);
        TypePtr t2 = try_type(f->e2);
        if (t1 && t2 && !types_may_match(t1, t2)) return f_false();
        return f;
      }
      case FKind::Not: {
        FormulaPtr c = go(f->kids[0]);
        if (is_true(c)) return f_false();
        if (is_false(c)) return f_true();
        if (c->kind == FKind::Not) return c->kids[0];
        return f_not(c);
      }
      case FKind::And:
      case FKind::Or: {
        bool conj = f->kind == FKind::And;
        std::vector<FormulaPtr> parts;
        collect(f, f->kind, parts);
        std::vector<FormulaPtr> kept;
        for (const auto& p : parts) {
          FormulaPtr s = go(p);
          if (conj) {
            if (is_false(s)) return f_false();
            if (is_true(s)) continue;
          } else {
            if (is_true(s)) return f_true();
            if (is_false(s)) continue;
          }
          kept.push_back(s);
        }
        return rebuild(kept, f->kind, conj ? f_true() : f_false());
      }
      case FKind::Implies: {
        FormulaPtr a = go(f->kids[0]);
        FormulaPtr c = go(f->kids[1]);
        if (is_false(a) || is_true(c)) return f_true();
        if (is_true(a)) return c;
        return f_implies(a, c);
      }
      case FKind::Forall:
      case FKind::NuBar: {
        FormulaPtr c = go(f->kids[0]);
        if (is_true(c)) return f_true();
        auto f2 = std::make_shared<Formula>(*f);
        f2->kids = {c};
        return f2;
      }
      case FKind::Exists:
      case FKind::Nu: {
        FormulaPtr c = go(f->kids[0]);
        if (is_false(c)) return f_false();
        auto f2 = std::make_shared<Formula>(*f);
        f2->kids = {c};
        return f2;
      }
      case FKind::Always: {
        FormulaPtr c = go(f->kids[0]);
        if (is_true(c)) return f_true();
        return f_always(c);
      }
      case FKind::Someday: {
        FormulaPtr c = go(f->kids[0]);
        if (is_false(c)) return f_false();
        return f_someday(c);
      }
      default: {
        if (f->kids.empty()) return f;
        auto f2 = std::make_shared<Formula>(*f);
        for (auto& k : f2->kids) k = go(k);
        return f2;
      }
    }
  }
};

struct Eliminator {
  Env base;
  RewriteTrace trace;
  std::set<std::string> used;

  // ---- the ireach-free characterization clauses ------------------------

  FormulaPtr reach_clauses(const TermPtr& x, const TypePtr& tx0, const TermPtr& y,
                           const TypePtr& ty, std::vector<std::string>& rules) {
    TypePtr tx = expose_finite(tx0);
    switch (tx->kind) {
      case TypeKind::Unit:
      case TypeKind::Bool:
      case TypeKind::Nat:
        rules.push_back("base");
        return f_false();
      case TypeKind::Prod: {
        rules.push_back("product");
        std::string x1 = fresh_name("x1", used);
        used.insert(x1);
        std::string x2 = fresh_name("x2", used);
        used.insert(x2);
        FormulaPtr r1 = reach_clauses(m_var(x1), tx->a, y, ty, rules);
        FormulaPtr r2 = reach_clauses(m_var(x2), tx->b, y, ty, rules);
        return f_exists(
            x1, tx->a,
            f_exists(x2, tx->b,
                     f_and(f_eq(x, m_pair(m_var(x1), m_var(x2))), f_or(r1, r2))));
      }
      case TypeKind::Sum: {
        rules.push_back("sum");
        std::string xs = fresh_name("xs", used);
        used.insert(xs);
        FormulaPtr d1 = f_exists(
            xs, tx->a,
            f_and(f_eq(x, m_inj(1, m_var(xs), tx)),
                  reach_clauses(m_var(xs), tx->a, y, ty, rules)));
        FormulaPtr d2 = f_exists(
            xs, tx->b,
            f_and(f_eq(x, m_inj(2, m_var(xs), tx)),
                  reach_clauses(m_var(xs), tx->b, y, ty, rules)));
        return f_or(d1, d2);
      }
      case TypeKind::Ref: {
        rules.push_back("reference");
        FormulaPtr eq;
        // the equality is dropped when the two Ref types cannot match
        if (types_may_match(tx, ty))
          eq = f_eq(x, y);
        else
          eq = f_false();
        return f_or(eq, reach_clauses(m_deref(x), tx->a, y, ty, rules));
      }
      default:
        throw std::runtime_error("reachability predicate at non-finite type " +
                                 print_type(tx0));
    }
  }

  FormulaPtr eliminate_at(const FormulaPtr& f, const Env& env, const std::string& path) {
    TypePtr tx = typecheck_term(env, f->e1);
    TypePtr ty = typecheck_term(env, f->e2);
    std::vector<std::string> rules;
    FormulaPtr out = reach_clauses(f->e1, tx, f->e2, ty, rules);
    if (f->kind == FKind::NotReach) {
      rules.insert(rules.begin(), "negation");
      out = f_not(out);
    }
    Simplifier s{&env};
    out = s.go(out);
    std::string rule;
    for (size_t i = 0; i < rules.size(); i++) rule += (i ? "," : "") + rules[i];
    trace.steps.push_back({path, rule, print_formula(out)});
    return out;
  }

  FormulaPtr walk(const FormulaPtr& f, const Env& env, const std::string& path) {
    auto sub = [&](int i) { return path.empty() ? std::to_string(i) : path + "." + std::to_string(i); };
    switch (f->kind) {
      case FKind::Reach:
      case FKind::NotReach:
        return eliminate_at(f, env, path);
      case FKind::Forall:
      case FKind::Exists:
      case FKind::Nu:
      case FKind::NuBar: {
        Env env2 = env;
        TypePtr t = f->type ? f->type : infer_binder_type(env, f);
        if (t)
          env2.vars[f->var] = t;
        else
          env2.vars.erase(f->var);
        auto f2 = std::make_shared<Formula>(*f);
        f2->kids = {walk(f->kids[0], env2, sub(0))};
        return f2;
      }
      case FKind::ForallTy:
      case FKind::ExistsTy: {
        auto f2 = std::make_shared<Formula>(*f);
        f2->kids = {walk(f->kids[0], env, sub(0))};
        return f2;
      }
      case FKind::Eval: {
        Env env2 = env;
        try {
          TypePtr ft = typecheck_term(env, f->e1);
          int guard = 32;
          while (ft->kind == TypeKind::Mu && guard-- > 0) ft = unfold_mu(ft);
          if (ft->kind == TypeKind::Arrow)
            env2.vars[f->var] = ft->b;
          else
            env2.vars.erase(f->var);
        } catch (const std::exception&) {
          env2.vars.erase(f->var);
        }
        auto f2 = std::make_shared<Formula>(*f);
        f2->kids = {walk(f->kids[0], env2, sub(0))};
        return f2;
      }
      default: {
        if (f->kids.empty()) return f;
        auto f2 = std::make_shared<Formula>(*f);
        for (size_t i = 0; i < f2->kids.size(); i++)
          f2->kids[i] = walk(f2->kids[i], env, sub((int)i));
        return f2;
      }
    }
  }
};

void collect_binders(const FormulaPtr& f, std::set<std::string>& out) {
  if (!f->var.empty()) out.insert(f->var);
  for (const auto& k : f->kids) collect_binders(k, out);
}

}  // namespace

std::pair<FormulaPtr, RewriteTrace> eliminate_reachability(const FormulaPtr& f, const Env& env) {
  Eliminator e;
  e.base = env;
  e.used = formula_free_vars(f);
  collect_binders(f, e.used);
  for (const auto& [x, t] : env.vars) e.used.insert(x);
  FormulaPtr out = e.walk(f, env, "");
  return {out, std::move(e.trace)};
}

namespace {

FormulaPtr splice(const FormulaPtr& f, const std::vector<int>& path, size_t i,
                  const FormulaPtr& repl) {
  if (i == path.size()) return repl;
  auto f2 = std::make_shared<Formula>(*f);
  f2->kids.at(path[i]) = splice(f->kids.at(path[i]), path, i + 1, repl);
  return f2;
}

}  // namespace

FormulaPtr replay_trace(const FormulaPtr& f, const RewriteTrace& trace) {
  FormulaPtr cur = f;
  for (const auto& step : trace.steps) {
    std::vector<int> path;
    std::stringstream ss(step.path);
    std::string part;
    while (std::getline(ss, part, '.'))
      if (!part.empty()) path.push_back(std::stoi(part));
    cur = splice(cur, path, 0, parse_formula(step.result));
  }
  return cur;
}

FormulaPtr ireach_expand(const TermPtr& x, const TermPtr& y, int i, const Env& env) {
  TypePtr tx = expose_finite(typecheck_term(env, x));
  if (i <= 0) return f_eq(x, y);
  std::set<std::string> used = free_vars(x);
  for (const auto& v : free_vars(y)) used.insert(v);
  for (const auto& [v, t] : env.vars) used.insert(v);
  switch (tx->kind) {
    case TypeKind::Unit:
    case TypeKind::Bool:
    case TypeKind::Nat:
      return f_false();
    case TypeKind::Prod: {
      FormulaPtr r1 = ireach_expand(m_proj(1, x), y, i - 1, env);
      FormulaPtr r2 = ireach_expand(m_proj(2, x), y, i - 1, env);
      FormulaPtr r0 = ireach_expand(x, y, i - 1, env);
      return desugar(f_or(f_or(r1, r2), r0));
    }
    case TypeKind::Sum: {
      std::string xs = fresh_name("xs", used);
      Env env1 = env;
      env1.vars[xs] = tx->a;
      FormulaPtr d1 = f_exists(xs, tx->a,
                               f_and(f_eq(x, m_inj(1, m_var(xs), tx)),
                                     ireach_expand(m_var(xs), y, i - 1, env1)));
      Env env2 = env;
      env2.vars[xs] = tx->b;
      FormulaPtr d2 = f_exists(xs, tx->b,
                               f_and(f_eq(x, m_inj(2, m_var(xs), tx)),
                                     ireach_expand(m_var(xs), y, i - 1, env2)));
      return f_or(f_or(d1, d2), ireach_expand(x, y, i - 1, env));
    }
    case TypeKind::Ref: {
      FormulaPtr r1 = ireach_expand(m_deref(x), y, i - 1, env);
      FormulaPtr r0 = ireach_expand(x, y, i - 1, env);
      return f_or(r1, r0);
    }
    default:
      throw std::runtime_error("i-step reachability at non-finite type " + print_type(tx));
  }
}

FormulaPtr simplify(const FormulaPtr& f) {
  Simplifier s{nullptr};
  return s.go(f);
}

FormulaPtr simplify(const FormulaPtr& f, const Env& env) {
  Simplifier s{&env};
  return s.go(f);
}

}  // namespace lsl
