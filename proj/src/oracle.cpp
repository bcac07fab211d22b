#include "lsl/oracle.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <stdexcept>

namespace lsl {

Verdict v_true() { return {VKind::True, ""}; }
Verdict v_false() { return {VKind::False, ""}; }
Verdict v_unknown(std::string reason) { return {VKind::Unknown, std::move(reason)}; }

TermPtr interpret_term(const Model& m, const TermPtr& e) {
  switch (e->kind) {
    case TermKind::Const:
    case TermKind::Loc:
      return e;
    case TermKind::Var: {
      auto it = m.env.find(e->name);
      if (it == m.env.end()) throw std::runtime_error("unbound variable " + e->name);
      return it->second;
    }
    case TermKind::Pair:
      return m_pair(interpret_term(m, e->kids[0]), interpret_term(m, e->kids[1]));
    case TermKind::Inj:
      return m_inj(e->idx, interpret_term(m, e->kids[0]), e->type);
    case TermKind::Op: {
      std::vector<TermPtr> args;
      for (const auto& k : e->kids) {
        TermPtr v = interpret_term(m, k);
        if (v->kind != TermKind::Const)
          throw std::runtime_error("operation " + e->name + " applied to a non-constant");
        args.push_back(v);
      }
      return apply_op(e->name, args);
    }
    case TermKind::Deref: {
      TermPtr v = interpret_term(m, e->kids[0]);
      if (v->kind != TermKind::Loc)
        throw std::runtime_error("dereference of a non-reference value");
      auto it = m.store.find(v->label);
      if (it == m.store.end()) throw std::runtime_error("dereference of dangling label");
      return it->second;
    }
    case TermKind::Proj: {
      TermPtr v = interpret_term(m, e->kids[0]);
      if (v->kind != TermKind::Pair) throw std::runtime_error("projection of a non-pair");
      return v->kids[e->idx == 1 ? 0 : 1];
    }
    case TermKind::Lam:
    case TermKind::Rec: {
      // Values of arrow type may enter via model bindings; close over the env.
      TermPtr out = e;
      for (const auto& x : free_vars(e)) {
        auto it = m.env.find(x);
        if (it == m.env.end()) throw std::runtime_error("unbound variable " + x);
        out = substitute(out, it->second, x);
      }
      return out;
    }
    default:
      throw std::runtime_error("not a logical term: " + print_term(e));
  }
}

bool reachable_in_model(const Model& m, const TermPtr& e1, const TermPtr& e2) {
  TermPtr v1 = interpret_term(m, e1);
  TermPtr v2 = interpret_term(m, e2);
  if (v2->kind != TermKind::Loc)
    throw std::runtime_error("reachability target is not a reference");
  return label_closure(free_labels(v1), m.store).count(v2->label) > 0;
}

namespace {

bool has_closure(const TermPtr& t) {
  if (t->kind == TermKind::Lam || t->kind == TermKind::Rec) return true;
  for (const auto& k : t->kids)
    if (has_closure(k)) return true;
  return false;
}

int smallest_fresh_label(const Store& s) {
  int l = 0;
  while (s.count(l)) l++;
  return l;
}

// Labels a context can obtain as first-class references: labels occurring in
// env values outside closure bodies, closed under data destructors and
// dereference chains. Closure-captured labels are excluded (a context cannot
// extract them without applying the closure).
void extractable(const TermPtr& v, std::set<int>& out) {
  switch (v->kind) {
    case TermKind::Loc:
      out.insert(v->label);
      return;
    case TermKind::Pair:
    case TermKind::Inj:
      for (const auto& k : v->kids) extractable(k, out);
      return;
    default:
      return;  // constants and closures expose nothing directly
  }
}

std::set<int> accessible_labels(const Model& m) {
  std::set<int> acc;
  for (const auto& [l, v] : m.store)
    if (!m.hidden.count(l)) acc.insert(l);  // free labels are part of the interface
  for (const auto& [x, v] : m.env) extractable(v, acc);
  // dereference chains
  std::vector<int> work(acc.begin(), acc.end());
  while (!work.empty()) {
    int l = work.back();
    work.pop_back();
    auto it = m.store.find(l);
    if (it == m.store.end()) continue;
    std::set<int> more;
    extractable(it->second, more);
    for (int l2 : more)
      if (acc.insert(l2).second) work.push_back(l2);
  }
  return acc;
}

bool type_mentions_ref(const TypePtr& t) {
  if (!t) return true;  // unknown: assume the worst
  if (t->kind == TypeKind::Ref) return true;
  if (t->a && type_mentions_ref(t->a)) return true;
  if (t->b && type_mentions_ref(t->b)) return true;
  return false;
}

// True when some closure in the model could, when applied, hand a reference
// to the caller (its type mentions Ref outside our extractable fragment).
// Such models keep Ref-quantifier enumeration incomplete.
bool closures_may_expose_refs(const Model& m) {
  Env env = model_env(m);
  auto check = [&](const TermPtr& v) -> bool {
    if (!has_closure(v)) return false;
    try {
      return type_mentions_ref(typecheck_term(env, v));
    } catch (const std::exception&) {
      return true;
    }
  };
  for (const auto& [x, v] : m.env)
    if (check(v)) return true;
  for (const auto& [l, v] : m.store)
    if (check(v)) return true;
  return false;
}

TypePtr content_type_of(const Model& m, int label) {
  auto it = m.labtypes.find(label);
  if (it != m.labtypes.end()) return it->second;
  auto sv = m.store.find(label);
  if (sv == m.store.end()) return nullptr;
  try {
    return typecheck_term(model_env(m), sv->second);
  } catch (const std::exception&) {
    return nullptr;
  }
}

struct UniverseSet {
  std::vector<TermPtr> vals;
  bool complete = false;
};

struct Sat {
  const Bounds& b;

  // ---- value universes -------------------------------------------------

  std::vector<TermPtr> model_values_of_type(const Model& m, const TypePtr& t) {
    std::vector<TermPtr> out;
    Env env = model_env(m);
    auto consider = [&](const TermPtr& v) {
      try {
        if (type_equal(typecheck_term(env, v), t)) {
          for (const auto& w : out)
            if (alpha_eq(w, v)) return;
          out.push_back(v);
        }
      } catch (const std::exception&) {
      }
    };
    for (const auto& [x, v] : m.env) consider(v);
    for (const auto& [l, v] : m.store) consider(v);
    return out;
  }

  UniverseSet universe(const Model& m, const TypePtr& t, int depth) {
    UniverseSet u;
    if (!t || depth <= 0) return u;
    switch (t->kind) {
      case TypeKind::Unit:
        u.vals = {m_unit()};
        u.complete = true;
        return u;
      case TypeKind::Bool:
        u.vals = {m_bool(false), m_bool(true)};
        u.complete = true;
        return u;
      case TypeKind::Nat:
        for (int n = 0; n <= b.nat_bound; n++) u.vals.push_back(m_nat(n));
        u.complete = false;  // the bound decides
        return u;
      case TypeKind::Ref: {
        // Existing witnesses: context-accessible labels of matching content
        // type. Fresh cells are added at the quantifier sites, which also
        // settle completeness.
        for (int l : accessible_labels(m)) {
          TypePtr ct = content_type_of(m, l);
          if (ct && type_equal(ct, t->a)) u.vals.push_back(m_loc(l));
        }
        u.complete = !closures_may_expose_refs(m);
        return u;
      }
      case TypeKind::Prod: {
        UniverseSet ua = universe(m, t->a, depth - 1);
        UniverseSet ub = universe(m, t->b, depth - 1);
        for (const auto& va : ua.vals)
          for (const auto& vb : ub.vals) u.vals.push_back(m_pair(va, vb));
        u.complete = ua.complete && ub.complete;
        return u;
      }
      case TypeKind::Sum: {
        UniverseSet ua = universe(m, t->a, depth - 1);
        UniverseSet ub = universe(m, t->b, depth - 1);
        for (const auto& va : ua.vals) u.vals.push_back(m_inj(1, va, t));
        for (const auto& vb : ub.vals) u.vals.push_back(m_inj(2, vb, t));
        u.complete = ua.complete && ub.complete;
        return u;
      }
      case TypeKind::Mu: {
        TypePtr un = unfold_mu(t);
        if (finite_type(t) && un->kind != TypeKind::Mu) return universe(m, un, depth);
        u.vals = model_values_of_type(m, t);
        u.complete = false;
        return u;
      }
      case TypeKind::Arrow:
      case TypeKind::Var:
        u.vals = model_values_of_type(m, t);
        u.complete = false;
        return u;
    }
    return u;
  }

  TermPtr default_value(const Model& m, const TypePtr& t, int depth) {
    if (!t || depth <= 0) return nullptr;
    switch (t->kind) {
      case TypeKind::Unit: return m_unit();
      case TypeKind::Bool: return m_bool(false);
      case TypeKind::Nat: return m_nat(0);
      case TypeKind::Prod: {
        TermPtr a = default_value(m, t->a, depth - 1);
        TermPtr c = default_value(m, t->b, depth - 1);
        return (a && c) ? m_pair(a, c) : nullptr;
      }
      case TypeKind::Sum: {
        TermPtr a = default_value(m, t->a, depth - 1);
        return a ? m_inj(1, a, t) : nullptr;
      }
      case TypeKind::Ref: {
        for (const auto& [l, v] : m.store) {
          TypePtr ct = content_type_of(m, l);
          if (ct && type_equal(ct, t->a)) return m_loc(l);
        }
        return nullptr;
      }
      case TypeKind::Mu: {
        TypePtr un = unfold_mu(t);
        if (finite_type(t) && un->kind != TypeKind::Mu)
          return default_value(m, un, depth);
        break;
      }
      default:
        break;
    }
    auto vs = model_values_of_type(m, t);
    return vs.empty() ? nullptr : vs.front();
  }

  // ---- content sensitivity --------------------------------------------

  // Whether the truth of `f` may depend on the content of the cell bound to
  // x when x denotes a fresh label: some dereference mentions x, a closure is
  // applied to x (it could read the cell), or — when the content type can
  // itself contain references (`refy`) — reachability starts from a term
  // mentioning x.
  static bool term_has_deref_on(const TermPtr& t, const std::string& x) {
    if (t->kind == TermKind::Deref && free_vars(t->kids[0]).count(x)) return true;
    for (const auto& k : t->kids)
      if (term_has_deref_on(k, x)) return true;
    return false;
  }

  static bool content_sensitive(const FormulaPtr& f, const std::string& x, bool refy) {
    auto tm = [&](const TermPtr& t) { return t && term_has_deref_on(t, x); };
    switch (f->kind) {
      case FKind::Eq:
        return tm(f->e1) || tm(f->e2);
      case FKind::Reach:
      case FKind::NotReach:
        // the target's content never matters; the source's does only when it
        // can hold labels
        if (refy && f->e1 && free_vars(f->e1).count(x)) return true;
        return tm(f->e1) || tm(f->e2);
      case FKind::Eval:
        if (f->e1 && free_vars(f->e1).count(x)) return true;
        if (f->e2 && free_vars(f->e2).count(x)) return true;
        for (const auto& e : f->effects)
          if (free_vars(e).count(x)) return true;
        if (f->var == x) return false;  // anchor shadows
        return content_sensitive(f->kids[0], x, refy);
      case FKind::AllContent:
      case FKind::SomeContent:
        if (f->e1 && f->e1->kind == TermKind::Var && f->e1->name == x)
          return false;  // the cell's content is re-quantified
        if (f->e1 && free_vars(f->e1).count(x)) return true;
        return content_sensitive(f->kids[0], x, refy);
      case FKind::Forall:
      case FKind::Exists:
      case FKind::Nu:
      case FKind::NuBar:
        if (f->var == x) return false;
        return content_sensitive(f->kids[0], x, refy);
      default:
        for (const auto& k : f->kids)
          if (content_sensitive(k, x, refy)) return true;
        return false;
    }
  }

  // ---- candidate machinery --------------------------------------------

  struct Candidate {
    Model m;
  };

  static Model bind_var(const Model& m, const std::string& x, const TermPtr& v) {
    Model m2 = m;
    m2.env[x] = v;
    return m2;
  }

  Verdict combine_forall(const std::vector<Candidate>& cands, const FormulaPtr& body,
                         bool complete, const std::string& what) {
    std::optional<Verdict> unknown;
    for (const auto& c : cands) {
      Verdict v = go(c.m, body);
      if (v.v == VKind::False) return v;
      if (v.v == VKind::Unknown && !unknown) unknown = v;
    }
    if (unknown) return *unknown;
    if (complete) return v_true();
    return v_unknown("enumeration truncated for " + what);
  }

  Verdict combine_exists(const std::vector<Candidate>& cands, const FormulaPtr& body,
                         bool complete, const std::string& what) {
    std::optional<Verdict> unknown;
    for (const auto& c : cands) {
      Verdict v = go(c.m, body);
      if (v.v == VKind::True) return v;
      if (v.v == VKind::Unknown && !unknown) unknown = v;
    }
    if (unknown) return *unknown;
    if (complete) return v_false();
    return v_unknown("enumeration truncated for " + what);
  }

  // Fresh-cell candidates for a Ref-typed binder. `hidden_cell` distinguishes
  // quantifier witnesses (allocation yields a hidden label) from nu-garbage
  // extensions (the label stays visible in the extended model). Sets
  // `complete` to whether the fresh-cell contents were covered.
  std::vector<Candidate> fresh_cell_candidates(const Model& m, const std::string& x,
                                               const TypePtr& ct, const FormulaPtr& body,
                                               bool hidden_cell, bool& complete) {
    std::vector<Candidate> out;
    complete = false;
    if (!ct || b.extra_labels <= 0) return out;
    std::vector<TermPtr> contents;
    bool sens = content_sensitive(body, x, type_mentions_ref(ct));
    if (sens) {
      UniverseSet cu = universe(m, ct, b.value_depth);
      contents = cu.vals;
      complete = cu.complete;
    } else {
      TermPtr d = default_value(m, ct, b.value_depth);
      if (!d) {
        UniverseSet cu = universe(m, ct, b.value_depth);
        if (!cu.vals.empty()) d = cu.vals.front();
      }
      if (d) {
        contents = {d};
        complete = true;  // content cannot influence the body
      }
    }
    for (const auto& v : contents) {
      Model m2 = m;
      int lf = smallest_fresh_label(m2.store);
      m2.store[lf] = v;
      m2.labtypes[lf] = ct;
      if (hidden_cell) m2.hidden.insert(lf);
      m2.env[x] = m_loc(lf);
      out.push_back({std::move(m2)});
    }
    if (out.empty()) complete = false;
    return out;
  }

  // ---- satisfaction ----------------------------------------------------

  Verdict go(const Model& m, const FormulaPtr& f) {
    try {
      return eval(m, f);
    } catch (const std::exception& e) {
      return v_unknown(e.what());
    }
  }

  Verdict eval(const Model& m, const FormulaPtr& f) {
    switch (f->kind) {
      case FKind::Eq: {
        TermPtr v1 = interpret_term(m, f->e1);
        TermPtr v2 = interpret_term(m, f->e2);
        bool closures = has_closure(v1) || has_closure(v2);
        if (alpha_eq(v1, v2)) return v_true();
        if (!closures) return v_false();
        return v_unknown("equality between arrow-typed values");
      }
      case FKind::Not: {
        Verdict v = go(m, f->kids[0]);
        if (v.v == VKind::True) return v_false();
        if (v.v == VKind::False) return v_true();
        return v;
      }
      case FKind::And: {
        Verdict a = go(m, f->kids[0]);
        if (a.v == VKind::False) return a;
        Verdict c = go(m, f->kids[1]);
        if (c.v == VKind::False) return c;
        if (a.v == VKind::Unknown) return a;
        if (c.v == VKind::Unknown) return c;
        return v_true();
      }
      case FKind::Or: {
        Verdict a = go(m, f->kids[0]);
        if (a.v == VKind::True) return a;
        Verdict c = go(m, f->kids[1]);
        if (c.v == VKind::True) return c;
        if (a.v == VKind::Unknown) return a;
        if (c.v == VKind::Unknown) return c;
        return v_false();
      }
      case FKind::Implies: {
        Verdict a = go(m, f->kids[0]);
        if (a.v == VKind::False) return v_true();
        Verdict c = go(m, f->kids[1]);
        if (c.v == VKind::True) return c;
        if (a.v == VKind::Unknown || c.v == VKind::Unknown)
          return a.v == VKind::Unknown ? a : c;
        return v_false();
      }
      case FKind::Forall:
      case FKind::Exists: {
        bool is_all = f->kind == FKind::Forall;
        TypePtr t = f->type ? f->type : infer_binder_type(model_env(m), f);
        if (!t)
          return v_unknown("cannot infer the type of bound variable " + f->var);
        UniverseSet u = universe(m, t, b.value_depth);
        std::vector<Candidate> cands;
        for (const auto& v : u.vals) cands.push_back({bind_var(m, f->var, v)});
        bool complete = u.complete;
        if (t->kind == TypeKind::Ref) {
          bool fresh_complete = false;
          auto fresh = fresh_cell_candidates(m, f->var, t->a, f->kids[0],
                                             /*hidden_cell=*/true, fresh_complete);
          for (auto& c : fresh) cands.push_back(std::move(c));
          complete = complete && fresh_complete;
        }
        return is_all ? combine_forall(cands, f->kids[0], complete, f->var + ":" + print_type(t))
                      : combine_exists(cands, f->kids[0], complete, f->var + ":" + print_type(t));
      }
      case FKind::ForallTy:
      case FKind::ExistsTy: {
        std::vector<TypePtr> insts = {t_unit(), t_bool(), t_nat(), t_ref(t_nat())};
        std::optional<Verdict> unknown;
        for (const auto& t : insts) {
          Verdict v = go(m, subst_tyvar(f->kids[0], t, f->var));
          if (f->kind == FKind::ForallTy && v.v == VKind::False) return v;
          if (f->kind == FKind::ExistsTy && v.v == VKind::True) return v;
          if (v.v == VKind::Unknown && !unknown) unknown = v;
        }
        if (unknown) return *unknown;
        return v_unknown("type quantification is never exhaustively enumerable");
      }
      case FKind::Nu:
      case FKind::NuBar: {
        TypePtr t = f->type ? f->type : infer_binder_type(model_env(m), f);
        if (t && t->kind != TypeKind::Ref)
          return v_unknown("hiding quantifier over non-reference type");
        std::vector<Candidate> cands;
        for (int l : m.hidden) {
          if (t) {
            TypePtr ct = content_type_of(m, l);
            if (ct && !type_equal(ct, t->a)) continue;
          }
          Model m2 = m;
          m2.hidden.erase(l);
          m2.env[f->var] = m_loc(l);
          if (t && !m2.labtypes.count(l)) m2.labtypes[l] = t->a;
          cands.push_back({std::move(m2)});
        }
        bool fresh_complete = false;
        if (t) {
          auto fresh = fresh_cell_candidates(m, f->var, t->a, f->kids[0],
                                             /*hidden_cell=*/false, fresh_complete);
          for (auto& c : fresh) cands.push_back(std::move(c));
        }
        bool complete = t != nullptr && fresh_complete;
        std::string what = "hidden name " + f->var;
        return f->kind == FKind::Nu ? combine_exists(cands, f->kids[0], complete, what)
                                    : combine_forall(cands, f->kids[0], complete, what);
      }
      case FKind::AllContent:
      case FKind::SomeContent: {
        if (f->e1->kind != TermKind::Var)
          return v_unknown("content quantification over a non-variable subject");
        TermPtr v = interpret_term(m, f->e1);
        if (v->kind != TermKind::Loc)
          return v_unknown("content-quantification subject is not a reference");
        TypePtr ct = content_type_of(m, v->label);
        if (!ct) return v_unknown("unknown content type of label");
        UniverseSet u = universe(m, ct, b.value_depth);
        std::vector<Candidate> cands;
        for (const auto& w : u.vals)
          cands.push_back({model_update_label(m, v->label, w)});
        std::string what = "contents of " + f->e1->name;
        return f->kind == FKind::AllContent
                   ? combine_forall(cands, f->kids[0], u.complete, what)
                   : combine_exists(cands, f->kids[0], u.complete, what);
      }
      case FKind::Eval:
        return eval_formula(m, f);
      case FKind::Always: {
        if (classify_stateless(f->kids[0]) == Classification::Proven) {
          Verdict v = go(m, f->kids[0]);
          if (v.v == VKind::True) return v;  // stateless: C == box C
        }
        return v_unknown("necessity over a non-stateless body");
      }
      case FKind::Someday: {
        Verdict v = go(m, f->kids[0]);
        if (v.v == VKind::True) return v;  // the current state is reachable
        return v_unknown("possibility is not enumerable");
      }
      case FKind::Reach:
        return reachable_in_model(m, f->e1, f->e2) ? v_true() : v_false();
      case FKind::NotReach:
        return reachable_in_model(m, f->e1, f->e2) ? v_false() : v_true();
      case FKind::Meta:
        return v_unknown("schema metavariable " + f->meta);
    }
    return v_unknown("unhandled formula");
  }

  Verdict eval_formula(const Model& m, const FormulaPtr& f) {
    Model m0 = m;
    m0.env.erase(f->var);
    // save effect-cell contents before running (located form)
    std::vector<std::pair<int, TermPtr>> saved;
    if (f->located) {
      for (const auto& e : f->effects) {
        TermPtr l = interpret_term(m, e);
        if (l->kind != TermKind::Loc)
          return v_unknown("effect-set entry is not a reference");
        auto it = m.store.find(l->label);
        if (it == m.store.end()) return v_unknown("effect-set entry is dangling");
        saved.emplace_back(l->label, it->second);
      }
    }
    auto ext = model_extend(m0, f->var, m_app(f->e1, f->e2), b.fuel);
    if (!ext) return v_unknown("evaluation budget exhausted");
    Verdict vc = go(*ext, f->kids[0]);
    if (!f->located) return vc;
    if (vc.v == VKind::False) return vc;
    Model restored = *ext;
    for (const auto& [l, v] : saved) restored.store[l] = v;
    restored.env[f->var] = m_unit();
    Model base = m0;
    base.env[f->var] = m_unit();
    if (model_equiv_approx(restored, base) != Approx::Equal)
      return v_unknown("write effects outside the declared effect set");
    return vc;
  }
};

}  // namespace

Verdict satisfies(const Model& m, const FormulaPtr& f, const Bounds& b) {
  Sat s{b};
  return s.go(m, desugar(f));
}

Verdict check_judgement_on_model(const Model& m, const Judgement& j, const Bounds& b) {
  Sat s{b};
  Verdict pre = s.go(m, desugar(j.pre));
  if (pre.v != VKind::True)
    return v_unknown("precondition not established on this model");
  Model m0 = m;
  m0.env.erase(j.anchor);
  std::vector<std::pair<int, TermPtr>> saved;
  if (j.located) {
    try {
      for (const auto& e : j.effects) {
        TermPtr l = interpret_term(m, e);
        if (l->kind != TermKind::Loc)
          return v_unknown("effect-set entry is not a reference");
        auto it = m.store.find(l->label);
        if (it == m.store.end()) return v_unknown("effect-set entry is dangling");
        saved.emplace_back(l->label, it->second);
      }
    } catch (const std::exception& e) {
      return v_unknown(e.what());
    }
  }
  std::optional<Model> ext;
  try {
    ext = model_extend(m0, j.anchor, j.program, b.fuel);
  } catch (const std::exception& e) {
    return v_unknown(e.what());
  }
  if (!ext) return v_unknown("evaluation budget exhausted");
  Verdict post = s.go(*ext, desugar(j.post));
  if (!j.located) return post;
  if (post.v == VKind::False) return post;
  Model restored = *ext;
  for (const auto& [l, v] : saved) restored.store[l] = v;
  restored.env[j.anchor] = m_unit();
  Model base = m0;
  base.env[j.anchor] = m_unit();
  if (model_equiv_approx(restored, base) != Approx::Equal)
    return v_unknown("write effects outside the declared effect set");
  return post;
}

namespace {

TermPtr random_value_of(const Model& m, const TypePtr& t, std::mt19937_64& rng, int depth) {
  auto rnd = [&](int n) { return n <= 0 ? 0 : (int)(rng() % (std::uint64_t)n); };
  if (!t || depth <= 0) return nullptr;
  switch (t->kind) {
    case TypeKind::Unit: return m_unit();
    case TypeKind::Bool: return m_bool(rnd(2) == 1);
    case TypeKind::Nat: return m_nat(rnd(9));
    case TypeKind::Prod: {
      TermPtr a = random_value_of(m, t->a, rng, depth - 1);
      TermPtr c = random_value_of(m, t->b, rng, depth - 1);
      return (a && c) ? m_pair(a, c) : nullptr;
    }
    case TypeKind::Sum: {
      int side = rnd(2);
      TermPtr a = random_value_of(m, side ? t->b : t->a, rng, depth - 1);
      return a ? m_inj(side ? 2 : 1, a, t) : nullptr;
    }
    case TypeKind::Ref: {
      std::vector<int> matching;
      for (const auto& [l, v] : m.store) {
        auto it = m.labtypes.find(l);
        if (it != m.labtypes.end() && type_equal(it->second, t->a)) matching.push_back(l);
      }
      if (matching.empty()) return nullptr;
      return m_loc(matching[rnd((int)matching.size())]);
    }
    default: {
      Env env = model_env(m);
      std::vector<TermPtr> found;
      for (const auto& [x, v] : m.env) {
        try {
          if (type_equal(typecheck_term(env, v), t)) found.push_back(v);
        } catch (const std::exception&) {
        }
      }
      if (found.empty()) return nullptr;
      return found[rnd((int)found.size())];
    }
  }
}

}  // namespace

Model gen_random_model(std::uint64_t seed, const GenParams& p) {
  std::mt19937_64 rng(seed);
  auto rnd = [&](int n) { return n <= 0 ? 0 : (int)(rng() % (std::uint64_t)n); };
  Model m;
  int nl = 1 + rnd(std::max(1, p.max_labels));
  std::vector<TypePtr> cts(nl);
  for (int i = 0; i < nl; i++) {
    if (i == 0) {
      cts[i] = t_nat();  // guarantees Ref(Nat) contents have a target
      continue;
    }
    int k = rnd(10);
    if (k < 4) cts[i] = t_nat();
    else if (k < 7) cts[i] = t_bool();
    else if (k < 9) cts[i] = t_ref(t_nat());
    else cts[i] = t_prod(t_nat(), t_bool());
  }
  std::vector<int> nat_labels;
  for (int i = 0; i < nl; i++)
    if (cts[i]->kind == TypeKind::Nat) nat_labels.push_back(i);
  std::function<TermPtr(const TypePtr&, int)> rv = [&](const TypePtr& t, int d) -> TermPtr {
    switch (t->kind) {
      case TypeKind::Nat: return m_nat(rnd(9));
      case TypeKind::Bool: return m_bool(rnd(2) == 1);
      case TypeKind::Unit: return m_unit();
      case TypeKind::Ref: return m_loc(nat_labels[rnd((int)nat_labels.size())]);
      case TypeKind::Prod: return m_pair(rv(t->a, d - 1), rv(t->b, d - 1));
      default: return m_nat(0);
    }
  };
  for (int i = 0; i < nl; i++) {
    m.store[i] = rv(cts[i], p.value_depth);
    m.labtypes[i] = cts[i];
  }
  int nv = rnd(p.max_env_vars + 1);
  for (int i = 0; i < nv; i++) {
    std::string x = "v" + std::to_string(i);
    int k = rnd(p.closures ? 7 : 4);
    switch (k) {
      case 0: m.env[x] = m_nat(rnd(9)); break;
      case 1: m.env[x] = m_bool(rnd(2) == 1); break;
      case 2: m.env[x] = m_loc(rnd(nl)); break;
      case 3: m.env[x] = m_pair(m_nat(rnd(9)), m_loc(rnd(nl))); break;
      case 4:  // pure arithmetic closure
        m.env[x] = m_lam("a", t_nat(), m_op("add", {m_var("a"), m_nat(rnd(5))}));
        break;
      case 5: {  // reader closure over some cell
        int l = rnd(nl);
        if (cts[l]->kind == TypeKind::Ref) l = nat_labels[0];
        m.env[x] = m_lam("a", t_unit(), m_deref(m_loc(l)));
        break;
      }
      case 6: {  // writer closure over a Nat cell
        int l = nat_labels[rnd((int)nat_labels.size())];
        m.env[x] = m_lam("a", t_nat(),
                         m_app(m_lam("b", t_unit(), m_var("a")),
                               m_assign(m_loc(l), m_var("a"))));
        break;
      }
    }
  }
  for (int i = 0; i < nl; i++)
    if (rnd(3) == 0) m.hidden.insert(i);
  return m;
}

RefuteResult refute(const FormulaPtr& f, const Bounds& b, int trials, std::uint64_t seed,
                    const GenParams& p) {
  FormulaPtr fd = desugar(f);
  std::set<std::string> fvs = formula_free_vars(fd);
  std::set<std::string> ftvs = formula_free_tyvars(fd);
  for (int t = 0; t < trials; t++) {
    std::uint64_t s = seed + 0x9e3779b97f4a7c15ULL * (std::uint64_t)(t + 1);
    Model m = gen_random_model(s, p);
    std::mt19937_64 rng(s ^ 0x5851f42d4c957f2dULL);
    FormulaPtr g = fd;
    for (const auto& X : ftvs) {
      std::vector<TypePtr> pool = {t_nat(), t_bool(), t_unit(), t_ref(t_nat())};
      g = subst_tyvar(g, pool[rng() % pool.size()], X);
    }
    bool ok = true;
    for (const auto& x : fvs) {
      TypePtr tx = nullptr;
      try {
        tx = infer_binder_type(model_env(m), f_forall(x, nullptr, g));
      } catch (const std::exception&) {
      }
      TermPtr v = nullptr;
      if (tx) v = random_value_of(m, tx, rng, 3);
      if (!v && !m.env.empty()) {
        // fall back to an arbitrary existing binding
        auto it = m.env.begin();
        std::advance(it, rng() % m.env.size());
        v = it->second;
      }
      if (!v) v = m_nat(rng() % 9);
      if (!v) { ok = false; break; }
      m.env[x] = v;
    }
    if (!ok) continue;
    Verdict vd = satisfies(m, g, b);
    if (vd.v == VKind::False) return {m, t + 1};
  }
  return {std::nullopt, trials};
}

}  // namespace lsl
