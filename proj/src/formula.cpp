#include "lsl/formula.hpp"

#include <sstream>
#include <stdexcept>

namespace lsl {

bool is_logic_term(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Var:
    case TermKind::Const:
    case TermKind::Loc:
      return true;
    case TermKind::Op:
    case TermKind::Pair:
    case TermKind::Inj:
    case TermKind::Deref:
    case TermKind::Proj: {
      for (const auto& k : t->kids)
        if (!is_logic_term(k)) return false;
      return true;
    }
    default:
      return false;
  }
}

namespace {

FormulaPtr mk(Formula f) { return std::make_shared<const Formula>(std::move(f)); }

}  // namespace

FormulaPtr f_eq(TermPtr a, TermPtr b) {
  Formula f;
  f.kind = FKind::Eq;
  f.e1 = std::move(a);
  f.e2 = std::move(b);
  return mk(std::move(f));
}
FormulaPtr f_not(FormulaPtr c) {
  Formula f;
  f.kind = FKind::Not;
  f.kids = {std::move(c)};
  return mk(std::move(f));
}
FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
  Formula f;
  f.kind = FKind::And;
  f.kids = {std::move(a), std::move(b)};
  return mk(std::move(f));
}
FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
  Formula f;
  f.kind = FKind::Or;
  f.kids = {std::move(a), std::move(b)};
  return mk(std::move(f));
}
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
  Formula f;
  f.kind = FKind::Implies;
  f.kids = {std::move(a), std::move(b)};
  return mk(std::move(f));
}

namespace {
FormulaPtr binder(FKind k, std::string x, TypePtr t, FormulaPtr c) {
  Formula f;
  f.kind = k;
  f.var = std::move(x);
  f.type = std::move(t);
  f.kids = {std::move(c)};
  return mk(std::move(f));
}
}  // namespace

FormulaPtr f_forall(std::string x, TypePtr t, FormulaPtr c) {
  return binder(FKind::Forall, std::move(x), std::move(t), std::move(c));
}
FormulaPtr f_exists(std::string x, TypePtr t, FormulaPtr c) {
  return binder(FKind::Exists, std::move(x), std::move(t), std::move(c));
}
FormulaPtr f_forall_ty(std::string X, FormulaPtr c) {
  return binder(FKind::ForallTy, std::move(X), nullptr, std::move(c));
}
FormulaPtr f_exists_ty(std::string X, FormulaPtr c) {
  return binder(FKind::ExistsTy, std::move(X), nullptr, std::move(c));
}
FormulaPtr f_nu(std::string x, TypePtr t, FormulaPtr c) {
  return binder(FKind::Nu, std::move(x), std::move(t), std::move(c));
}
FormulaPtr f_nubar(std::string x, TypePtr t, FormulaPtr c) {
  return binder(FKind::NuBar, std::move(x), std::move(t), std::move(c));
}
FormulaPtr f_allcontent(TermPtr e, FormulaPtr c) {
  Formula f;
  f.kind = FKind::AllContent;
  f.e1 = std::move(e);
  f.kids = {std::move(c)};
  return mk(std::move(f));
}
FormulaPtr f_somecontent(TermPtr e, FormulaPtr c) {
  Formula f;
  f.kind = FKind::SomeContent;
  f.e1 = std::move(e);
  f.kids = {std::move(c)};
  return mk(std::move(f));
}
FormulaPtr f_eval(TermPtr fn, TermPtr a, std::string z, FormulaPtr c) {
  Formula f;
  f.kind = FKind::Eval;
  f.e1 = std::move(fn);
  f.e2 = std::move(a);
  f.var = std::move(z);
  f.kids = {std::move(c)};
  return mk(std::move(f));
}
FormulaPtr f_eval_at(TermPtr fn, TermPtr a, std::string z, FormulaPtr c,
                     std::vector<TermPtr> effects) {
  Formula f;
  f.kind = FKind::Eval;
  f.e1 = std::move(fn);
  f.e2 = std::move(a);
  f.var = std::move(z);
  f.kids = {std::move(c)};
  f.located = true;
  f.effects = std::move(effects);
  return mk(std::move(f));
}
FormulaPtr f_always(FormulaPtr c) {
  Formula f;
  f.kind = FKind::Always;
  f.kids = {std::move(c)};
  return mk(std::move(f));
}
FormulaPtr f_someday(FormulaPtr c) {
  Formula f;
  f.kind = FKind::Someday;
  f.kids = {std::move(c)};
  return mk(std::move(f));
}
FormulaPtr f_reach(TermPtr a, TermPtr b) {
  Formula f;
  f.kind = FKind::Reach;
  f.e1 = std::move(a);
  f.e2 = std::move(b);
  return mk(std::move(f));
}
FormulaPtr f_notreach(TermPtr a, TermPtr b) {
  Formula f;
  f.kind = FKind::NotReach;
  f.e1 = std::move(a);
  f.e2 = std::move(b);
  return mk(std::move(f));
}
FormulaPtr f_meta(std::string name) {
  Formula f;
  f.kind = FKind::Meta;
  f.meta = std::move(name);
  return mk(std::move(f));
}

FormulaPtr f_false() {
  static FormulaPtr f = f_not(f_eq(m_nat(1), m_nat(1)));
  return f;
}
FormulaPtr f_true() {
  static FormulaPtr t = f_not(f_false());
  return t;
}
bool is_false(const FormulaPtr& f) {
  return f->kind == FKind::Not && is_true(f->kids[0]);
}
bool is_true(const FormulaPtr& f) {
  if (f->kind == FKind::Not && f->kids[0]->kind == FKind::Not)
    return is_true(f->kids[0]->kids[0]);
  // T = ~(1 != 1) = ~~(1 = 1); the even-negation base case:
  if (f->kind == FKind::Eq)
    return f->e1->kind == TermKind::Const && alpha_eq(f->e1, f->e2);
  return false;
}

namespace {

void ffv(const FormulaPtr& f, std::set<std::string>& bound, std::set<std::string>& out) {
  auto term = [&](const TermPtr& t) {
    if (!t) return;
    for (const auto& x : free_vars(t))
      if (!bound.count(x)) out.insert(x);
  };
  term(f->e1);
  term(f->e2);
  for (const auto& e : f->effects) term(e);
  switch (f->kind) {
    case FKind::Forall:
    case FKind::Exists:
    case FKind::Nu:
    case FKind::NuBar:
    case FKind::Eval: {
      // Eval binds the anchor in its body only; e1/e2/effects handled above.
      bool added = bound.insert(f->var).second;
      for (const auto& k : f->kids) ffv(k, bound, out);
      if (added) bound.erase(f->var);
      return;
    }
    default:
      for (const auto& k : f->kids) ffv(k, bound, out);
      return;
  }
}

void term_ftv(const TermPtr& t, std::set<std::string>& out) {
  if (!t) return;
  if (t->type) {
    auto s = free_type_vars(t->type);
    out.insert(s.begin(), s.end());
  }
  for (const auto& k : t->kids) term_ftv(k, out);
}

void fftv(const FormulaPtr& f, std::set<std::string>& bound, std::set<std::string>& out) {
  auto add_ty = [&](const TypePtr& t) {
    if (!t) return;
    for (const auto& X : free_type_vars(t))
      if (!bound.count(X)) out.insert(X);
  };
  std::set<std::string> raw;
  term_ftv(f->e1, raw);
  term_ftv(f->e2, raw);
  for (const auto& e : f->effects) term_ftv(e, raw);
  for (const auto& X : raw)
    if (!bound.count(X)) out.insert(X);
  add_ty(f->type);
  if (f->kind == FKind::ForallTy || f->kind == FKind::ExistsTy) {
    bool added = bound.insert(f->var).second;
    for (const auto& k : f->kids) fftv(k, bound, out);
    if (added) bound.erase(f->var);
    return;
  }
  for (const auto& k : f->kids) fftv(k, bound, out);
}

}  // namespace

std::set<std::string> formula_free_vars(const FormulaPtr& f) {
  std::set<std::string> bound, out;
  ffv(f, bound, out);
  return out;
}

std::set<std::string> formula_free_tyvars(const FormulaPtr& f) {
  std::set<std::string> bound, out;
  fftv(f, bound, out);
  return out;
}

namespace {

// Alpha-equivalence with a bidirectional renaming of term binders. Type
// binders are compared by name (corpus formulae use matching names).
bool faeq(const FormulaPtr& a, const FormulaPtr& b, std::map<std::string, std::string>& ab,
          std::map<std::string, std::string>& ba);

bool term_aeq_ren(const TermPtr& a, const TermPtr& b, std::map<std::string, std::string>& ab,
                  std::map<std::string, std::string>& ba) {
  if (a->kind == TermKind::Var && b->kind == TermKind::Var) {
    auto it = ab.find(a->name);
    if (it != ab.end()) return it->second == b->name;
    if (ba.count(b->name)) return false;
    return a->name == b->name;
  }
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TermKind::Const:
      return a->cval == b->cval;
    case TermKind::Loc:
      return a->label == b->label;
    case TermKind::Op:
      if (a->name != b->name) return false;
      break;
    case TermKind::Inj:
    case TermKind::Proj:
      if (a->idx != b->idx) return false;
      break;
    default:
      break;
  }
  if (a->kids.size() != b->kids.size()) return false;
  for (size_t i = 0; i < a->kids.size(); i++)
    if (!term_aeq_ren(a->kids[i], b->kids[i], ab, ba)) return false;
  return true;
}

bool faeq(const FormulaPtr& a, const FormulaPtr& b, std::map<std::string, std::string>& ab,
          std::map<std::string, std::string>& ba) {
  if (a->kind != b->kind) return false;
  if (a->kind == FKind::Meta) return a->meta == b->meta;
  auto terms_ok = [&]() {
    if (!!a->e1 != !!b->e1 || !!a->e2 != !!b->e2) return false;
    if (a->e1 && !term_aeq_ren(a->e1, b->e1, ab, ba)) return false;
    if (a->e2 && !term_aeq_ren(a->e2, b->e2, ab, ba)) return false;
    if (a->located != b->located || a->effects.size() != b->effects.size()) return false;
    for (size_t i = 0; i < a->effects.size(); i++)
      if (!term_aeq_ren(a->effects[i], b->effects[i], ab, ba)) return false;
    return true;
  };
  if (!terms_ok()) return false;
  if (a->kids.size() != b->kids.size()) return false;

  bool term_binder = a->kind == FKind::Forall || a->kind == FKind::Exists ||
                     a->kind == FKind::Nu || a->kind == FKind::NuBar || a->kind == FKind::Eval;
  if (term_binder) {
    if ((a->kind == FKind::Forall || a->kind == FKind::Exists)) {
      if (!!a->type != !!b->type) return false;
      if (a->type && !type_equal(a->type, b->type)) return false;
    }
    auto sab = ab.find(a->var) == ab.end() ? std::optional<std::string>() : ab[a->var];
    auto sba = ba.find(b->var) == ba.end() ? std::optional<std::string>() : ba[b->var];
    ab[a->var] = b->var;
    ba[b->var] = a->var;
    bool r = faeq(a->kids[0], b->kids[0], ab, ba);
    if (sab)
      ab[a->var] = *sab;
    else
      ab.erase(a->var);
    if (sba)
      ba[b->var] = *sba;
    else
      ba.erase(b->var);
    return r;
  }
  if (a->kind == FKind::ForallTy || a->kind == FKind::ExistsTy) {
    if (a->var != b->var) return false;
  }
  for (size_t i = 0; i < a->kids.size(); i++)
    if (!faeq(a->kids[i], b->kids[i], ab, ba)) return false;
  return true;
}

}  // namespace

bool formula_alpha_eq(const FormulaPtr& a, const FormulaPtr& b) {
  std::map<std::string, std::string> ab, ba;
  return faeq(a, b, ab, ba);
}

namespace {

// Precedence: 1 => (right) | binders/prefix bodies; 2 |; 3 &; 4 atoms.
void pf(std::ostringstream& os, const FormulaPtr& f, int prec) {
  auto wrap = [&](int my, auto body) {
    if (prec > my) os << "(";
    body();
    if (prec > my) os << ")";
  };
  if (is_true(f)) {
    os << "T";
    return;
  }
  if (is_false(f)) {
    os << "F";
    return;
  }
  switch (f->kind) {
    case FKind::Eq:
      os << print_term(f->e1) << " = " << print_term(f->e2);
      return;
    case FKind::Reach:
      os << print_term(f->e1) << " ~> " << print_term(f->e2);
      return;
    case FKind::NotReach:
      os << print_term(f->e1) << " # " << print_term(f->e2);
      return;
    case FKind::Not:
      // e1 != e2 sugar
      if (f->kids[0]->kind == FKind::Eq) {
        os << print_term(f->kids[0]->e1) << " != " << print_term(f->kids[0]->e2);
        return;
      }
      os << "~";
      pf(os, f->kids[0], 4);
      return;
    case FKind::And:
      wrap(3, [&] {
        pf(os, f->kids[0], 3);
        os << " & ";
        pf(os, f->kids[1], 4);
      });
      return;
    case FKind::Or:
      wrap(2, [&] {
        pf(os, f->kids[0], 2);
        os << " | ";
        pf(os, f->kids[1], 3);
      });
      return;
    case FKind::Implies:
      wrap(1, [&] {
        pf(os, f->kids[0], 2);
        os << " => ";
        pf(os, f->kids[1], 1);
      });
      return;
    case FKind::Forall:
    case FKind::Exists:
      wrap(1, [&] {
        os << (f->kind == FKind::Forall ? "all " : "ex ") << f->var;
        if (f->type) os << ":" << print_type(f->type);
        os << ". ";
        pf(os, f->kids[0], 1);
      });
      return;
    case FKind::ForallTy:
    case FKind::ExistsTy:
      wrap(1, [&] {
        os << (f->kind == FKind::ForallTy ? "all " : "ex ") << f->var << ". ";
        pf(os, f->kids[0], 1);
      });
      return;
    case FKind::Nu:
    case FKind::NuBar:
      wrap(1, [&] {
        os << (f->kind == FKind::Nu ? "nu " : "nubar ") << f->var;
        if (f->type) os << ":" << print_type(f->type);
        os << ". ";
        pf(os, f->kids[0], 1);
      });
      return;
    case FKind::AllContent:
      os << "[!" << print_term(f->e1) << "]";
      pf(os, f->kids[0], 4);
      return;
    case FKind::SomeContent:
      os << "<!" << print_term(f->e1) << ">";
      pf(os, f->kids[0], 4);
      return;
    case FKind::Always:
      os << "box ";
      pf(os, f->kids[0], 4);
      return;
    case FKind::Someday:
      os << "dia ";
      pf(os, f->kids[0], 4);
      return;
    case FKind::Eval: {
      os << print_term(f->e1) << " . " << print_term(f->e2) << " = " << f->var << " {";
      pf(os, f->kids[0], 0);
      os << "}";
      if (f->located) {
        os << " @ [";
        for (size_t i = 0; i < f->effects.size(); i++) {
          if (i) os << ", ";
          os << print_term(f->effects[i]);
        }
        os << "]";
      }
      return;
    }
    case FKind::Meta:
      os << "?" << f->meta;
      return;
  }
}

}  // namespace

std::string print_formula(const FormulaPtr& f) {
  std::ostringstream os;
  pf(os, f, 0);
  return os.str();
}

TermPtr term_subst_var(const TermPtr& t, const TermPtr& e, const std::string& x) {
  if (t->kind == TermKind::Var) return t->name == x ? e : t;
  bool changed = false;
  std::vector<TermPtr> kids;
  for (const auto& k : t->kids) {
    TermPtr r = term_subst_var(k, e, x);
    changed |= (r != k);
    kids.push_back(r);
  }
  if (!changed) return t;
  auto t2 = std::make_shared<Term>(*t);
  t2->kids = std::move(kids);
  return t2;
}

namespace {

FormulaPtr rebuild(const Formula& proto, std::vector<FormulaPtr> kids, TermPtr e1, TermPtr e2,
                   std::vector<TermPtr> effects) {
  Formula f = proto;
  f.kids = std::move(kids);
  f.e1 = std::move(e1);
  f.e2 = std::move(e2);
  f.effects = std::move(effects);
  return mk(std::move(f));
}

FormulaPtr sv(const FormulaPtr& f, const TermPtr& e, const std::string& x) {
  bool term_binder = f->kind == FKind::Forall || f->kind == FKind::Exists ||
                     f->kind == FKind::Nu || f->kind == FKind::NuBar || f->kind == FKind::Eval;
  auto st = [&](const TermPtr& t) { return t ? term_subst_var(t, e, x) : t; };
  TermPtr e1 = st(f->e1);
  TermPtr e2 = st(f->e2);
  std::vector<TermPtr> eff;
  for (const auto& t : f->effects) eff.push_back(st(t));

  if (term_binder) {
    if (f->var == x) {
      // Bound occurrence shadows; only the non-body terms are substituted.
      return rebuild(*f, f->kids, e1, e2, eff);
    }
    if (free_vars(e).count(f->var)) {
      std::set<std::string> avoid = free_vars(e);
      auto bodyfv = formula_free_vars(f->kids[0]);
      avoid.insert(bodyfv.begin(), bodyfv.end());
      avoid.insert(x);
      std::string fresh = fresh_name(f->var, avoid);
      FormulaPtr body = sv(f->kids[0], m_var(fresh), f->var);
      Formula f2 = *f;
      f2.var = fresh;
      f2.kids = {sv(body, e, x)};
      f2.e1 = e1;
      f2.e2 = e2;
      f2.effects = eff;
      return mk(std::move(f2));
    }
    return rebuild(*f, {sv(f->kids[0], e, x)}, e1, e2, eff);
  }
  std::vector<FormulaPtr> kids;
  for (const auto& k : f->kids) kids.push_back(sv(k, e, x));
  return rebuild(*f, std::move(kids), e1, e2, eff);
}

TermPtr td(const TermPtr& t, const TermPtr& e, const std::string& x) {
  if (t->kind == TermKind::Deref && t->kids[0]->kind == TermKind::Var && t->kids[0]->name == x)
    return e;
  bool changed = false;
  std::vector<TermPtr> kids;
  for (const auto& k : t->kids) {
    TermPtr r = td(k, e, x);
    changed |= (r != k);
    kids.push_back(r);
  }
  if (!changed) return t;
  auto t2 = std::make_shared<Term>(*t);
  t2->kids = std::move(kids);
  return t2;
}

FormulaPtr sd(const FormulaPtr& f, const TermPtr& e, const std::string& x) {
  bool term_binder = f->kind == FKind::Forall || f->kind == FKind::Exists ||
                     f->kind == FKind::Nu || f->kind == FKind::NuBar || f->kind == FKind::Eval;
  // Content quantification over x re-binds !x.
  if ((f->kind == FKind::AllContent || f->kind == FKind::SomeContent) &&
      f->e1->kind == TermKind::Var && f->e1->name == x)
    return f;
  if (term_binder && f->var == x) return f;
  auto st = [&](const TermPtr& t) { return t ? td(t, e, x) : t; };
  std::vector<TermPtr> eff;
  for (const auto& t : f->effects) eff.push_back(st(t));
  std::vector<FormulaPtr> kids;
  for (const auto& k : f->kids) kids.push_back(sd(k, e, x));
  return rebuild(*f, std::move(kids), st(f->e1), st(f->e2), std::move(eff));
}

}  // namespace

FormulaPtr subst_var(const FormulaPtr& f, const TermPtr& e, const std::string& x) {
  return sv(f, e, x);
}

FormulaPtr subst_deref(const FormulaPtr& f, const TermPtr& e, const std::string& x) {
  return sd(f, e, x);
}

FormulaPtr logical_subst(const FormulaPtr& f, const TermPtr& e2, const TermPtr& e1,
                         const Env& env) {
  std::set<std::string> avoid = formula_free_vars(f);
  auto v1 = free_vars(e1);
  auto v2 = free_vars(e2);
  avoid.insert(v1.begin(), v1.end());
  avoid.insert(v2.begin(), v2.end());
  std::string m = fresh_name("m", avoid);
  TypePtr t = typecheck_term(env, e2);
  return f_forall(m, t,
                  f_implies(f_eq(m_var(m), e2),
                            f_allcontent(e1, f_implies(f_eq(m_deref(e1), m_var(m)), f))));
}

}  // namespace lsl
