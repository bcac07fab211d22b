// Per-rule validation of proof scripts, the obligation discharge pipeline,
// and report rendering.

#include <algorithm>
#include <functional>
#include <sstream>

#include "json.hpp"
#include "lsl/parser.hpp"
#include "lsl/proof.hpp"

namespace lsl {

namespace detail {
std::pair<std::optional<std::string>, std::string> match_axiom_detail(const FormulaPtr& goal,
                                                                      const Env& env);
}

namespace {

using EffSet = std::set<std::string>;

FormulaPtr dsg(const FormulaPtr& f) { return desugar(f); }

bool feq(const FormulaPtr& a, const FormulaPtr& b) {
  return formula_alpha_eq(desugar(a), desugar(b));
}

FormulaPtr rename_anchor(const FormulaPtr& f, const std::string& from, const std::string& to) {
  if (from == to) return f;
  return subst_var(f, m_var(to), from);
}

EffSet eset(const std::vector<TermPtr>& es) {
  EffSet s;
  for (const auto& e : es) s.insert(print_term(e));
  return s;
}

EffSet eunion(const EffSet& a, const EffSet& b) {
  EffSet s = a;
  s.insert(b.begin(), b.end());
  return s;
}

std::string eff_str(const EffSet& s) {
  std::string out = "[";
  for (const auto& e : s) out += (out.size() > 1 ? ", " : "") + e;
  return out + "]";
}

void conjuncts_of(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
  if (f->kind == FKind::And) {
    conjuncts_of(f->kids[0], out);
    conjuncts_of(f->kids[1], out);
    return;
  }
  out.push_back(f);
}

FormulaPtr conj_of(const std::vector<FormulaPtr>& cs) {
  if (cs.empty()) return f_true();
  FormulaPtr r = cs[0];
  for (size_t i = 1; i < cs.size(); i++) r = f_and(r, cs[i]);
  return r;
}

// Matches the anchorless-judgement post `u = () & C'`, returning C'.
std::optional<FormulaPtr> strip_unit(const FormulaPtr& post_raw, const std::string& u) {
  FormulaPtr post = dsg(post_raw);
  FormulaPtr ueq = f_eq(m_var(u), m_unit());
  if (feq(post, ueq)) return f_true();
  if (post->kind == FKind::And) {
    if (feq(post->kids[0], ueq)) return post->kids[1];
    if (feq(post->kids[1], ueq)) return post->kids[0];
  }
  if (!formula_free_vars(post).count(u)) return post;
  return std::nullopt;
}

bool deref_free_term(const TermPtr& t) {
  if (t->kind == TermKind::Deref) return false;
  for (const auto& k : t->kids)
    if (!deref_free_term(k)) return false;
  return true;
}

struct RuleCtx {
  const ProofScript& sc;
  const ProofStep& st;
  std::vector<const ProofStep*> prems;
  Env env;  // script env + anchors of conclusion and premises
  std::vector<ObligationRecord>* obs;
  int obcount = 0;

  const Judgement& j() const { return st.j; }

  void oblige(const std::string& descr, const FormulaPtr& f) {
    ObligationRecord r;
    r.step = st.index;
    r.id = std::to_string(st.index) + "." + std::to_string(++const_cast<RuleCtx*>(this)->obcount);
    r.descr = descr;
    r.formula = dsg(f);
    obs->push_back(std::move(r));
  }
};

using Checker = std::function<std::string(RuleCtx&)>;

std::string need_prems(const RuleCtx& c, size_t n) {
  if (c.prems.size() != n)
    return "rule expects " + std::to_string(n) + " premise(s), got " +
           std::to_string(c.prems.size());
  return "";
}

// Effect-set discipline: all judgements in a rule instance are either located
// or unlocated together; returns an error string on mixed usage.
std::string located_uniform(const RuleCtx& c) {
  for (const auto* p : c.prems)
    if (p->j.located != c.j().located) return "located and unlocated judgements mixed";
  return "";
}

std::string eff_equal(const Judgement& a, const EffSet& want, const std::string& what) {
  if (!a.located) return "";
  if (eset(a.effects) != want)
    return "effect set mismatch: " + what + " (have " + eff_str(eset(a.effects)) + ", want " +
           eff_str(want) + ")";
  return "";
}

std::string thin_check(const RuleCtx& c, const FormulaPtr& f, const std::string& y,
                       const std::string& what) {
  if (classify_thin(dsg(f), y, c.env) != Classification::Proven)
    return what + " is not provably thin with respect to " + y;
  return "";
}

// ---------------------------------------------------------------------------
// Rule checkers
// ---------------------------------------------------------------------------

std::string chk_var(RuleCtx& c) {
  if (auto e = need_prems(c, 0); !e.empty()) return e;
  const Judgement& j = c.j();
  if (j.program->kind != TermKind::Var) return "program is not a variable";
  if (j.located && !j.effects.empty()) return "effect set must be empty";
  FormulaPtr want = subst_var(dsg(j.post), m_var(j.program->name), j.anchor);
  if (!feq(j.pre, want)) return "pre-condition is not C{x/u}";
  return "";
}

std::string chk_const(RuleCtx& c) {
  if (auto e = need_prems(c, 0); !e.empty()) return e;
  const Judgement& j = c.j();
  if (j.program->kind != TermKind::Const) return "program is not a constant";
  if (j.located && !j.effects.empty()) return "effect set must be empty";
  FormulaPtr want = subst_var(dsg(j.post), j.program, j.anchor);
  if (!feq(j.pre, want)) return "pre-condition is not C{c/u}";
  return "";
}

std::string chk_op(RuleCtx& c) {
  const Judgement& j = c.j();
  if (j.program->kind != TermKind::Op) return "program is not a first-order operation";
  size_t n = j.program->kids.size();
  if (auto e = need_prems(c, n); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  EffSet acc;
  std::vector<TermPtr> anchors;
  for (size_t i = 0; i < n; i++) {
    const Judgement& p = c.prems[i]->j;
    if (!alpha_eq(p.program, j.program->kids[i]))
      return "premise " + std::to_string(i + 1) + " is not about operand " +
             std::to_string(i + 1);
    anchors.push_back(m_var(p.anchor));
    if (i == 0) {
      if (!feq(p.pre, j.pre)) return "first premise pre-condition differs from the conclusion";
    } else if (!feq(p.pre, c.prems[i - 1]->j.post)) {
      return "premise " + std::to_string(i + 1) + " pre-condition does not chain";
    }
    acc = eunion(acc, eset(p.effects));
  }
  FormulaPtr want = subst_var(dsg(j.post), m_op(j.program->name, anchors), j.anchor);
  if (!feq(c.prems[n - 1]->j.post, want))
    return "last premise post-condition is not C'{op(m~)/u}";
  if (auto e = eff_equal(j, acc, "conclusion is not the premise union"); !e.empty()) return e;
  return "";
}

std::string chk_inj(RuleCtx& c, int idx) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (j.program->kind != TermKind::Inj || j.program->idx != idx)
    return "program is not an injection of the cited index";
  if (!alpha_eq(p.program, j.program->kids[0])) return "premise program mismatch";
  if (!feq(p.pre, j.pre)) return "premise pre-condition differs from the conclusion";
  FormulaPtr want =
      subst_var(dsg(j.post), m_inj(idx, m_var(p.anchor), j.program->type), j.anchor);
  if (!feq(p.post, want)) return "premise post-condition is not C'{inj(v)/u}";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  return "";
}

std::string chk_proj(RuleCtx& c, int idx) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (j.program->kind != TermKind::Proj || j.program->idx != idx)
    return "program is not a projection of the cited index";
  if (!alpha_eq(p.program, j.program->kids[0])) return "premise program mismatch";
  if (!feq(p.pre, j.pre)) return "premise pre-condition differs from the conclusion";
  FormulaPtr want = subst_var(dsg(j.post), m_proj(idx, m_var(p.anchor)), j.anchor);
  if (!feq(p.post, want)) return "premise post-condition is not C'{pi(m)/u}";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  return "";
}

std::string chk_pair(RuleCtx& c) {
  if (auto e = need_prems(c, 2); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement &p1 = c.prems[0]->j, &p2 = c.prems[1]->j;
  if (j.program->kind != TermKind::Pair) return "program is not a pair";
  if (!alpha_eq(p1.program, j.program->kids[0]) || !alpha_eq(p2.program, j.program->kids[1]))
    return "premise programs do not match the pair components";
  if (!feq(p1.pre, j.pre)) return "first premise pre-condition differs from the conclusion";
  if (!feq(p2.pre, p1.post)) return "second premise pre-condition does not chain";
  FormulaPtr want =
      subst_var(dsg(j.post), m_pair(m_var(p1.anchor), m_var(p2.anchor)), j.anchor);
  if (!feq(p2.post, want)) return "second premise post-condition is not C'{<m,n>/u}";
  if (auto e = eff_equal(j, eunion(eset(p1.effects), eset(p2.effects)), "premise union");
      !e.empty())
    return e;
  return "";
}

std::string chk_case(RuleCtx& c) {
  if (auto e = need_prems(c, 3); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement &p0 = c.prems[0]->j, &p1 = c.prems[1]->j, &p2 = c.prems[2]->j;
  if (j.program->kind != TermKind::Case) return "program is not a case";
  std::string x1 = j.program->name, x2 = j.program->name2;
  if (!alpha_eq(p0.program, j.program->kids[0])) return "first premise program mismatch";
  if (!alpha_eq(p1.program, j.program->kids[1]) || !alpha_eq(p2.program, j.program->kids[2]))
    return "branch premise programs do not match";
  if (!feq(p0.pre, j.pre)) return "first premise pre-condition differs from the conclusion";
  std::set<std::string> fvc = formula_free_vars(dsg(j.pre));
  if (fvc.count(x1) || fvc.count(x2)) return "pre-condition mentions a case binder";
  std::set<std::string> fv0 = formula_free_vars(dsg(p0.post));
  if (fv0.count(x1) || fv0.count(x2)) return "C0 mentions a case binder";
  std::string m = p0.anchor;
  // Branch pre: C0{inj_i(x_i)/m}; injection annotations are not compared.
  if (!feq(p1.pre, subst_var(dsg(p0.post), m_inj(1, m_var(x1), nullptr), m)))
    return "first branch pre-condition is not C0{inj1(x1)/m}";
  if (!feq(p2.pre, subst_var(dsg(p0.post), m_inj(2, m_var(x2), nullptr), m)))
    return "second branch pre-condition is not C0{inj2(x2)/m}";
  FormulaPtr post1 = rename_anchor(dsg(p1.post), p1.anchor, j.anchor);
  FormulaPtr post2 = rename_anchor(dsg(p2.post), p2.anchor, j.anchor);
  if (!feq(post1, j.post) || !feq(post2, j.post))
    return "branch post-conditions differ from the conclusion";
  std::set<std::string> fvp = formula_free_vars(dsg(j.post));
  if (fvp.count(x1) || fvp.count(x2)) return "post-condition mentions a case binder";
  if (eset(p1.effects) != eset(p2.effects)) return "branch effect sets differ";
  if (auto e = eff_equal(j, eunion(eset(p0.effects), eset(p1.effects)), "premise union");
      !e.empty())
    return e;
  if (auto e = thin_check(c, j.post, m, "the post-condition"); !e.empty()) return e;
  return "";
}

std::string chk_if(RuleCtx& c) {
  if (auto e = need_prems(c, 3); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement &p0 = c.prems[0]->j, &p1 = c.prems[1]->j, &p2 = c.prems[2]->j;
  if (j.program->kind != TermKind::If) return "program is not a conditional";
  if (!alpha_eq(p0.program, j.program->kids[0])) return "guard premise program mismatch";
  if (!alpha_eq(p1.program, j.program->kids[1]) || !alpha_eq(p2.program, j.program->kids[2]))
    return "branch premise programs do not match";
  if (!feq(p0.pre, j.pre)) return "guard premise pre-condition differs from the conclusion";
  std::string b = p0.anchor;
  if (!feq(p1.pre, subst_var(dsg(p0.post), m_bool(true), b)))
    return "then-branch pre-condition is not C0{t/b}";
  if (!feq(p2.pre, subst_var(dsg(p0.post), m_bool(false), b)))
    return "else-branch pre-condition is not C0{f/b}";
  FormulaPtr post1 = rename_anchor(dsg(p1.post), p1.anchor, j.anchor);
  FormulaPtr post2 = rename_anchor(dsg(p2.post), p2.anchor, j.anchor);
  if (!feq(post1, j.post) || !feq(post2, j.post))
    return "branch post-conditions differ from the conclusion";
  if (eset(p1.effects) != eset(p2.effects)) return "branch effect sets differ";
  if (auto e = eff_equal(j, eunion(eset(p0.effects), eset(p1.effects)), "premise union");
      !e.empty())
    return e;
  return "";
}

std::string chk_abs(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (j.program->kind != TermKind::Lam) return "program is not an abstraction";
  if (j.located && !j.effects.empty()) return "conclusion effect set must be empty";
  FormulaPtr post = dsg(j.post);
  if (post->kind != FKind::Always) return "post-condition is not boxed";
  FormulaPtr body = post->kids[0];
  std::vector<std::pair<std::string, TypePtr>> binders;
  while (body->kind == FKind::Forall) {
    binders.emplace_back(body->var, body->type);
    body = body->kids[0];
  }
  if (binders.empty()) return "post-condition has no universal binder for the argument";
  std::string x = binders[0].first;
  // Body: C => u . x = m {C'} [@e~], or a bare evaluation when C is T.
  FormulaPtr C = f_true();
  if (body->kind == FKind::Implies) {
    C = body->kids[0];
    body = body->kids[1];
  }
  if (body->kind != FKind::Eval) return "post-condition body is not an evaluation formula";
  if (!(body->e1->kind == TermKind::Var && body->e1->name == j.anchor))
    return "evaluation subject is not the anchor";
  if (!(body->e2->kind == TermKind::Var && body->e2->name == x))
    return "evaluation argument is not the bound variable";
  std::string m = body->var;
  // Premise program: the lambda body with its binder renamed to x.
  TermPtr lbody = j.program->kids[0];
  if (j.program->name != x) {
    std::set<std::string> fv = free_vars(lbody);
    if (fv.count(x)) return "cannot rename the lambda binder to " + x;
    lbody = substitute(lbody, m_var(x), j.program->name);
  }
  if (!alpha_eq(p.program, lbody)) return "premise program is not the lambda body";
  if (p.anchor != m) return "premise anchor differs from the evaluation anchor";
  if (!feq(p.post, body->kids[0])) return "premise post-condition differs from C'";
  // Premise pre: C & A (either order); A is the conclusion pre.
  FormulaPtr A = dsg(j.pre);
  FormulaPtr ppre = dsg(p.pre);
  bool pre_ok = false;
  if (is_true(dsg(C)) && feq(ppre, A)) pre_ok = true;
  if (is_true(A) && feq(ppre, C)) pre_ok = true;
  if (!pre_ok && ppre->kind == FKind::And) {
    if (feq(ppre->kids[0], A) && feq(ppre->kids[1], C)) pre_ok = true;
    if (feq(ppre->kids[0], C) && feq(ppre->kids[1], A)) pre_ok = true;
  }
  if (!pre_ok) return "premise pre-condition is not A & C";
  std::set<std::string> fva = formula_free_vars(A);
  if (fva.count(x)) return "the conclusion pre-condition mentions the bound variable";
  for (size_t i = 1; i < binders.size(); i++)
    if (fva.count(binders[i].first))
      return "the conclusion pre-condition mentions auxiliary binder " + binders[i].first;
  if (classify_stateless(A) != Classification::Proven)
    return "the conclusion pre-condition is not provably stateless";
  // Effects: the evaluation formula carries the premise's effect set.
  if (body->located != p.located || (body->located && eset(body->effects) != eset(p.effects)))
    return "the evaluation formula's effect set differs from the premise's";
  return "";
}

std::string chk_app(RuleCtx& c) {
  if (auto e = need_prems(c, 2); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement &p1 = c.prems[0]->j, &p2 = c.prems[1]->j;
  if (j.program->kind != TermKind::App) return "program is not an application";
  if (!alpha_eq(p1.program, j.program->kids[0]) || !alpha_eq(p2.program, j.program->kids[1]))
    return "premise programs do not match the application parts";
  if (!feq(p1.pre, j.pre)) return "first premise pre-condition differs from the conclusion";
  if (!feq(p2.pre, p1.post)) return "second premise pre-condition does not chain";
  FormulaPtr ev = dsg(p2.post);
  if (ev->kind != FKind::Eval)
    return "second premise post-condition is not a one-sided evaluation formula";
  if (!(ev->e1->kind == TermKind::Var && ev->e1->name == p1.anchor))
    return "evaluation subject is not the first premise anchor";
  if (!(ev->e2->kind == TermKind::Var && ev->e2->name == p2.anchor))
    return "evaluation argument is not the second premise anchor";
  FormulaPtr cprime;
  if (ev->var == j.anchor) {
    cprime = ev->kids[0];
  } else {
    // `m . n = u {C'}` desugars to an anchor z with body z = u & C'.
    FormulaPtr b = dsg(ev->kids[0]);
    if (b->kind == FKind::And && b->kids[0]->kind == FKind::Eq &&
        b->kids[0]->e1->kind == TermKind::Var && b->kids[0]->e1->name == ev->var &&
        b->kids[0]->e2->kind == TermKind::Var && b->kids[0]->e2->name == j.anchor) {
      cprime = b->kids[1];
    } else {
      return "evaluation formula does not name the conclusion anchor";
    }
  }
  if (!feq(cprime, j.post)) return "evaluation post-condition differs from the conclusion";
  EffSet want = eunion(eset(p1.effects), eset(p2.effects));
  if (ev->located) want = eunion(want, eset(ev->effects));
  if (auto e = eff_equal(j, want, "premise/evaluation union"); !e.empty()) return e;
  if (auto e = thin_check(c, j.post, p1.anchor, "the post-condition"); !e.empty()) return e;
  if (auto e = thin_check(c, j.post, p2.anchor, "the post-condition"); !e.empty()) return e;
  return "";
}

std::string chk_deref(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (j.program->kind != TermKind::Deref) return "program is not a dereference";
  if (!alpha_eq(p.program, j.program->kids[0])) return "premise program mismatch";
  if (!feq(p.pre, j.pre)) return "premise pre-condition differs from the conclusion";
  FormulaPtr want = subst_var(dsg(j.post), m_deref(m_var(p.anchor)), j.anchor);
  if (!feq(p.post, want)) return "premise post-condition is not C'{!m/u}";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  if (auto e = thin_check(c, j.post, p.anchor, "the post-condition"); !e.empty()) return e;
  return "";
}

std::string chk_assign(RuleCtx& c) {
  if (auto e = need_prems(c, 2); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement &p1 = c.prems[0]->j, &p2 = c.prems[1]->j;
  if (j.program->kind != TermKind::Assign) return "program is not an assignment";
  if (!alpha_eq(p1.program, j.program->kids[0]) || !alpha_eq(p2.program, j.program->kids[1]))
    return "premise programs do not match the assignment parts";
  if (!feq(p1.pre, j.pre)) return "first premise pre-condition differs from the conclusion";
  if (!feq(p2.pre, p1.post)) return "second premise pre-condition does not chain";
  auto cp = strip_unit(j.post, j.anchor);
  if (!cp) return "conclusion post-condition does not have the unit-anchor shape";
  FormulaPtr want;
  try {
    want = logical_subst(dsg(*cp), m_var(p2.anchor), m_var(p1.anchor), c.env);
  } catch (const std::exception& ex) {
    return std::string("logical substitution failed: ") + ex.what();
  }
  if (!feq(p2.post, want))
    return "second premise post-condition is not the logical substitution C'{|n/!m|}";
  if (auto e = thin_check(c, *cp, p1.anchor, "the post-condition"); !e.empty()) return e;
  if (auto e = thin_check(c, *cp, p2.anchor, "the post-condition"); !e.empty()) return e;
  if (j.located) {
    EffSet base = eunion(eset(p1.effects), eset(p2.effects));
    EffSet conc = eset(j.effects);
    std::vector<std::string> extra;
    for (const auto& e : conc)
      if (!base.count(e)) extra.push_back(e);
    TermPtr eprime;
    if (auto it = c.st.hints.find("eff"); it != c.st.hints.end()) {
      eprime = parse_program(it->second);
      if (!conc.count(print_term(eprime)))
        return "hinted effect term is not in the conclusion's effect set";
    } else if (extra.size() == 1) {
      eprime = parse_program(extra[0]);
    } else {
      return "cannot identify the written reference e' in the effect set (give eff=...)";
    }
    EffSet want_eff = eunion(base, {print_term(eprime)});
    if (conc != want_eff)
      return "effect set mismatch: conclusion must be the premise union plus e'";
    c.oblige("the first premise post-condition fixes the written reference: C0 => m = e'",
             f_implies(dsg(p1.post), f_eq(m_var(p1.anchor), eprime)));
  }
  return "";
}

std::string chk_ref(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (j.program->kind != TermKind::RefNew) return "program is not a reference creation";
  if (!alpha_eq(p.program, j.program->kids[0])) return "premise program mismatch";
  if (!feq(p.pre, j.pre)) return "premise pre-condition differs from the conclusion";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  FormulaPtr post = dsg(j.post);
  if (post->kind != FKind::Nu) return "post-condition is not a hiding formula";
  std::string x = post->var;
  std::vector<FormulaPtr> cs;
  conjuncts_of(post->kids[0], cs);
  if (cs.size() != 3) return "hidden post-condition must have exactly three conjuncts";
  // Find u = x, u # i, and C'{!u/m} among the conjuncts, in any order.
  FormulaPtr core;
  std::string i;
  bool have_eq = false;
  for (const auto& conj : cs) {
    if (conj->kind == FKind::Eq && conj->e1->kind == TermKind::Var &&
        conj->e1->name == j.anchor && conj->e2->kind == TermKind::Var &&
        conj->e2->name == x && !have_eq) {
      have_eq = true;
      continue;
    }
    if (conj->kind == FKind::NotReach && conj->e2->kind == TermKind::Var &&
        conj->e2->name == j.anchor && conj->e1->kind == TermKind::Var && i.empty() &&
        conj->e1->name != x) {
      i = conj->e1->name;
      continue;
    }
    if (!core)
      core = conj;
    else
      return "unexpected extra conjunct under the hiding";
  }
  if (!have_eq) return "missing conjunct u = x under the hiding";
  if (i.empty()) return "missing freshness conjunct u # i under the hiding";
  if (!core) return "missing the substituted post-condition under the hiding";
  FormulaPtr want = subst_var(dsg(p.post), m_deref(m_var(j.anchor)), p.anchor);
  if (!feq(core, want)) return "conjunct is not C'{!u/m}";
  // Freshness of i (and its type) with respect to the whole judgement.
  std::set<std::string> used = formula_free_vars(dsg(j.pre));
  std::set<std::string> pv = free_vars(j.program);
  used.insert(pv.begin(), pv.end());
  used.insert(j.anchor);
  std::set<std::string> pfv = formula_free_vars(want);
  used.insert(pfv.begin(), pfv.end());
  for (const auto& eterm : j.effects) {
    std::set<std::string> ev = free_vars(eterm);
    used.insert(ev.begin(), ev.end());
  }
  if (used.count(i)) return "the auxiliary variable " + i + " is not fresh for this judgement";
  auto ti = c.env.vars.find(i);
  if (ti != c.env.vars.end()) {
    if (ti->second->kind != TypeKind::Var)
      return "the auxiliary variable " + i + " must have a fresh type variable's type";
    const std::string& X = ti->second->name;
    for (const auto& v : used) {
      auto tv = c.env.vars.find(v);
      if (tv != c.env.vars.end() && free_type_vars(tv->second).count(X))
        return "the type variable " + X + " is not fresh for this judgement";
    }
  }
  return "";
}

std::string chk_recren(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (j.program->kind != TermKind::Rec) return "program is not a recursion";
  std::string f = j.program->name;
  if (!alpha_eq(p.program, j.program->kids[0])) return "premise program is not the lambda part";
  if (!feq(p.pre, j.pre)) return "premise pre-condition differs from the conclusion";
  if (formula_free_vars(dsg(j.pre)).count(f))
    return "pre-condition mentions the recursion variable";
  if (classify_stateless(dsg(j.pre)) != Classification::Proven)
    return "the pre-condition is not provably stateless";
  if (p.anchor != j.anchor) return "premise anchor differs from the conclusion";
  FormulaPtr want = subst_var(dsg(p.post), m_var(j.anchor), f);
  if (!feq(j.post, want)) return "conclusion post-condition is not B{u/f}";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  return "";
}

std::string chk_rec(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (j.program->kind != TermKind::Rec) return "program is not a recursion";
  std::string x = j.program->name;
  if (!alpha_eq(p.program, j.program->kids[0])) return "premise program is not the lambda part";
  if (p.anchor != j.anchor) return "premise anchor differs from the conclusion";
  FormulaPtr post = dsg(j.post);
  if (post->kind != FKind::Forall) return "conclusion post-condition is not universally bound";
  std::string i = post->var;
  if (post->type && post->type->kind != TypeKind::Nat) return "the induction index must be Nat";
  FormulaPtr B = post->kids[0];
  if (formula_free_vars(B).count(x)) return "B mentions the recursion variable";
  FormulaPtr ppost = dsg(p.post);
  if (!feq(ppost, B)) return "premise post-condition is not B(i)";
  // Premise pre: A & all j:Nat.(j < i => B(j){x/u}).
  FormulaPtr ppre = dsg(p.pre);
  if (ppre->kind != FKind::And) return "premise pre-condition is not A & induction hypothesis";
  FormulaPtr A = ppre->kids[0];
  FormulaPtr ih = ppre->kids[1];
  if (!feq(A, j.pre)) return "premise A differs from the conclusion pre-condition";
  std::set<std::string> fva = formula_free_vars(dsg(A));
  if (fva.count(x) || fva.count(i)) return "A mentions the recursion variable or the index";
  if (ih->kind != FKind::Forall) return "induction hypothesis is not universally bound";
  std::string jv = ih->var;
  if (ih->type && ih->type->kind != TypeKind::Nat) return "the induction index must be Nat";
  FormulaPtr body = ih->kids[0];
  if (body->kind != FKind::Implies) return "induction hypothesis is not guarded";
  FormulaPtr guard = f_eq(m_op("lt", {m_var(jv), m_var(i)}), m_bool(true));
  if (!feq(body->kids[0], guard)) return "induction guard is not j < i";
  FormulaPtr want = subst_var(subst_var(B, m_var(jv), i), m_var(x), j.anchor);
  if (!feq(body->kids[1], want)) return "induction hypothesis body is not B(j){x/u}";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  return "";
}

std::string chk_auxallv(RuleCtx& c, bool value_form) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (!alpha_eq(p.program, j.program)) return "premise program differs";
  if (value_form) {
    if (!is_value(j.program)) return "program is not a value";
  }
  FormulaPtr post = dsg(j.post);
  if (post->kind != FKind::Forall) return "conclusion post-condition is not universally bound";
  std::string i = post->var;
  if (!value_form) {
    TypePtr ty = post->type;
    if (!ty) {
      auto it = c.env.vars.find(i);
      if (it != c.env.vars.end()) ty = it->second;
    }
    if (!ty || !is_base_type(ty))
      return "the bound auxiliary variable must have a declared base type";
  }
  FormulaPtr ppost = rename_anchor(dsg(p.post), p.anchor, j.anchor);
  if (!feq(ppost, post->kids[0])) return "premise post-condition differs from the bound body";
  if (!feq(p.pre, j.pre)) return "premise pre-condition differs from the conclusion";
  if (formula_free_vars(dsg(j.pre)).count(i))
    return "pre-condition mentions the bound auxiliary variable";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  return "";
}

std::string chk_auxex(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (!alpha_eq(p.program, j.program)) return "premise program differs";
  FormulaPtr pre = dsg(j.pre);
  if (pre->kind != FKind::Exists)
    return "conclusion pre-condition is not existentially bound";
  std::string i = pre->var;
  if (!feq(p.pre, pre->kids[0])) return "premise pre-condition differs from the bound body";
  FormulaPtr ppost = rename_anchor(dsg(p.post), p.anchor, j.anchor);
  if (!feq(ppost, j.post)) return "premise post-condition differs from the conclusion";
  if (formula_free_vars(dsg(j.post)).count(i))
    return "post-condition mentions the bound auxiliary variable";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  return "";
}

std::string chk_auxinst(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (!alpha_eq(p.program, j.program)) return "premise program differs";
  auto iv = c.st.hints.find("i");
  auto cv = c.st.hints.find("c");
  if (iv == c.st.hints.end() || cv == c.st.hints.end())
    return "rule needs hints i=<variable> and c=<constant>";
  TermPtr con;
  try {
    con = parse_program(cv->second);
  } catch (const std::exception& ex) {
    return std::string("bad constant hint: ") + ex.what();
  }
  if (con->kind != TermKind::Const) return "hint c is not a constant";
  if (!feq(j.pre, subst_var(dsg(p.pre), con, iv->second)))
    return "conclusion pre-condition is not C{c/i}";
  FormulaPtr ppost = rename_anchor(dsg(p.post), p.anchor, j.anchor);
  if (!feq(j.post, subst_var(ppost, con, iv->second)))
    return "conclusion post-condition is not C'{c/i}";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  return "";
}

std::string chk_conseq(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (!alpha_eq(p.program, j.program)) return "premise program differs";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  FormulaPtr ppost = rename_anchor(dsg(p.post), p.anchor, j.anchor);
  if (!feq(j.pre, p.pre))
    c.oblige("pre-condition strengthening: C => C0", f_implies(dsg(j.pre), dsg(p.pre)));
  if (!feq(ppost, j.post))
    c.oblige("post-condition weakening: C0' => C'", f_implies(ppost, dsg(j.post)));
  return "";
}

std::string chk_conseval(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (!alpha_eq(p.program, j.program)) return "premise program differs";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  std::string m = j.anchor;
  FormulaPtr ppost = rename_anchor(dsg(p.post), p.anchor, m);
  // Fresh x for the thunk.
  std::set<std::string> used = formula_free_vars(dsg(j.pre));
  for (const auto& g : {dsg(j.post), dsg(p.pre), ppost}) {
    std::set<std::string> fv = formula_free_vars(g);
    used.insert(fv.begin(), fv.end());
  }
  used.insert(m);
  std::string x = fresh_name("x", used);
  auto mk = [&](const FormulaPtr& pre, const FormulaPtr& post) {
    FormulaPtr ev = f_implies(pre, f_eval(m_var(x), m_unit(), m, post));
    // Auxiliary variables i~ (hint aux=i,j,...) are universally closed.
    if (auto it = c.st.hints.find("aux"); it != c.st.hints.end()) {
      std::vector<std::string> names;
      std::string cur;
      for (char ch : it->second + ",") {
        if (ch == ',') {
          if (!cur.empty()) names.push_back(cur);
          cur.clear();
        } else if (!std::isspace((unsigned char)ch)) {
          cur += ch;
        }
      }
      for (auto r = names.rbegin(); r != names.rend(); ++r) {
        TypePtr ty;
        auto tv = c.env.vars.find(*r);
        if (tv != c.env.vars.end()) ty = tv->second;
        ev = f_forall(*r, ty, ev);
      }
    }
    if (auto it = c.st.hints.find("tyaux"); it != c.st.hints.end()) ev = f_forall_ty(it->second, ev);
    if (!j.located) ev = f_always(ev);
    return ev;
  };
  c.oblige("consequence on the evaluation formula",
           f_implies(mk(dsg(p.pre), ppost), mk(dsg(j.pre), dsg(j.post))));
  return "";
}

std::string chk_subs(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (!alpha_eq(p.program, j.program)) return "premise program differs";
  if (p.anchor != j.anchor) return "premise anchor differs from the conclusion";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  auto iv = c.st.hints.find("i");
  auto ev = c.st.hints.find("e");
  if (iv == c.st.hints.end() || ev == c.st.hints.end())
    return "rule needs hints i=<variable> and e=<term>";
  TermPtr eterm;
  try {
    eterm = parse_program(ev->second);
  } catch (const std::exception& ex) {
    return std::string("bad substitution term: ") + ex.what();
  }
  if (!is_logic_term(eterm)) return "the substitution witness is not a logical term";
  if (fpn(eterm).count(j.anchor))
    return "the anchor occurs as a free plain name of the substitution witness";
  if (!feq(j.pre, subst_var(dsg(p.pre), eterm, iv->second)))
    return "conclusion pre-condition is not C{e/i}";
  if (!feq(j.post, subst_var(dsg(p.post), eterm, iv->second)))
    return "conclusion post-condition is not C'{e/i}";
  return "";
}

// Splits the conclusion's pre/post as (premise part) & (added invariant),
// returning the two added conjuncts or an error.
std::string split_inv(const RuleCtx& c, FormulaPtr& added_pre, FormulaPtr& added_post) {
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  FormulaPtr pre = dsg(j.pre), post = dsg(j.post);
  FormulaPtr ppost = rename_anchor(dsg(p.post), p.anchor, j.anchor);
  if (pre->kind != FKind::And || post->kind != FKind::And)
    return "conclusion pre/post must be conjunctions with the invariant";
  if (!feq(pre->kids[0], p.pre)) return "conclusion pre-condition does not extend the premise's";
  if (!feq(post->kids[0], ppost))
    return "conclusion post-condition does not extend the premise's";
  added_pre = pre->kids[1];
  added_post = post->kids[1];
  if (!feq(added_pre, added_post)) return "the added invariant differs between pre and post";
  return "";
}

std::string chk_inv(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (!alpha_eq(p.program, j.program)) return "premise program differs";
  if (!j.located || !p.located) return "rule applies to located judgements";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  FormulaPtr ap, aq;
  if (auto e = split_inv(c, ap, aq); !e.empty()) return e;
  // ap must be [!w~]C0 with {w~} the effect set.
  EffSet quant;
  FormulaPtr body = ap;
  while (body->kind == FKind::AllContent) {
    quant.insert(print_term(body->e1));
    body = body->kids[0];
  }
  if (quant != eset(j.effects))
    return "the invariant is not content-quantified over exactly the effect set";
  if (classify_tame(body) != Classification::Proven) return "C0 is not provably tame";
  return "";
}

std::string chk_invval(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (!alpha_eq(p.program, j.program)) return "premise program differs";
  if (!is_value(j.program)) return "program is not a value";
  if (j.located && !j.effects.empty()) return "effect set must be empty";
  if (p.located && !p.effects.empty()) return "premise effect set must be empty";
  FormulaPtr ap, aq;
  if (auto e = split_inv(c, ap, aq); !e.empty()) return e;
  return "";
}

std::string chk_invstateless(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (!alpha_eq(p.program, j.program)) return "premise program differs";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  FormulaPtr ap, aq;
  if (auto e = split_inv(c, ap, aq); !e.empty()) return e;
  if (ap->kind != FKind::Always) return "the added invariant is not boxed";
  return "";
}

std::string chk_invsharp(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (!alpha_eq(p.program, j.program)) return "premise program differs";
  if (!j.located || !p.located) return "rule applies to located judgements";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  if (j.effects.size() != 1 || j.effects[0]->kind != TermKind::Var)
    return "the effect set must be a single reference variable";
  std::string x = j.effects[0]->name;
  FormulaPtr ap, aq;
  if (auto e = split_inv(c, ap, aq); !e.empty()) return e;
  std::vector<FormulaPtr> cs;
  conjuncts_of(dsg(ap), cs);
  for (const auto& conj : cs) {
    if (conj->kind != FKind::NotReach || conj->e2->kind != TermKind::Var ||
        conj->e2->name != x)
      return "the added invariant does not keep x unreachable from e~";
    if (!deref_free_term(conj->e1)) return "a dereference occurs in the disjointness sources";
  }
  return "";
}

std::string chk_weak(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (!alpha_eq(p.program, j.program)) return "premise program differs";
  FormulaPtr ppost = rename_anchor(dsg(p.post), p.anchor, j.anchor);
  if (!feq(j.pre, p.pre) || !feq(ppost, j.post))
    return "pre/post-conditions must be unchanged";
  if (!p.located) return "premise must be located";
  if (j.located) {
    EffSet ps = eset(p.effects), cs = eset(j.effects);
    for (const auto& e : ps)
      if (!cs.count(e)) return "conclusion effect set does not contain the premise's";
  }
  // An unlocated conclusion forgets the effect information entirely.
  return "";
}

std::string chk_thinning(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (!alpha_eq(p.program, j.program)) return "premise program differs";
  if (!j.located || !p.located) return "rule applies to located judgements";
  EffSet ps = eset(p.effects), cs = eset(j.effects);
  std::vector<std::string> dropped;
  for (const auto& e : ps)
    if (!cs.count(e)) dropped.push_back(e);
  if (dropped.size() != 1) return "exactly one effect term must be dropped";
  for (const auto& e : cs)
    if (!ps.count(e)) return "conclusion effect set must be contained in the premise's";
  TermPtr eprime = parse_program(dropped[0]);
  // Premise pre/post: C & !e' = i and C' & !e' = i.
  FormulaPtr ppre = dsg(p.pre);
  FormulaPtr ppost = rename_anchor(dsg(p.post), p.anchor, j.anchor);
  if (ppre->kind != FKind::And || ppost->kind != FKind::And)
    return "premise pre/post must carry the !e' = i conjunct";
  auto get_i = [&](const FormulaPtr& f) -> std::string {
    if (f->kind == FKind::Eq && f->e1->kind == TermKind::Deref &&
        alpha_eq(f->e1->kids[0], eprime) && f->e2->kind == TermKind::Var)
      return f->e2->name;
    return "";
  };
  std::string i1 = get_i(ppre->kids[1]), i2 = get_i(ppost->kids[1]);
  if (i1.empty() || i1 != i2) return "the !e' = i conjuncts do not match";
  if (!feq(ppre->kids[0], j.pre) || !feq(ppost->kids[0], j.post))
    return "pre/post-conditions must be unchanged apart from the !e' = i conjunct";
  std::set<std::string> used = formula_free_vars(dsg(j.pre));
  std::set<std::string> fp = formula_free_vars(dsg(j.post));
  used.insert(fp.begin(), fp.end());
  std::set<std::string> pv = free_vars(j.program);
  used.insert(pv.begin(), pv.end());
  for (const auto& eterm : j.effects) {
    std::set<std::string> fe = free_vars(eterm);
    used.insert(fe.begin(), fe.end());
  }
  if (used.count(i1)) return "the auxiliary variable " + i1 + " is not fresh";
  return "";
}

// Shared by [LetRef] (unlocated) and [New] (located).
std::string chk_letref(RuleCtx& c) {
  if (auto e = need_prems(c, 2); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement &p1 = c.prems[0]->j, &p2 = c.prems[1]->j;
  // Program: let x = ref(M) in N, i.e. (fun x.N)(ref(M)).
  if (j.program->kind != TermKind::App || j.program->kids[0]->kind != TermKind::Lam ||
      j.program->kids[1]->kind != TermKind::RefNew)
    return "program is not of the form let x = ref(M) in N";
  std::string x = j.program->kids[0]->name;
  if (!alpha_eq(p1.program, j.program->kids[1]->kids[0]))
    return "first premise program is not the initialiser";
  if (!alpha_eq(p2.program, j.program->kids[0]->kids[0]))
    return "second premise program is not the let body";
  if (!feq(p1.pre, j.pre)) return "first premise pre-condition differs from the conclusion";
  std::string m = p1.anchor;
  // Conclusion post: nu x. C'.
  FormulaPtr post = dsg(j.post);
  if (post->kind != FKind::Nu) return "conclusion post-condition is not a hiding formula";
  if (post->var != x) return "the hidden name differs from the let binder";
  FormulaPtr p2post = rename_anchor(dsg(p2.post), p2.anchor, j.anchor);
  if (!feq(p2post, post->kids[0]))
    return "second premise post-condition differs from the hidden body";
  // Second premise pre: C0{!x/m} & x # e~  (or [!x]C0 & !x = m & x # e~).
  std::vector<FormulaPtr> cs;
  conjuncts_of(dsg(p2.pre), cs);
  std::vector<FormulaPtr> sharp, rest;
  for (const auto& conj : cs) {
    if (conj->kind == FKind::NotReach && conj->e2->kind == TermKind::Var &&
        conj->e2->name == x)
      sharp.push_back(conj);
    else
      rest.push_back(conj);
  }
  FormulaPtr core = conj_of(rest);
  FormulaPtr wantA = subst_var(dsg(p1.post), m_deref(m_var(x)), m);
  bool form_ok = feq(core, wantA);
  if (!form_ok) {
    // Variant: [!x]C0 & !x = m  (the content of x is named, not substituted).
    FormulaPtr wantB = f_and(f_allcontent(m_var(x), dsg(p1.post)),
                             f_eq(m_deref(m_var(x)), m_var(m)));
    form_ok = feq(core, wantB);
  }
  if (!form_ok)
    return "second premise pre-condition is not C0{!x/m} (or [!x]C0 & !x = m) plus x # e~";
  for (const auto& s : sharp)
    if (fpn(s->e1).count(x))
      return "the let binder occurs as a free plain name in a disjointness target";
  if (auto e = thin_check(c, post->kids[0], m, "the post-condition"); !e.empty()) return e;
  if (j.located) {
    EffSet p2eff = eset(p2.effects);
    if (!p2eff.count(x)) return "the body premise's effect set must contain the new reference";
    p2eff.erase(x);
    if (auto e = eff_equal(j, eunion(eset(p1.effects), p2eff), "premise union minus x");
        !e.empty())
      return e;
    if (eset(j.effects).count(x)) return "the hidden name escapes into the effect set";
  }
  return "";
}

std::string chk_let(RuleCtx& c) {
  if (auto e = need_prems(c, 2); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement &p1 = c.prems[0]->j, &p2 = c.prems[1]->j;
  if (j.program->kind != TermKind::App || j.program->kids[0]->kind != TermKind::Lam)
    return "program is not of the form let x = M in N";
  std::string x = j.program->kids[0]->name;
  if (!alpha_eq(p1.program, j.program->kids[1]))
    return "first premise program is not the bound term";
  if (!alpha_eq(p2.program, j.program->kids[0]->kids[0]))
    return "second premise program is not the let body";
  if (p1.anchor != x) return "first premise anchor must be the let binder";
  if (!feq(p1.pre, j.pre)) return "first premise pre-condition differs from the conclusion";
  if (!feq(p2.pre, p1.post)) return "second premise pre-condition does not chain";
  FormulaPtr p2post = rename_anchor(dsg(p2.post), p2.anchor, j.anchor);
  if (!feq(p2post, j.post)) return "second premise post-condition differs from the conclusion";
  if (auto e = eff_equal(j, eunion(eset(p1.effects), eset(p2.effects)), "premise union");
      !e.empty())
    return e;
  if (auto e = thin_check(c, j.post, x, "the post-condition"); !e.empty()) return e;
  return "";
}

std::string chk_letopen(RuleCtx& c) {
  if (auto e = need_prems(c, 2); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement &p1 = c.prems[0]->j, &p2 = c.prems[1]->j;
  if (j.program->kind != TermKind::App || j.program->kids[0]->kind != TermKind::Lam)
    return "program is not of the form let x = M in N";
  std::string x = j.program->kids[0]->name;
  if (!alpha_eq(p1.program, j.program->kids[1]))
    return "first premise program is not the bound term";
  if (!alpha_eq(p2.program, j.program->kids[0]->kids[0]))
    return "second premise program is not the let body";
  if (p1.anchor != x) return "first premise anchor must be the let binder";
  if (!feq(p1.pre, j.pre)) return "first premise pre-condition differs from the conclusion";
  // First premise post: nu y~. C0; conclusion post: nu y~. C'.
  FormulaPtr p1post = dsg(p1.post);
  FormulaPtr post = dsg(j.post);
  std::vector<std::string> ys;
  while (p1post->kind == FKind::Nu) {
    ys.push_back(p1post->var);
    p1post = p1post->kids[0];
  }
  if (ys.empty()) return "first premise post-condition has no hiding to open";
  for (const auto& y : ys) {
    if (post->kind != FKind::Nu || post->var != y)
      return "conclusion post-condition does not restore the opened hiding";
    post = post->kids[0];
  }
  if (!feq(p2.pre, p1post)) return "second premise pre-condition is not the opened body";
  FormulaPtr p2post = rename_anchor(dsg(p2.post), p2.anchor, j.anchor);
  if (!feq(p2post, post)) return "second premise post-condition differs under the hiding";
  if (auto e = eff_equal(j, eunion(eset(p1.effects), eset(p2.effects)), "premise union");
      !e.empty())
    return e;
  if (auto e = thin_check(c, post, x, "the post-condition"); !e.empty()) return e;
  return "";
}

std::string chk_simple(RuleCtx& c) {
  if (auto e = need_prems(c, 0); !e.empty()) return e;
  const Judgement& j = c.j();
  if (!is_logic_term(j.program)) return "program is not a logical expression";
  FormulaPtr want = subst_var(dsg(j.post), j.program, j.anchor);
  if (!feq(j.pre, want)) return "pre-condition is not C{e/u}";
  return "";
}

std::string chk_ifh(RuleCtx& c) {
  if (auto e = need_prems(c, 2); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement &p1 = c.prems[0]->j, &p2 = c.prems[1]->j;
  if (j.program->kind != TermKind::If) return "program is not a conditional";
  TermPtr guard = j.program->kids[0];
  if (!is_logic_term(guard)) return "the guard is not a logical expression";
  if (!alpha_eq(p1.program, j.program->kids[1]) || !alpha_eq(p2.program, j.program->kids[2]))
    return "premise programs do not match the branches";
  FormulaPtr gt = f_eq(guard, m_bool(true));
  FormulaPtr gf = f_not(f_eq(guard, m_bool(true)));
  FormulaPtr gf2 = f_eq(guard, m_bool(false));
  auto pre_is = [&](const Judgement& p, const FormulaPtr& g, const FormulaPtr& galt) {
    FormulaPtr pre = dsg(p.pre);
    if (pre->kind != FKind::And) return false;
    if (!feq(pre->kids[0], j.pre)) return false;
    return feq(pre->kids[1], g) || (galt && feq(pre->kids[1], galt));
  };
  if (!pre_is(p1, gt, nullptr)) return "then-branch pre-condition is not C & e";
  if (!pre_is(p2, gf, gf2)) return "else-branch pre-condition is not C & ~e";
  FormulaPtr post1 = rename_anchor(dsg(p1.post), p1.anchor, j.anchor);
  FormulaPtr post2 = rename_anchor(dsg(p2.post), p2.anchor, j.anchor);
  if (!feq(post1, j.post) || !feq(post2, j.post))
    return "branch post-conditions differ from the conclusion";
  if (eset(p1.effects) != eset(p2.effects)) return "branch effect sets differ";
  if (auto e = eff_equal(j, eset(p1.effects), "conclusion vs branches"); !e.empty()) return e;
  return "";
}

std::string chk_apps(RuleCtx& c) {
  if (auto e = need_prems(c, 0); !e.empty()) return e;
  const Judgement& j = c.j();
  if (j.program->kind != TermKind::App) return "program is not an application";
  TermPtr f = j.program->kids[0], a = j.program->kids[1];
  if (!is_logic_term(f) || !is_logic_term(a))
    return "both application parts must be logical expressions";
  FormulaPtr ev = j.located
                      ? f_eval_at(f, a, j.anchor, dsg(j.post), j.effects)
                      : f_eval(f, a, j.anchor, dsg(j.post));
  c.oblige("the pre-condition carries the application's specification",
           f_implies(dsg(j.pre), ev));
  return "";
}

std::string chk_seq(RuleCtx& c) {
  if (auto e = need_prems(c, 2); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement &p1 = c.prems[0]->j, &p2 = c.prems[1]->j;
  if (j.program->kind != TermKind::App || j.program->kids[0]->kind != TermKind::Lam)
    return "program is not a sequence";
  if (!alpha_eq(p1.program, j.program->kids[1]))
    return "first premise program is not the first component";
  if (!alpha_eq(p2.program, j.program->kids[0]->kids[0]))
    return "second premise program is not the second component";
  auto c0 = strip_unit(p1.post, p1.anchor);
  if (!c0) return "first premise is not an anchorless judgement";
  if (!feq(p1.pre, j.pre)) return "first premise pre-condition differs from the conclusion";
  if (!feq(p2.pre, *c0)) return "second premise pre-condition does not chain";
  FormulaPtr p2post = rename_anchor(dsg(p2.post), p2.anchor, j.anchor);
  if (!feq(p2post, j.post)) return "second premise post-condition differs from the conclusion";
  if (auto e = eff_equal(j, eunion(eset(p1.effects), eset(p2.effects)), "premise union");
      !e.empty())
    return e;
  return "";
}

std::string chk_seqinv(RuleCtx& c) {
  if (auto e = need_prems(c, 2); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement &p1 = c.prems[0]->j, &p2 = c.prems[1]->j;
  if (!j.located || !p1.located || !p2.located) return "rule applies to located judgements";
  if (j.program->kind != TermKind::App || j.program->kids[0]->kind != TermKind::Lam)
    return "program is not a sequence";
  if (!alpha_eq(p1.program, j.program->kids[1]) ||
      !alpha_eq(p2.program, j.program->kids[0]->kids[0]))
    return "premise programs do not match the sequence components";
  auto c1p = strip_unit(p1.post, p1.anchor);
  auto c2p = strip_unit(p2.post, p2.anchor);
  auto cj = strip_unit(j.post, j.anchor);
  if (!c1p || !c2p || !cj) return "all judgements must be anchorless";
  // Pre: C1 & [!e1~]C2;   post: C2' & <!e2~>C1'.
  FormulaPtr pre = dsg(j.pre);
  if (pre->kind != FKind::And) return "conclusion pre-condition is not a conjunction";
  if (!feq(pre->kids[0], p1.pre)) return "conclusion pre does not start from C1";
  EffSet q1;
  FormulaPtr b1 = pre->kids[1];
  while (b1->kind == FKind::AllContent) {
    q1.insert(print_term(b1->e1));
    b1 = b1->kids[0];
  }
  if (q1 != eset(p1.effects)) return "the protected pre-condition is not quantified over e1~";
  if (!feq(b1, p2.pre)) return "the protected pre-condition is not C2";
  FormulaPtr post = dsg(*cj);
  if (post->kind != FKind::And) return "conclusion post-condition is not a conjunction";
  if (!feq(post->kids[0], *c2p)) return "conclusion post does not start from C2'";
  EffSet q2;
  FormulaPtr b2 = post->kids[1];
  while (b2->kind == FKind::SomeContent) {
    q2.insert(print_term(b2->e1));
    b2 = b2->kids[0];
  }
  if (q2 != eset(p2.effects)) return "the preserved post-condition is not quantified over e2~";
  if (!feq(b2, *c1p)) return "the preserved post-condition is not C1'";
  if (classify_tame(dsg(*c1p)) != Classification::Proven) return "C1' is not provably tame";
  if (classify_tame(dsg(p2.pre)) != Classification::Proven) return "C2 is not provably tame";
  if (auto e = eff_equal(j, eunion(eset(p1.effects), eset(p2.effects)), "premise union");
      !e.empty())
    return e;
  return "";
}

std::string chk_postconj(RuleCtx& c) {
  if (auto e = need_prems(c, 2); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement &p1 = c.prems[0]->j, &p2 = c.prems[1]->j;
  if (!alpha_eq(p1.program, j.program) || !alpha_eq(p2.program, j.program))
    return "premise programs differ";
  if (!feq(p1.pre, j.pre) || !feq(p2.pre, j.pre))
    return "premise pre-conditions differ from the conclusion";
  FormulaPtr post = dsg(j.post);
  if (post->kind != FKind::And) return "conclusion post-condition is not a conjunction";
  FormulaPtr q1 = rename_anchor(dsg(p1.post), p1.anchor, j.anchor);
  FormulaPtr q2 = rename_anchor(dsg(p2.post), p2.anchor, j.anchor);
  if (!feq(post->kids[0], q1) || !feq(post->kids[1], q2))
    return "conclusion post-condition is not C1 & C2";
  if (eset(p1.effects) != eset(p2.effects)) return "premise effect sets differ";
  if (auto e = eff_equal(j, eset(p1.effects), "conclusion vs premises"); !e.empty()) return e;
  return "";
}

std::string chk_predisj(RuleCtx& c) {
  if (auto e = need_prems(c, 2); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement &p1 = c.prems[0]->j, &p2 = c.prems[1]->j;
  if (!alpha_eq(p1.program, j.program) || !alpha_eq(p2.program, j.program))
    return "premise programs differ";
  FormulaPtr pre = dsg(j.pre);
  if (pre->kind != FKind::Or) return "conclusion pre-condition is not a disjunction";
  if (!feq(pre->kids[0], p1.pre) || !feq(pre->kids[1], p2.pre))
    return "conclusion pre-condition is not C1 | C2";
  FormulaPtr q1 = rename_anchor(dsg(p1.post), p1.anchor, j.anchor);
  FormulaPtr q2 = rename_anchor(dsg(p2.post), p2.anchor, j.anchor);
  if (!feq(q1, j.post) || !feq(q2, j.post))
    return "premise post-conditions differ from the conclusion";
  if (eset(p1.effects) != eset(p2.effects)) return "premise effect sets differ";
  if (auto e = eff_equal(j, eset(p1.effects), "conclusion vs premises"); !e.empty()) return e;
  return "";
}

std::string chk_conjimp(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (!alpha_eq(p.program, j.program)) return "premise program differs";
  if (!is_value(j.program)) return "program is not a value";
  if (j.located && !j.effects.empty()) return "effect set must be empty";
  FormulaPtr post = dsg(j.post);
  if (post->kind != FKind::Implies) return "conclusion post-condition is not A => C'";
  FormulaPtr ppre = dsg(p.pre);
  if (ppre->kind != FKind::And) return "premise pre-condition is not C & A";
  if (!feq(ppre->kids[0], j.pre) || !feq(ppre->kids[1], post->kids[0]))
    return "premise pre-condition is not C & A";
  FormulaPtr ppost = rename_anchor(dsg(p.post), p.anchor, j.anchor);
  if (!feq(ppost, post->kids[1])) return "premise post-condition differs from C'";
  return "";
}

std::string chk_impconj(RuleCtx& c) {
  if (auto e = need_prems(c, 1); !e.empty()) return e;
  if (auto e = located_uniform(c); !e.empty()) return e;
  const Judgement& j = c.j();
  const Judgement& p = c.prems[0]->j;
  if (!alpha_eq(p.program, j.program)) return "premise program differs";
  FormulaPtr pre = dsg(j.pre);
  if (pre->kind != FKind::And) return "conclusion pre-condition is not C & A";
  FormulaPtr ppost = rename_anchor(dsg(p.post), p.anchor, j.anchor);
  if (ppost->kind != FKind::Implies) return "premise post-condition is not A => C'";
  if (!feq(p.pre, pre->kids[0]) || !feq(ppost->kids[0], pre->kids[1]))
    return "the hoisted assumption does not match";
  if (!feq(ppost->kids[1], j.post)) return "conclusion post-condition differs from C'";
  if (auto e = eff_equal(j, eset(p.effects), "conclusion vs premise"); !e.empty()) return e;
  return "";
}

// ---------------------------------------------------------------------------
// Registry / dispatch
// ---------------------------------------------------------------------------

const std::map<std::string, Checker>& checkers() {
  static const std::map<std::string, Checker> m = {
      {"Var", chk_var},
      {"Const", chk_const},
      {"Op", chk_op},
      {"Add", chk_op},
      {"Inj1", [](RuleCtx& c) { return chk_inj(c, 1); }},
      {"Inj2", [](RuleCtx& c) { return chk_inj(c, 2); }},
      {"Proj1", [](RuleCtx& c) { return chk_proj(c, 1); }},
      {"Proj2", [](RuleCtx& c) { return chk_proj(c, 2); }},
      {"Pair", chk_pair},
      {"Case", chk_case},
      {"If", chk_if},
      {"Abs", chk_abs},
      {"App", chk_app},
      {"Deref", chk_deref},
      {"Assign", chk_assign},
      {"Ref", chk_ref},
      {"RecRen", chk_recren},
      {"Rec", chk_rec},
      {"AuxAllV", [](RuleCtx& c) { return chk_auxallv(c, true); }},
      {"AuxAll", [](RuleCtx& c) { return chk_auxallv(c, false); }},
      {"AuxEx", chk_auxex},
      {"AuxInst", chk_auxinst},
      {"Conseq", chk_conseq},
      {"ConsEval", chk_conseval},
      {"Subs", chk_subs},
      {"Inv", chk_inv},
      {"InvVal", chk_invval},
      {"InvStateless", chk_invstateless},
      {"InvSharp", chk_invsharp},
      {"Weak", chk_weak},
      {"Thinning", chk_thinning},
      {"LetRef", chk_letref},
      {"New", chk_letref},
      {"Let", chk_let},
      {"LetOpen", chk_letopen},
      {"Simple", chk_simple},
      {"IfH", chk_ifh},
      {"AppS", chk_apps},
      {"Seq", chk_seq},
      {"SeqInv", chk_seqinv},
      {"PostConj", chk_postconj},
      {"PreDisj", chk_predisj},
      {"ConjImp", chk_conjimp},
      {"ImpConj", chk_impconj},
  };
  return m;
}

}  // namespace

std::vector<std::string> rule_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : checkers()) out.push_back(k);
  return out;
}

std::string evidence_name(Evidence e) {
  switch (e) {
    case Evidence::Alpha: return "Alpha";
    case Evidence::SchemaMatch: return "SchemaMatch";
    case Evidence::Propositional: return "Propositional";
    case Evidence::NoCounterexample: return "NoCounterexample";
    case Evidence::AssumedByUser: return "AssumedByUser";
    case Evidence::Refuted: return "Refuted";
    case Evidence::Open: return "Open";
  }
  return "Open";
}

DischargeResult discharge(const FormulaPtr& ob_raw, const Env& env, const CheckOptions& opts) {
  DischargeResult r;
  FormulaPtr ob = desugar(ob_raw);
  if (ob->kind == FKind::Implies && formula_alpha_eq(ob->kids[0], ob->kids[1])) {
    r.kind = DischargeKind::Discharged;
    r.evidence = Evidence::Alpha;
    r.detail = "both sides identical";
    return r;
  }
  auto [id, diag] = detail::match_axiom_detail(ob, env);
  if (id) {
    r.kind = DischargeKind::Discharged;
    r.evidence = Evidence::SchemaMatch;
    r.detail = *id;
    return r;
  }
  if (tableau_valid(ob)) {
    r.kind = DischargeKind::Discharged;
    r.evidence = Evidence::Propositional;
    r.detail = "propositional tableau closes";
    return r;
  }
  RefuteResult rr = refute(ob, opts.bounds, opts.refute_trials, opts.seed);
  if (rr.countermodel) {
    r.kind = DischargeKind::Refuted;
    r.evidence = Evidence::Refuted;
    r.detail = "countermodel found after " + std::to_string(rr.trials_run) + " trial(s)";
    return r;
  }
  r.kind = opts.trust_oracle ? DischargeKind::Discharged : DischargeKind::Open;
  r.evidence = Evidence::NoCounterexample;
  r.detail = "no countermodel in " + std::to_string(rr.trials_run) + " trials" +
             (diag.empty() ? "" : "; " + diag);
  return r;
}

CheckReport check_script(const ProofScript& s, const CheckOptions& opts) {
  CheckReport rep;
  std::map<int, const ProofStep*> byidx;
  for (const auto& st : s.steps) byidx[st.index] = &st;

  for (const auto& st : s.steps) {
    StepReport sr;
    sr.index = st.index;

    // Build the step environment: script vars + premise anchors + anchor.
    Env env = s.env;
    std::string type_err;
    auto add_anchor = [&](const Judgement& jd) {
      try {
        env.vars[jd.anchor] = typecheck_term(env, jd.program);
      } catch (const std::exception& ex) {
        if (type_err.empty()) type_err = ex.what();
      }
    };
    RuleCtx ctx{s, st, {}, env, &rep.obligations, 0};
    for (int p : st.premises) {
      auto it = byidx.find(p);
      if (it != byidx.end()) {
        ctx.prems.push_back(it->second);
        add_anchor(it->second->j);
      }
    }
    add_anchor(st.j);
    ctx.env = env;

    if (!type_err.empty()) {
      sr.state = StepState::RuleError;
      sr.detail = "program type error: " + type_err;
      rep.steps.push_back(sr);
      continue;
    }
    if (formula_free_vars(desugar(st.j.pre)).count(st.j.anchor)) {
      sr.state = StepState::RuleError;
      sr.detail = "the anchor occurs free in the pre-condition";
      rep.steps.push_back(sr);
      continue;
    }
    try {
      typecheck_formula(ctx.env, desugar(st.j.pre));
      typecheck_formula(ctx.env, desugar(st.j.post));
    } catch (const std::exception& ex) {
      sr.state = StepState::RuleError;
      sr.detail = std::string("formula type error: ") + ex.what();
      rep.steps.push_back(sr);
      continue;
    }

    size_t ob_start = rep.obligations.size();
    if (st.rule == "assume") {
      ObligationRecord r;
      r.step = st.index;
      r.id = std::to_string(st.index) + ".1";
      r.descr = "step assumed without derivation";
      r.formula = f_true();
      r.evidence = Evidence::AssumedByUser;
      r.detail = "assume";
      r.open = true;
      rep.obligations.push_back(r);
      sr.state = StepState::ObligationOpen;
      sr.detail = "assumed (" + r.id + ")";
      rep.steps.push_back(sr);
      continue;
    }

    auto it = checkers().find(st.rule);
    if (it == checkers().end()) {
      sr.state = StepState::RuleError;
      sr.detail = "unknown rule " + st.rule;
      rep.steps.push_back(sr);
      continue;
    }
    std::string err;
    try {
      err = it->second(ctx);
    } catch (const std::exception& ex) {
      err = std::string("internal check failure: ") + ex.what();
    }
    if (!err.empty()) {
      sr.state = StepState::RuleError;
      sr.detail = err;
      // Obligations raised before the failure are moot.
      rep.obligations.resize(ob_start);
      rep.steps.push_back(sr);
      continue;
    }

    // Discharge this step's obligations.
    std::vector<std::string> open_ids;
    bool refuted = false;
    for (size_t k = ob_start; k < rep.obligations.size(); k++) {
      ObligationRecord& ob = rep.obligations[k];
      DischargeResult dr = discharge(ob.formula, ctx.env, opts);
      ob.evidence = dr.evidence;
      ob.detail = dr.detail;
      ob.open = dr.kind != DischargeKind::Discharged;
      if (dr.kind == DischargeKind::Refuted) refuted = true;
      if (ob.open) open_ids.push_back(ob.id);
    }
    if (refuted) {
      sr.state = StepState::RuleError;
      sr.detail = "an obligation was refuted by the oracle";
    } else if (!open_ids.empty()) {
      sr.state = StepState::ObligationOpen;
      std::string ids;
      for (const auto& i : open_ids) ids += (ids.empty() ? "" : ", ") + i;
      sr.detail = "open obligation(s): " + ids;
    } else {
      sr.state = StepState::Valid;
    }
    rep.steps.push_back(sr);
  }

  rep.accepted = true;
  for (const auto& sr : rep.steps)
    if (sr.state == StepState::RuleError) rep.accepted = false;
  rep.fully_verified = rep.accepted;
  for (const auto& ob : rep.obligations)
    if (ob.open) rep.fully_verified = false;
  return rep;
}

std::string report_text(const CheckReport& r) {
  std::ostringstream os;
  for (const auto& sr : r.steps) {
    os << "step " << sr.index << ": ";
    switch (sr.state) {
      case StepState::Valid: os << "Valid"; break;
      case StepState::RuleError: os << "RuleError: " << sr.detail; break;
      case StepState::ObligationOpen: os << "ObligationOpen: " << sr.detail; break;
    }
    os << "\n";
  }
  if (!r.obligations.empty()) {
    os << "obligations:\n";
    for (const auto& ob : r.obligations) {
      os << "  " << ob.id << " [" << (ob.open ? "open" : "discharged") << ", "
         << evidence_name(ob.evidence) << "] " << ob.descr;
      if (!ob.detail.empty()) os << " -- " << ob.detail;
      os << "\n";
    }
  }
  os << (r.fully_verified ? "fully verified"
                          : (r.accepted ? "accepted with open obligations" : "rejected"))
     << "\n";
  return os.str();
}

std::string report_json(const CheckReport& r) {
  nlohmann::json j;
  j["accepted"] = r.accepted;
  j["fully_verified"] = r.fully_verified;
  j["steps"] = nlohmann::json::array();
  for (const auto& sr : r.steps) {
    nlohmann::json s;
    s["index"] = sr.index;
    s["state"] = sr.state == StepState::Valid
                     ? "Valid"
                     : (sr.state == StepState::RuleError ? "RuleError" : "ObligationOpen");
    s["detail"] = sr.detail;
    j["steps"].push_back(s);
  }
  j["obligations"] = nlohmann::json::array();
  for (const auto& ob : r.obligations) {
    nlohmann::json o;
    o["id"] = ob.id;
    o["step"] = ob.step;
    o["descr"] = ob.descr;
    o["formula"] = ob.formula ? print_formula(ob.formula) : "";
    o["evidence"] = evidence_name(ob.evidence);
    o["detail"] = ob.detail;
    o["open"] = ob.open;
    j["obligations"].push_back(o);
  }
  return j.dump(2);
}

}  // namespace lsl
