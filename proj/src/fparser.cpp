#include <cctype>
#include <stdexcept>

#include "lsl/formula.hpp"

namespace lsl {

namespace {

const std::set<std::string> kFKeywords = {"all", "ex",  "nu",   "nubar", "box", "dia",
                                          "dv",  "not", "fact", "odd",   "even", "inj1",
                                          "inj2", "pi1", "pi2", "true", "false", "T", "F"};

struct FParser {
  const std::string& s;
  size_t i = 0;
  int pair_depth = 0;

  explicit FParser(const std::string& text) : s(text) {}

  [[noreturn]] void fail(const std::string& msg) {
    throw std::runtime_error("formula syntax error at offset " + std::to_string(i) + ": " + msg);
  }
  void skip() {
    while (i < s.size() && isspace(static_cast<unsigned char>(s[i]))) i++;
  }
  bool peek_sym(const std::string& tok) {
    skip();
    if (s.compare(i, tok.size(), tok) != 0) return false;
    if (tok == "=" && (s.compare(i, 2, "=>") == 0 || s.compare(i, 2, "==") == 0)) return false;
    if (tok == "!" && s.compare(i, 2, "!=") == 0) return false;
    if (tok == "<" &&
        (s.compare(i, 2, "<=") == 0 || s.compare(i, 2, "<!") == 0))
      return false;
    if (tok == ">" && s.compare(i, 2, ">=") == 0) return false;
    if (tok == "~" && s.compare(i, 2, "~>") == 0) return false;
    if (tok == "-" && s.compare(i, 2, "->") == 0) return false;
    if (tok == "[" && s.compare(i, 2, "[!") == 0) return false;
    return true;
  }
  bool eat_sym(const std::string& tok) {
    if (!peek_sym(tok)) return false;
    i += tok.size();
    return true;
  }
  void expect_sym(const std::string& tok) {
    if (!eat_sym(tok)) fail("expected '" + tok + "'");
  }
  bool peek_kw(const std::string& kw) {
    skip();
    if (s.compare(i, kw.size(), kw) != 0) return false;
    size_t e = i + kw.size();
    if (e < s.size() && (isalnum(static_cast<unsigned char>(s[e])) || s[e] == '_' || s[e] == '\'')) return false;
    return true;
  }
  bool eat_kw(const std::string& kw) {
    if (!peek_kw(kw)) return false;
    i += kw.size();
    return true;
  }
  bool at_ident() {
    skip();
    if (i >= s.size()) return false;
    if (!(isalpha(static_cast<unsigned char>(s[i])) || s[i] == '_')) return false;
    size_t j = i;
    while (j < s.size() && (isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '\'')) j++;
    return !kFKeywords.count(s.substr(i, j - i));
  }
  std::string ident() {
    skip();
    size_t j = i;
    if (j < s.size() && (isalpha(static_cast<unsigned char>(s[j])) || s[j] == '_')) {
      j++;
      while (j < s.size() && (isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '\'')) j++;
    }
    if (j == i) fail("expected identifier");
    std::string r = s.substr(i, j - i);
    if (kFKeywords.count(r)) fail("'" + r + "' is a keyword");
    i = j;
    return r;
  }

  TypePtr type_to_dot_or(const std::string& stop2) {
    // Scan the annotation up to the next '.' or stop token at depth 0
    // ('mu X.' dots excluded), then hand to the type parser.
    skip();
    size_t start = i;
    int depth = 0;
    bool in_mu = false;
    while (i < s.size()) {
      char c = s[i];
      if (c == '(' || c == '[') depth++;
      if (c == ')' || c == ']') {
        if (depth == 0) break;
        depth--;
      }
      if (depth == 0 && !stop2.empty() && s.compare(i, stop2.size(), stop2) == 0) break;
      if (c == '.' && depth == 0) {
        if (in_mu)
          in_mu = false;
        else
          break;
      }
      if (c == 'm' && s.compare(i, 2, "mu") == 0 &&
          (i + 2 >= s.size() || !isalnum(static_cast<unsigned char>(s[i + 2]))))
        in_mu = true;
      i++;
    }
    try {
      return parse_type(s.substr(start, i - start));
    } catch (const std::exception& e) {
      fail(std::string("bad type annotation: ") + e.what());
    }
  }

  // ---- logical terms ----

  TermPtr term() { return t_cmp(); }

  TermPtr t_cmp() {
    TermPtr l = t_add();
    if (eat_sym("<=")) return m_op("le", {l, t_add()});
    if (pair_depth == 0 && eat_sym(">=")) return m_op("ge", {l, t_add()});
    if (eat_sym("<")) return m_op("lt", {l, t_add()});
    if (pair_depth == 0 && eat_sym(">")) return m_op("gt", {l, t_add()});
    return l;
  }
  TermPtr t_add() {
    TermPtr l = t_mul();
    while (true) {
      if (eat_sym("+")) {
        l = m_op("add", {l, t_mul()});
      } else if (peek_sym("-")) {
        eat_sym("-");
        l = m_op("sub", {l, t_mul()});
      } else {
        return l;
      }
    }
  }
  TermPtr t_mul() {
    TermPtr l = t_prefix();
    while (eat_sym("*")) l = m_op("mul", {l, t_prefix()});
    return l;
  }
  TermPtr t_prefix() {
    if (eat_sym("!")) return m_deref(t_prefix());
    return t_atom();
  }
  TermPtr t_paren_arg() {
    expect_sym("(");
    int save = pair_depth;
    pair_depth = 0;
    TermPtr t = term();
    pair_depth = save;
    expect_sym(")");
    return t;
  }
  TermPtr t_atom() {
    skip();
    if (i >= s.size()) fail("unexpected end of input in term");
    char c = s[i];
    if (isdigit(static_cast<unsigned char>(c))) {
      std::uint64_t n = 0;
      while (i < s.size() && isdigit(static_cast<unsigned char>(s[i]))) n = n * 10 + (s[i++] - '0');
      return m_nat(n);
    }
    if (c == '(') {
      size_t save = i;
      i++;
      skip();
      if (eat_sym(")")) return m_unit();
      i = save;
      return t_paren_arg();
    }
    if (peek_sym("<")) {
      eat_sym("<");
      pair_depth++;
      TermPtr a = term();
      expect_sym(",");
      TermPtr b = term();
      pair_depth--;
      expect_sym(">");
      return m_pair(a, b);
    }
    if (eat_kw("true")) return m_bool(true);
    if (eat_kw("false")) return m_bool(false);
    if (eat_kw("not")) return m_op("not", {t_paren_arg()});
    if (eat_kw("fact")) return m_op("fact", {t_paren_arg()});
    if (eat_kw("odd")) return m_op("odd", {t_paren_arg()});
    if (eat_kw("even")) return m_op("even", {t_paren_arg()});
    if (eat_kw("pi1")) return m_proj(1, t_paren_arg());
    if (eat_kw("pi2")) return m_proj(2, t_paren_arg());
    if (eat_kw("inj1")) return t_inj(1);
    if (eat_kw("inj2")) return t_inj(2);
    if (at_ident()) return m_var(ident());
    fail("unexpected character '" + std::string(1, c) + "' in term");
  }
  TermPtr t_inj(int idx) {
    TypePtr annot = nullptr;
    if (eat_sym("[")) {
      skip();
      size_t start = i;
      int depth = 0;
      while (i < s.size() && (s[i] != ']' || depth > 0)) {
        if (s[i] == '[' || s[i] == '(') depth++;
        if (s[i] == ')') depth--;
        i++;
      }
      std::string txt = s.substr(start, i - start);
      expect_sym("]");
      try {
        annot = parse_type(txt);
      } catch (const std::exception& e) {
        fail(std::string("bad type annotation: ") + e.what());
      }
    }
    return m_inj(idx, t_paren_arg(), annot);
  }

  // ---- formulae ----

  FormulaPtr formula() { return f_impl(); }

  FormulaPtr f_impl() {
    FormulaPtr l = f_or_();
    if (eat_sym("=>")) return f_implies(l, f_impl());
    return l;
  }
  FormulaPtr f_or_() {
    FormulaPtr l = f_and_();
    while (eat_sym("|")) l = f_or(l, f_and_());
    return l;
  }
  FormulaPtr f_and_() {
    FormulaPtr l = f_unary();
    while (eat_sym("&")) l = f_and(l, f_unary());
    return l;
  }

  std::vector<TermPtr> effect_list() {
    std::vector<TermPtr> eff;
    expect_sym("[");
    skip();
    if (!eat_sym("]")) {
      do {
        eff.push_back(term());
      } while (eat_sym(","));
      expect_sym("]");
    }
    return eff;
  }

  // Continues an evaluation formula after "e1 . e2" has been read.
  FormulaPtr eval_tail(TermPtr e1, TermPtr e2) {
    std::string anchor;
    FormulaPtr body;
    if (eat_kw("dv")) {
      anchor = "_z";
      body = f_true();
    } else if (peek_sym("=")) {
      eat_sym("=");
      // An anchor is a bare variable; any other term is the equality sugar.
      size_t save = i;
      if (at_ident()) {
        std::string z = ident();
        skip();
        if (peek_sym("{")) {
          anchor = z;
        } else {
          i = save;
        }
      }
      if (anchor.empty()) {
        TermPtr e = term();
        anchor = "_z";
        expect_sym("{");
        FormulaPtr c = formula();
        expect_sym("}");
        body = f_and(f_eq(m_var(anchor), e), c);
        return finish_eval(std::move(e1), std::move(e2), anchor, body);
      }
      expect_sym("{");
      body = formula();
      expect_sym("}");
    } else if (peek_sym("{")) {
      // e1 . e2 {C}: unit anchor.
      eat_sym("{");
      anchor = "_z";
      FormulaPtr c = formula();
      expect_sym("}");
      body = f_and(f_eq(m_var(anchor), m_unit()), c);
    } else {
      fail("expected '=', '{' or 'dv' in evaluation formula");
    }
    return finish_eval(std::move(e1), std::move(e2), anchor, body);
  }

  FormulaPtr finish_eval(TermPtr e1, TermPtr e2, const std::string& anchor, FormulaPtr body) {
    skip();
    if (eat_sym("@")) return f_eval_at(std::move(e1), std::move(e2), anchor, body, effect_list());
    return f_eval(std::move(e1), std::move(e2), anchor, body);
  }

  // Relation continuation after a leading term.
  FormulaPtr term_relation(TermPtr l) {
    if (eat_sym("=")) return f_eq(l, term());
    if (eat_sym("!=")) return f_not(f_eq(l, term()));
    if (eat_sym("~>")) return f_reach(l, term());
    if (eat_sym("#")) {
      // tuple sugar: e # [e1, ..., en] is a conjunction
      skip();
      if (peek_sym("[")) {
        auto rs = effect_list();
        if (rs.empty()) fail("empty # list");
        FormulaPtr acc = f_notreach(l, rs[0]);
        for (size_t k = 1; k < rs.size(); k++) acc = f_and(acc, f_notreach(l, rs[k]));
        return acc;
      }
      return f_notreach(l, term());
    }
    if (eat_sym(".")) {
      TermPtr e2 = term();
      return eval_tail(std::move(l), std::move(e2));
    }
    // Bare boolean term C stands for C = true.
    return f_eq(l, m_bool(true));
  }

  std::vector<std::pair<std::string, TypePtr>> binder_list() {
    std::vector<std::pair<std::string, TypePtr>> out;
    do {
      std::string x = ident();
      TypePtr t = nullptr;
      if (eat_sym(":")) t = type_to_dot_or(",");
      out.emplace_back(x, t);
    } while (eat_sym(","));
    expect_sym(".");
    return out;
  }

  bool is_tyvar_name(const std::string& x) {
    return !x.empty() && isupper(static_cast<unsigned char>(x[0]));
  }

  FormulaPtr f_unary() {
    skip();
    if (i >= s.size()) fail("unexpected end of formula");
    if (eat_kw("T")) return f_true();
    if (eat_kw("F")) return f_false();
    if (eat_sym("~")) return f_not(f_unary());
    if (eat_kw("box")) return f_always(f_unary());
    if (eat_kw("dia")) return f_someday(f_unary());
    bool is_all = peek_kw("all");
    if (is_all || peek_kw("ex")) {
      eat_kw(is_all ? "all" : "ex");
      auto bs = binder_list();
      FormulaPtr body = f_impl();
      for (auto it = bs.rbegin(); it != bs.rend(); ++it) {
        if (!it->second && is_tyvar_name(it->first))
          body = is_all ? f_forall_ty(it->first, body) : f_exists_ty(it->first, body);
        else
          body = is_all ? f_forall(it->first, it->second, body)
                        : f_exists(it->first, it->second, body);
      }
      return body;
    }
    bool is_nubar = peek_kw("nubar");
    if (is_nubar || peek_kw("nu")) {
      eat_kw(is_nubar ? "nubar" : "nu");
      auto bs = binder_list();
      FormulaPtr body = f_impl();
      for (auto it = bs.rbegin(); it != bs.rend(); ++it)
        body = is_nubar ? f_nubar(it->first, it->second, body)
                        : f_nu(it->first, it->second, body);
      return body;
    }
    if (s.compare(i, 2, "[!") == 0) {
      i += 2;
      std::vector<TermPtr> subjects;
      do {
        subjects.push_back(term());
      } while (eat_sym(","));
      expect_sym("]");
      FormulaPtr body = f_unary();
      for (auto it = subjects.rbegin(); it != subjects.rend(); ++it)
        body = f_allcontent(*it, body);
      return body;
    }
    if (s.compare(i, 2, "<!") == 0) {
      i += 2;
      pair_depth++;  // the closing '>' must not read as a comparison
      TermPtr subj = term();
      pair_depth--;
      expect_sym(">");
      return f_somecontent(subj, f_unary());
    }
    if (peek_sym("{")) {
      // Hoare sugar {C} e1 . e2 = z {C'} [@ ...]  ==  C => eval
      eat_sym("{");
      FormulaPtr pre = formula();
      expect_sym("}");
      TermPtr e1 = term();
      expect_sym(".");
      TermPtr e2 = term();
      FormulaPtr ev = eval_tail(std::move(e1), std::move(e2));
      return f_implies(pre, ev);
    }
    if (peek_sym("(")) {
      // Could be a parenthesized formula or a parenthesized term followed by
      // a relation; backtrack on relator.
      size_t save = i;
      eat_sym("(");
      try {
        FormulaPtr inner = formula();
        expect_sym(")");
        skip();
        bool relator = peek_sym("=") || peek_sym("!") || peek_sym("~") || peek_sym("#") ||
                       peek_sym(".") || peek_sym("+") || peek_sym("*") || peek_sym("-") ||
                       peek_sym("<=") || s.compare(i, 2, "~>") == 0;
        if (!relator) return inner;
      } catch (const std::runtime_error&) {
        // fall through to term parse
      }
      i = save;
      return term_relation(term());
    }
    return term_relation(term());
  }
};

// ---- desugaring of projections and non-variable content subjects ----

bool term_has_proj(const TermPtr& t) {
  if (t->kind == TermKind::Proj) return true;
  for (const auto& k : t->kids)
    if (term_has_proj(k)) return true;
  return false;
}

// Finds a projection whose argument is projection-free.
TermPtr find_inner_proj(const TermPtr& t) {
  for (const auto& k : t->kids)
    if (auto p = find_inner_proj(k)) return p;
  if (t->kind == TermKind::Proj) return t;
  return nullptr;
}

TermPtr term_replace(const TermPtr& t, const TermPtr& pat, const TermPtr& repl) {
  if (alpha_eq(t, pat)) return repl;
  bool changed = false;
  std::vector<TermPtr> kids;
  for (const auto& k : t->kids) {
    TermPtr r = term_replace(k, pat, repl);
    changed |= (r != k);
    kids.push_back(r);
  }
  if (!changed) return t;
  auto t2 = std::make_shared<Term>(*t);
  t2->kids = std::move(kids);
  return t2;
}

// Rewrites the term slots of a formula node so they contain no projections:
//   A[pi1(e)]  -->  ex p, q. (e = <p, q> & A[p])
FormulaPtr strip_projs(const FormulaPtr& atom, std::set<std::string> avoid) {
  auto f2 = std::make_shared<Formula>(*atom);
  std::vector<TermPtr*> slots;
  slots.push_back(&f2->e1);
  slots.push_back(&f2->e2);
  for (auto& e : f2->effects) slots.push_back(&e);

  struct Intro {
    std::string p, q;
    int idx;
    TermPtr arg;
  };
  std::vector<Intro> intros;
  while (true) {
    TermPtr proj = nullptr;
    for (TermPtr* sl : slots)
      if (*sl && (proj = find_inner_proj(*sl))) break;
    if (!proj) break;
    std::string p = fresh_name("p", avoid);
    avoid.insert(p);
    std::string q = fresh_name("q", avoid);
    avoid.insert(q);
    TermPtr pv = m_var(p);
    for (TermPtr* sl : slots)
      if (*sl) *sl = term_replace(*sl, proj, pv);
    intros.push_back({p, q, proj->idx, proj->kids[0]});
  }
  FormulaPtr body = f2;
  // Earlier introductions may bind variables used by later equations, so the
  // first introduction becomes the outermost quantifier.
  for (auto it = intros.rbegin(); it != intros.rend(); ++it) {
    TermPtr pv = m_var(it->p), qv = m_var(it->q);
    TermPtr pair = it->idx == 1 ? m_pair(pv, qv) : m_pair(qv, pv);
    body = f_exists(it->p, nullptr,
                    f_exists(it->q, nullptr, f_and(f_eq(it->arg, pair), body)));
  }
  return body;
}

FormulaPtr desugar_rec(const FormulaPtr& f, std::set<std::string> scope) {
  // Recurse first.
  Formula proto = *f;
  bool term_binder = f->kind == FKind::Forall || f->kind == FKind::Exists ||
                     f->kind == FKind::Nu || f->kind == FKind::NuBar || f->kind == FKind::Eval;
  std::set<std::string> inner = scope;
  if (term_binder) inner.insert(f->var);
  std::vector<FormulaPtr> kids;
  for (const auto& k : f->kids) kids.push_back(desugar_rec(k, inner));
  proto.kids = std::move(kids);
  FormulaPtr g = std::make_shared<const Formula>(std::move(proto));

  // Non-variable content subject: [!e]C = all x.(x = e => [!x]C), dually.
  if ((g->kind == FKind::AllContent || g->kind == FKind::SomeContent) &&
      g->e1->kind != TermKind::Var && !term_has_proj(g->e1)) {
    std::set<std::string> avoid = formula_free_vars(g);
    avoid.insert(scope.begin(), scope.end());
    std::string x = fresh_name("cx", avoid);
    if (g->kind == FKind::AllContent)
      return f_forall(x, nullptr,
                      f_implies(f_eq(m_var(x), g->e1), f_allcontent(m_var(x), g->kids[0])));
    return f_exists(x, nullptr,
                    f_and(f_eq(m_var(x), g->e1), f_somecontent(m_var(x), g->kids[0])));
  }

  // Projection elimination on atoms (and on the binding positions of
  // content/eval formulae).
  bool has_proj = (g->e1 && term_has_proj(g->e1)) || (g->e2 && term_has_proj(g->e2));
  for (const auto& e : g->effects) has_proj |= term_has_proj(e);
  if (!has_proj) return g;

  std::set<std::string> avoid = formula_free_vars(g);
  avoid.insert(scope.begin(), scope.end());
  FormulaPtr stripped = strip_projs(g, avoid);
  // The introduced existentials may themselves wrap a non-variable content
  // subject; rerun until stable.
  if (!formula_alpha_eq(stripped, g)) return desugar_rec(stripped, scope);
  return stripped;
}

}  // namespace

FormulaPtr desugar(const FormulaPtr& f) { return desugar_rec(f, {}); }

FormulaPtr parse_formula(const std::string& text) {
  FParser p(text);
  FormulaPtr f = p.formula();
  p.skip();
  if (p.i != text.size()) p.fail("trailing input");
  return desugar(f);
}

}  // namespace lsl
