#include "lsl/parser.hpp"

#include <cctype>
#include <stdexcept>
#include <vector>

namespace lsl {

namespace {

const std::set<std::string> kKeywords = {"fun", "mu",   "if",   "then", "else", "case", "of",
                                         "let", "in",   "ref",  "true", "false", "not",
                                         "inj1", "inj2", "pi1", "pi2", "fact", "odd", "even"};

struct PParser {
  const std::string& s;
  size_t i = 0;
  bool allow_loc;
  // While > 0 we are directly inside a pair literal, so a top-level '>' closes
  // the pair and must not be read as a comparison. Parentheses reset it.
  int pair_depth = 0;

  PParser(const std::string& text, bool allow_locations) : s(text), allow_loc(allow_locations) {}

  [[noreturn]] void fail(const std::string& msg) {
    int line = 1, col = 1;
    for (size_t j = 0; j < i && j < s.size(); j++) {
      if (s[j] == '\n') {
        line++;
        col = 1;
      } else {
        col++;
      }
    }
    throw std::runtime_error("syntax error at line " + std::to_string(line) + ", column " +
                             std::to_string(col) + ": " + msg);
  }

  void skip() {
    while (i < s.size()) {
      if (isspace(static_cast<unsigned char>(s[i]))) {
        i++;
      } else if (s[i] == '/' && i + 1 < s.size() && s[i + 1] == '/') {
        while (i < s.size() && s[i] != '\n') i++;
      } else {
        break;
      }
    }
  }

  bool peek_sym(const std::string& tok) {
    skip();
    if (s.compare(i, tok.size(), tok) != 0) return false;
    // Do not read ':=' as ':' etc.
    if (tok == ":" && s.compare(i, 2, ":=") == 0) return false;
    if (tok == "=" && (s.compare(i, 2, "==") == 0)) return false;
    if (tok == "<" && (s.compare(i, 2, "<=") == 0)) return false;
    if (tok == ">" && (s.compare(i, 2, ">=") == 0)) return false;
    if (tok == "-" && s.compare(i, 2, "->") == 0) return false;
    return true;
  }
  bool eat_sym(const std::string& tok) {
    if (!peek_sym(tok)) return false;
    i += tok.size();
    return true;
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
  void expect_sym(const std::string& tok) {
    if (!eat_sym(tok)) fail("expected '" + tok + "'");
  }
  void expect_kw(const std::string& kw) {
    if (!eat_kw(kw)) fail("expected '" + kw + "'");
  }

  bool at_ident() {
    skip();
    if (i >= s.size()) return false;
    if (!(isalpha(static_cast<unsigned char>(s[i])) || s[i] == '_')) return false;
    // Look ahead for keywords.
    size_t j = i;
    while (j < s.size() && (isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '\'')) j++;
    return !kKeywords.count(s.substr(i, j - i));
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
    if (kKeywords.count(r)) fail("'" + r + "' is a keyword");
    i = j;
    return r;
  }

  TypePtr type_annot() {
    // Parse a type up to the next '.' at depth 0 by delegating to parse_type
    // on the longest well-formed prefix; simpler: scan to matching '.' while
    // tracking parens, since '.' never occurs inside our type grammar except
    // after 'mu X'.
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
      if (c == '.' && depth == 0) {
        if (in_mu) {
          in_mu = false;  // the dot of 'mu X.'
        } else {
          break;
        }
      }
      if (c == 'm' && s.compare(i, 2, "mu") == 0 &&
          (i + 2 >= s.size() || !isalnum(static_cast<unsigned char>(s[i + 2])))) {
        in_mu = true;
      }
      i++;
    }
    std::string txt = s.substr(start, i - start);
    try {
      return parse_type(txt);
    } catch (const std::exception& e) {
      fail(std::string("bad type annotation '") + txt + "': " + e.what());
    }
  }

  // --- expression levels ---

  TermPtr seq() {
    TermPtr l = assign();
    skip();
    if (eat_sym(";")) {
      TermPtr r = seq();
      std::string p = fresh_name("_seq", free_vars(r));
      return m_app(m_lam(p, t_unit(), r), l);
    }
    return l;
  }

  TermPtr assign() {
    TermPtr l = cmp();
    if (eat_sym(":=")) {
      TermPtr r = cmp();
      return m_assign(l, r);
    }
    return l;
  }

  TermPtr cmp() {
    TermPtr l = add();
    skip();
    if (eat_sym("<=")) return m_op("le", {l, add()});
    if (pair_depth == 0 && eat_sym(">=")) return m_op("ge", {l, add()});
    if (eat_sym("=")) return m_op("eq", {l, add()});
    if (eat_sym("<")) return m_op("lt", {l, add()});
    if (pair_depth == 0 && eat_sym(">")) return m_op("gt", {l, add()});
    return l;
  }

  TermPtr add() {
    TermPtr l = mul();
    while (true) {
      skip();
      if (eat_sym("+")) {
        l = m_op("add", {l, mul()});
      } else if (peek_sym("-")) {
        eat_sym("-");
        l = m_op("sub", {l, mul()});
      } else {
        return l;
      }
    }
  }

  TermPtr mul() {
    TermPtr l = app();
    while (eat_sym("*")) l = m_op("mul", {l, app()});
    return l;
  }

  bool at_atom_start() {
    skip();
    if (i >= s.size()) return false;
    char c = s[i];
    if (c == '(' || c == '!' || c == '#' || isdigit(static_cast<unsigned char>(c))) return true;
    if (at_ident()) return true;
    return peek_kw("true") || peek_kw("false") || peek_kw("ref") || peek_kw("not") ||
           peek_kw("fact") || peek_kw("odd") || peek_kw("even") || peek_kw("inj1") ||
           peek_kw("inj2") || peek_kw("pi1") || peek_kw("pi2") || peek_kw("fun") ||
           peek_kw("mu") || peek_kw("if") || peek_kw("case") || peek_kw("let");
  }

  TermPtr app() {
    TermPtr l = prefix();
    while (at_atom_start()) {
      // keyword forms that extend right are not application arguments
      if (peek_kw("fun") || peek_kw("mu") || peek_kw("if") || peek_kw("case") || peek_kw("let"))
        break;
      l = m_app(l, prefix());
    }
    return l;
  }

  TermPtr prefix() {
    if (eat_sym("!")) return m_deref(prefix());
    return atom();
  }

  TermPtr paren_arg() {
    expect_sym("(");
    int save = pair_depth;
    pair_depth = 0;
    TermPtr m = seq();
    pair_depth = save;
    expect_sym(")");
    return m;
  }

  TermPtr atom() {
    skip();
    if (i >= s.size()) fail("unexpected end of input");
    char c = s[i];

    if (isdigit(static_cast<unsigned char>(c))) {
      std::uint64_t n = 0;
      while (i < s.size() && isdigit(static_cast<unsigned char>(s[i]))) n = n * 10 + (s[i++] - '0');
      return m_nat(n);
    }
    if (c == '#') {
      if (!allow_loc) fail("location literals are not allowed in source programs");
      i++;
      if (i >= s.size() || s[i] != 'l') fail("expected 'l' after '#'");
      i++;
      int n = 0;
      if (i >= s.size() || !isdigit(static_cast<unsigned char>(s[i]))) fail("expected label number");
      while (i < s.size() && isdigit(static_cast<unsigned char>(s[i]))) n = n * 10 + (s[i++] - '0');
      return m_loc(n);
    }
    if (c == '(') {
      size_t save = i;
      i++;
      skip();
      if (eat_sym(")")) return m_unit();
      i = save;
      return paren_arg();
    }
    if (c == '<') {
      i++;
      pair_depth++;
      TermPtr a = seq();
      expect_sym(",");
      TermPtr b = seq();
      pair_depth--;
      expect_sym(">");
      return m_pair(a, b);
    }
    if (eat_kw("true")) return m_bool(true);
    if (eat_kw("false")) return m_bool(false);
    if (eat_kw("ref")) return m_refnew(paren_arg());
    if (eat_kw("not")) return m_op("not", {paren_arg()});
    if (eat_kw("fact")) return m_op("fact", {paren_arg()});
    if (eat_kw("odd")) return m_op("odd", {paren_arg()});
    if (eat_kw("even")) return m_op("even", {paren_arg()});
    if (eat_kw("pi1")) return m_proj(1, paren_arg());
    if (eat_kw("pi2")) return m_proj(2, paren_arg());
    if (eat_kw("inj1")) return inj(1);
    if (eat_kw("inj2")) return inj(2);
    if (eat_kw("fun")) {
      skip();
      if (eat_sym("(")) {
        expect_sym(")");
        expect_sym(".");
        TermPtr body = seq();
        std::string p = fresh_name("_u", free_vars(body));
        return m_lam(p, t_unit(), body);
      }
      std::string x = ident();
      expect_sym(":");
      TypePtr t = type_annot();
      expect_sym(".");
      return m_lam(x, t, seq());
    }
    if (eat_kw("mu")) {
      std::string f = ident();
      expect_sym(":");
      TypePtr t = type_annot();
      expect_sym(".");
      TermPtr body = seq();
      if (body->kind != TermKind::Lam) fail("the body of 'mu' must be a 'fun' abstraction");
      return m_rec(f, t, body);
    }
    if (eat_kw("if")) {
      TermPtr cnd = seq();
      expect_kw("then");
      TermPtr th = seq();
      expect_kw("else");
      TermPtr el = seq();
      return m_if(cnd, th, el);
    }
    if (eat_kw("case")) {
      TermPtr scrut = seq();
      expect_kw("of");
      expect_sym("{");
      expect_kw("inj1");
      expect_sym("(");
      std::string x1 = ident();
      expect_sym(")");
      expect_sym(".");
      TermPtr b1 = seq();
      expect_sym("|");
      expect_kw("inj2");
      expect_sym("(");
      std::string x2 = ident();
      expect_sym(")");
      expect_sym(".");
      TermPtr b2 = seq();
      expect_sym("}");
      return m_case(scrut, x1, b1, x2, b2);
    }
    if (eat_kw("let")) {
      // let x = M (, y = N)* in B   desugars to nested (fun x.B') M
      std::vector<std::pair<std::string, TermPtr>> binds;
      do {
        std::string x = ident();
        expect_sym("=");
        binds.emplace_back(x, assign());
      } while (eat_sym(","));
      expect_kw("in");
      TermPtr body = seq();
      for (auto it = binds.rbegin(); it != binds.rend(); ++it)
        body = m_app(m_lam(it->first, nullptr, body), it->second);
      return body;
    }
    if (at_ident()) return m_var(ident());
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  TermPtr inj(int idx) {
    TypePtr annot = nullptr;
    if (eat_sym("[")) {
      skip();
      size_t start = i;
      int depth = 0;
      while (i < s.size() && (s[i] != ']' || depth > 0)) {
        if (s[i] == '[' || s[i] == '(') depth++;
        if (s[i] == ')' ) depth--;
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
    return m_inj(idx, paren_arg(), annot);
  }
};

TermPtr parse_impl(const std::string& text, bool allow_loc) {
  PParser p(text, allow_loc);
  TermPtr m = p.seq();
  p.skip();
  if (p.i != text.size()) p.fail("trailing input");
  return m;
}

}  // namespace

TermPtr parse_program(const std::string& text) { return parse_impl(text, false); }
TermPtr parse_value_literal(const std::string& text) { return parse_impl(text, true); }

}  // namespace lsl
