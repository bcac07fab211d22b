// Proof-script parsing: a line-oriented format with variable declarations,
// program and formula abbreviations, and numbered judgement steps.

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "lsl/parser.hpp"
#include "lsl/proof.hpp"

namespace lsl {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::runtime_error("script line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool is_ident(const std::string& s) {
  if (s.empty() || !(std::isalpha((unsigned char)s[0]) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum((unsigned char)c) || c == '_' || c == '\'')) return false;
  return true;
}

// Depth of {...}, [...] and (...) combined; used to find top-level delimiters.
struct DepthScan {
  int brace = 0, brack = 0, paren = 0;
  void feed(char c) {
    if (c == '{') brace++;
    else if (c == '}') brace--;
    else if (c == '[') brack++;
    else if (c == ']') brack--;
    else if (c == '(') paren++;
    else if (c == ')') paren--;
  }
  bool top() const { return brace == 0 && brack == 0 && paren == 0; }
};

// Splits `s` at top-level commas.
std::vector<std::string> split_top_commas(const std::string& s) {
  std::vector<std::string> out;
  DepthScan d;
  size_t start = 0;
  for (size_t i = 0; i < s.size(); i++) {
    if (s[i] == ',' && d.top()) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
    d.feed(s[i]);
  }
  std::string last = trim(s.substr(start));
  if (!last.empty() || !out.empty()) out.push_back(last);
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

// Replaces whole-identifier occurrences of `name` by `repl` in formula text.
std::string replace_ident(const std::string& text, const std::string& name,
                          const std::string& repl) {
  std::string out;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isalpha((unsigned char)c) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum((unsigned char)text[j]) || text[j] == '_' || text[j] == '\''))
        j++;
      std::string tok = text.substr(i, j - i);
      out += (tok == name) ? repl : tok;
      i = j;
    } else {
      out += c;
      i++;
    }
  }
  return out;
}

struct FDef {
  std::vector<std::string> params;
  std::string text;  // fully expanded body text
};

// Expands $Name and $Name(arg,...) references using earlier definitions.
std::string expand_refs(const std::string& text, const std::map<std::string, FDef>& fdefs,
                        int line) {
  std::string out;
  size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '$') {
      out += text[i++];
      continue;
    }
    size_t j = i + 1;
    while (j < text.size() &&
           (std::isalnum((unsigned char)text[j]) || text[j] == '_' || text[j] == '\''))
      j++;
    std::string name = text.substr(i + 1, j - i - 1);
    auto it = fdefs.find(name);
    if (it == fdefs.end()) fail(line, "unknown formula abbreviation $" + name);
    std::string body = it->second.text;
    size_t k = j;
    while (k < text.size() && std::isspace((unsigned char)text[k])) k++;
    if (!it->second.params.empty()) {
      if (k >= text.size() || text[k] != '(')
        fail(line, "$" + name + " expects " + std::to_string(it->second.params.size()) +
                       " argument(s)");
      DepthScan d;
      size_t start = k;
      size_t e = k;
      for (; e < text.size(); e++) {
        d.feed(text[e]);
        if (d.top() && text[e] == ')') break;
      }
      if (e >= text.size()) fail(line, "unterminated argument list for $" + name);
      std::vector<std::string> args = split_top_commas(text.substr(start + 1, e - start - 1));
      if (args.size() != it->second.params.size())
        fail(line, "$" + name + " expects " + std::to_string(it->second.params.size()) +
                       " argument(s), got " + std::to_string(args.size()));
      for (size_t p = 0; p < args.size(); p++)
        body = replace_ident(body, it->second.params[p], "(" + args[p] + ")");
      j = e + 1;
    }
    out += "(" + body + ")";
    i = j;
  }
  return out;
}

// Capture-checked substitution of an arbitrary (not necessarily value) term
// for a free variable; throws when a free name of the replacement would be
// captured by a binder.
TermPtr subst_any(const TermPtr& body, const TermPtr& repl, const std::string& x, int line) {
  std::set<std::string> rfv = free_vars(repl);
  std::function<TermPtr(const TermPtr&)> go = [&](const TermPtr& t) -> TermPtr {
    if (t->kind == TermKind::Var) return t->name == x ? repl : t;
    std::vector<std::string> binders;
    switch (t->kind) {
      case TermKind::Lam:
        binders = {t->name};
        break;
      case TermKind::Rec:
        binders = {t->name};
        break;
      case TermKind::Case:
        binders = {t->name, t->name2};
        break;
      default:
        break;
    }
    for (const auto& b : binders) {
      if (b == x) return t;  // shadowed
      if (rfv.count(b))
        fail(line, "abbreviation expansion would capture variable " + b);
    }
    Term c = *t;
    if (t->kind == TermKind::Case) {
      c.kids[0] = go(t->kids[0]);
      if (t->name != x) c.kids[1] = go(t->kids[1]);
      if (t->name2 != x) c.kids[2] = go(t->kids[2]);
    } else {
      for (auto& k : c.kids) k = go(k);
    }
    return std::make_shared<const Term>(c);
  };
  return go(body);
}

TermPtr expand_defs(TermPtr prog, const std::map<std::string, TermPtr>& defs, int line) {
  std::set<std::string> fv = free_vars(prog);
  for (const auto& [name, body] : defs)
    if (fv.count(name)) prog = subst_any(prog, body, name, line);
  return prog;
}

// Finds the position just past the matching '}' for the '{' at s[open].
size_t match_brace(const std::string& s, size_t open, int line) {
  int depth = 0;
  for (size_t i = open; i < s.size(); i++) {
    if (s[i] == '{') depth++;
    if (s[i] == '}' && --depth == 0) return i + 1;
  }
  fail(line, "unbalanced '{'");
}

}  // namespace

ProofScript parse_script(const std::string& text) {
  ProofScript sc;
  std::map<std::string, FDef> fdefs;
  std::set<std::string> rules;
  for (const auto& r : rule_names()) rules.insert(r);

  std::istringstream in(text);
  std::string raw;
  int ln = 0;
  std::set<int> seen_idx;
  while (std::getline(in, raw)) {
    ln++;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;

    if (line.rfind("var ", 0) == 0) {
      size_t c = line.find(':');
      if (c == std::string::npos) fail(ln, "expected `var name : Type`");
      std::string name = trim(line.substr(4, c - 4));
      if (!is_ident(name)) fail(ln, "bad variable name '" + name + "'");
      sc.env.vars[name] = parse_type(trim(line.substr(c + 1)));
      continue;
    }
    if (line.rfind("def ", 0) == 0) {
      size_t eq = line.find('=');
      if (eq == std::string::npos) fail(ln, "expected `def Name = program`");
      std::string name = trim(line.substr(4, eq - 4));
      if (!is_ident(name)) fail(ln, "bad abbreviation name '" + name + "'");
      TermPtr prog;
      try {
        prog = parse_program(trim(line.substr(eq + 1)));
      } catch (const std::exception& ex) {
        fail(ln, std::string("program parse error: ") + ex.what());
      }
      sc.defs[name] = expand_defs(prog, sc.defs, ln);
      continue;
    }
    if (line.rfind("defc ", 0) == 0) {
      size_t eq = line.find('=');
      if (eq == std::string::npos) fail(ln, "expected `defc Name = formula`");
      std::string head = trim(line.substr(5, eq - 5));
      std::vector<std::string> params;
      size_t lp = head.find('(');
      if (lp != std::string::npos) {
        if (head.back() != ')') fail(ln, "bad parameter list");
        params = split_top_commas(head.substr(lp + 1, head.size() - lp - 2));
        head = trim(head.substr(0, lp));
      }
      if (!is_ident(head)) fail(ln, "bad abbreviation name '" + head + "'");
      std::string body = expand_refs(trim(line.substr(eq + 1)), fdefs, ln);
      fdefs[head] = {params, body};
      try {
        sc.fdefs[head] = parse_formula(body);
      } catch (const std::exception& ex) {
        fail(ln, std::string("formula parse error in defc: ") + ex.what());
      }
      continue;
    }

    // Step line: `N. judgement by Rule(...)`.
    size_t dot = line.find('.');
    if (dot == std::string::npos) fail(ln, "expected a step `N. ... by Rule`");
    int idx = 0;
    try {
      idx = std::stoi(line.substr(0, dot));
    } catch (const std::exception&) {
      fail(ln, "expected a step number before '.'");
    }
    if (seen_idx.count(idx)) fail(ln, "duplicate step index " + std::to_string(idx));
    std::string rest = trim(line.substr(dot + 1));

    // Locate the top-level ` by ` separator (rightmost).
    size_t bypos = std::string::npos;
    {
      DepthScan d;
      for (size_t i = 0; i + 4 <= rest.size(); i++) {
        if (d.top() && rest.compare(i, 4, " by ") == 0) bypos = i;
        d.feed(rest[i]);
      }
    }
    if (bypos == std::string::npos) fail(ln, "missing `by Rule` clause");
    std::string jtext = trim(rest.substr(0, bypos));
    std::string rtext = trim(rest.substr(bypos + 4));

    ProofStep st;
    st.index = idx;
    st.text = line;

    // --- rule clause ---
    size_t rp = rtext.find('(');
    std::string rname = trim(rp == std::string::npos ? rtext : rtext.substr(0, rp));
    if (rname != "assume" && !rules.count(rname)) fail(ln, "unknown rule '" + rname + "'");
    st.rule = rname;
    if (rp != std::string::npos) {
      if (rtext.back() != ')') fail(ln, "unterminated rule argument list");
      std::string args = rtext.substr(rp + 1, rtext.size() - rp - 2);
      DepthScan d;
      size_t start = 0;
      std::vector<std::string> parts;
      for (size_t i = 0; i <= args.size(); i++) {
        if (i == args.size() || (args[i] == ';' && d.top())) {
          std::string p = trim(args.substr(start, i - start));
          if (!p.empty()) parts.push_back(p);
          start = i + 1;
        }
        if (i < args.size()) d.feed(args[i]);
      }
      for (const auto& p : parts) {
        size_t e = p.find('=');
        if (e == std::string::npos) fail(ln, "rule argument `" + p + "` is not key=value");
        std::string key = trim(p.substr(0, e)), val = trim(p.substr(e + 1));
        if (key == "prem") {
          for (const auto& n : split_top_commas(val)) {
            try {
              st.premises.push_back(std::stoi(n));
            } catch (const std::exception&) {
              fail(ln, "bad premise index '" + n + "'");
            }
          }
        } else {
          st.hints[key] = val;
        }
      }
    }
    for (int p : st.premises)
      if (!seen_idx.count(p))
        fail(ln, "premise " + std::to_string(p) + " does not name an earlier step");

    // --- judgement ---
    if (jtext.empty() || jtext[0] != '{') fail(ln, "judgement must start with {pre}");
    size_t pre_end = match_brace(jtext, 0, ln);
    std::string pre_text = expand_refs(jtext.substr(1, pre_end - 2), fdefs, ln);
    std::string tail = trim(jtext.substr(pre_end));

    // Optional trailing effect set `@ [e, ...]`.
    {
      DepthScan d;
      size_t at = std::string::npos;
      for (size_t i = 0; i < tail.size(); i++) {
        if (tail[i] == '@' && d.top()) at = i;
        d.feed(tail[i]);
      }
      if (at != std::string::npos) {
        std::string eff = trim(tail.substr(at + 1));
        if (!eff.empty() && eff.front() == '[' && eff.back() == ']')
          eff = eff.substr(1, eff.size() - 2);
        st.j.located = true;
        for (const auto& e : split_top_commas(eff)) {
          try {
            st.j.effects.push_back(parse_program(e));
          } catch (const std::exception& ex) {
            fail(ln, std::string("bad effect term: ") + ex.what());
          }
        }
        tail = trim(tail.substr(0, at));
      }
    }

    // The post-condition is the last balanced brace group.
    if (tail.empty() || tail.back() != '}') fail(ln, "judgement must end with {post}");
    size_t post_open = std::string::npos;
    {
      int depth = 0;
      for (size_t i = tail.size(); i-- > 0;) {
        if (tail[i] == '}') depth++;
        if (tail[i] == '{' && --depth == 0) {
          post_open = i;
          break;
        }
      }
    }
    if (post_open == std::string::npos) fail(ln, "unbalanced '}' in judgement");
    std::string post_text = expand_refs(tail.substr(post_open + 1, tail.size() - post_open - 2),
                                        fdefs, ln);
    std::string ptext = trim(tail.substr(0, post_open));

    // Optional `:anchor` suffix on the program part.
    std::string anchor;
    {
      DepthScan d;
      size_t colon = std::string::npos;
      for (size_t i = 0; i < ptext.size(); i++) {
        if (ptext[i] == ':' && d.top()) colon = i;
        d.feed(ptext[i]);
      }
      if (colon != std::string::npos) {
        std::string suffix = trim(ptext.substr(colon + 1));
        if (is_ident(suffix)) {
          anchor = suffix;
          ptext = trim(ptext.substr(0, colon));
        }
      }
    }
    if (ptext.empty()) fail(ln, "empty program in judgement");

    try {
      st.j.program = expand_defs(parse_program(ptext), sc.defs, ln);
    } catch (const std::exception& ex) {
      fail(ln, std::string("program parse error: ") + ex.what());
    }
    try {
      st.j.pre = parse_formula(pre_text);
    } catch (const std::exception& ex) {
      fail(ln, std::string("pre-condition parse error: ") + ex.what());
    }
    FormulaPtr post;
    try {
      post = parse_formula(post_text);
    } catch (const std::exception& ex) {
      fail(ln, std::string("post-condition parse error: ") + ex.what());
    }
    if (anchor.empty()) {
      // {C} M {C'} abbreviates {C} M :u {u = () & C'} with u fresh.
      std::set<std::string> used = formula_free_vars(post);
      std::set<std::string> pv = free_vars(st.j.program);
      used.insert(pv.begin(), pv.end());
      std::set<std::string> prefv = formula_free_vars(st.j.pre);
      used.insert(prefv.begin(), prefv.end());
      anchor = fresh_name("u", used);
      post = f_and(f_eq(m_var(anchor), m_unit()), post);
    }
    st.j.anchor = anchor;
    st.j.post = post;

    seen_idx.insert(idx);
    sc.steps.push_back(std::move(st));
  }
  return sc;
}

}  // namespace lsl
