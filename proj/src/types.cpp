#include "lsl/types.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace lsl {

namespace {

TypePtr mk(TypeKind k, TypePtr a = nullptr, TypePtr b = nullptr, std::string name = "") {
  auto t = std::make_shared<TypeExpr>();
  t->kind = k;
  t->a = std::move(a);
  t->b = std::move(b);
  t->name = std::move(name);
  return t;
}

}  // namespace

TypePtr t_unit() {
  static TypePtr t = mk(TypeKind::Unit);
  return t;
}
TypePtr t_bool() {
  static TypePtr t = mk(TypeKind::Bool);
  return t;
}
TypePtr t_nat() {
  static TypePtr t = mk(TypeKind::Nat);
  return t;
}
TypePtr t_arrow(TypePtr arg, TypePtr res) { return mk(TypeKind::Arrow, std::move(arg), std::move(res)); }
TypePtr t_prod(TypePtr l, TypePtr r) { return mk(TypeKind::Prod, std::move(l), std::move(r)); }
TypePtr t_sum(TypePtr l, TypePtr r) { return mk(TypeKind::Sum, std::move(l), std::move(r)); }
TypePtr t_ref(TypePtr content) { return mk(TypeKind::Ref, std::move(content)); }
TypePtr t_var(std::string name) { return mk(TypeKind::Var, nullptr, nullptr, std::move(name)); }
TypePtr t_mu(std::string binder, TypePtr body) {
  return mk(TypeKind::Mu, std::move(body), nullptr, std::move(binder));
}

bool is_base_type(const TypePtr& t) {
  return t->kind == TypeKind::Unit || t->kind == TypeKind::Bool || t->kind == TypeKind::Nat;
}

TypePtr type_subst(const TypePtr& t, const std::string& var, const TypePtr& repl) {
  switch (t->kind) {
    case TypeKind::Unit:
    case TypeKind::Bool:
    case TypeKind::Nat:
      return t;
    case TypeKind::Var:
      return t->name == var ? repl : t;
    case TypeKind::Arrow:
      return t_arrow(type_subst(t->a, var, repl), type_subst(t->b, var, repl));
    case TypeKind::Prod:
      return t_prod(type_subst(t->a, var, repl), type_subst(t->b, var, repl));
    case TypeKind::Sum:
      return t_sum(type_subst(t->a, var, repl), type_subst(t->b, var, repl));
    case TypeKind::Ref:
      return t_ref(type_subst(t->a, var, repl));
    case TypeKind::Mu: {
      if (t->name == var) return t;  // shadowed
      // The replacement is always closed in our usage (mu-unfolding), so no
      // capture can occur; guard anyway for safety.
      if (free_type_vars(repl).count(t->name)) {
        std::string fresh = t->name + "'";
        while (free_type_vars(repl).count(fresh) || free_type_vars(t->a).count(fresh)) fresh += "'";
        TypePtr renamed = type_subst(t->a, t->name, t_var(fresh));
        return t_mu(fresh, type_subst(renamed, var, repl));
      }
      return t_mu(t->name, type_subst(t->a, var, repl));
    }
  }
  throw std::logic_error("type_subst: bad kind");
}

TypePtr unfold_mu(const TypePtr& t) {
  if (t->kind != TypeKind::Mu) return t;
  return type_subst(t->a, t->name, t);
}

namespace {

// Structural comparison with an assumption set of mu-pairs already visited
// (coinductive hypothesis) and a renaming for bound type variables.
bool teq(const TypePtr& a, const TypePtr& b, int depth,
         std::set<std::pair<std::string, std::string>>& assumed,
         std::map<std::string, std::string>& ren) {
  if (depth < 0) return false;
  if (a->kind == TypeKind::Mu || b->kind == TypeKind::Mu) {
    std::string ka = print_type(a), kb = print_type(b);
    auto key = std::make_pair(ka, kb);
    if (assumed.count(key)) return true;
    assumed.insert(key);
    bool r = teq(unfold_mu(a), unfold_mu(b), depth - 1, assumed, ren);
    if (!r) assumed.erase(key);
    return r;
  }
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TypeKind::Unit:
    case TypeKind::Bool:
    case TypeKind::Nat:
      return true;
    case TypeKind::Var: {
      auto it = ren.find(a->name);
      if (it != ren.end()) return it->second == b->name;
      return a->name == b->name;
    }
    case TypeKind::Arrow:
    case TypeKind::Prod:
    case TypeKind::Sum:
      return teq(a->a, b->a, depth, assumed, ren) && teq(a->b, b->b, depth, assumed, ren);
    case TypeKind::Ref:
      return teq(a->a, b->a, depth, assumed, ren);
    case TypeKind::Mu:
      break;  // handled above
  }
  throw std::logic_error("teq: bad kind");
}

}  // namespace

bool type_equal(const TypePtr& a, const TypePtr& b, int depth) {
  std::set<std::pair<std::string, std::string>> assumed;
  std::map<std::string, std::string> ren;
  return teq(a, b, depth, assumed, ren);
}

bool finite_type(const TypePtr& t) {
  switch (t->kind) {
    case TypeKind::Unit:
    case TypeKind::Bool:
    case TypeKind::Nat:
      return true;
    case TypeKind::Arrow:
    case TypeKind::Var:
      return false;
    case TypeKind::Prod:
    case TypeKind::Sum:
      return finite_type(t->a) && finite_type(t->b);
    case TypeKind::Ref:
      return finite_type(t->a);
    case TypeKind::Mu:
      // Finite only when the recursion is vacuous: the binder must not occur.
      if (free_type_vars(t->a).count(t->name)) return false;
      return finite_type(t->a);
  }
  throw std::logic_error("finite_type: bad kind");
}

std::set<std::string> free_type_vars(const TypePtr& t) {
  std::set<std::string> out;
  switch (t->kind) {
    case TypeKind::Unit:
    case TypeKind::Bool:
    case TypeKind::Nat:
      return out;
    case TypeKind::Var:
      out.insert(t->name);
      return out;
    case TypeKind::Arrow:
    case TypeKind::Prod:
    case TypeKind::Sum: {
      out = free_type_vars(t->a);
      auto r = free_type_vars(t->b);
      out.insert(r.begin(), r.end());
      return out;
    }
    case TypeKind::Ref:
      return free_type_vars(t->a);
    case TypeKind::Mu: {
      out = free_type_vars(t->a);
      out.erase(t->name);
      return out;
    }
  }
  throw std::logic_error("free_type_vars: bad kind");
}

namespace {

// Precedence: -> (1, right assoc) < + (2) < * (3) < atoms.
void pt(std::ostringstream& os, const TypePtr& t, int prec) {
  switch (t->kind) {
    case TypeKind::Unit:
      os << "Unit";
      return;
    case TypeKind::Bool:
      os << "Bool";
      return;
    case TypeKind::Nat:
      os << "Nat";
      return;
    case TypeKind::Var:
      os << t->name;
      return;
    case TypeKind::Ref:
      os << "Ref(";
      pt(os, t->a, 0);
      os << ")";
      return;
    case TypeKind::Mu:
      if (prec > 0) os << "(";
      os << "mu " << t->name << ".";
      pt(os, t->a, 0);
      if (prec > 0) os << ")";
      return;
    case TypeKind::Arrow:
      if (prec > 1) os << "(";
      pt(os, t->a, 2);
      os << " -> ";
      pt(os, t->b, 1);
      if (prec > 1) os << ")";
      return;
    case TypeKind::Sum:
      if (prec > 2) os << "(";
      pt(os, t->a, 3);
      os << " + ";
      pt(os, t->b, 2);
      if (prec > 2) os << ")";
      return;
    case TypeKind::Prod:
      if (prec > 3) os << "(";
      pt(os, t->a, 4);
      os << " * ";
      pt(os, t->b, 3);
      if (prec > 3) os << ")";
      return;
  }
}

struct TParser {
  const std::string& s;
  size_t i = 0;

  explicit TParser(const std::string& text) : s(text) {}

  void skip() {
    while (i < s.size() && isspace(static_cast<unsigned char>(s[i]))) i++;
  }
  bool eat(const std::string& tok) {
    skip();
    if (s.compare(i, tok.size(), tok) == 0) {
      // Keywords must not run into an identifier tail.
      if (isalpha(static_cast<unsigned char>(tok[0])) && i + tok.size() < s.size() &&
          (isalnum(static_cast<unsigned char>(s[i + tok.size()])) || s[i + tok.size()] == '_'))
        return false;
      i += tok.size();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw std::runtime_error("type syntax error at offset " + std::to_string(i) + ": " + msg);
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
    i = j;
    return r;
  }

  TypePtr arrow() {
    TypePtr l = sum();
    skip();
    if (eat("->")) return t_arrow(l, arrow());
    return l;
  }
  TypePtr sum() {
    TypePtr l = prod();
    while (true) {
      skip();
      if (i < s.size() && s[i] == '+') {
        i++;
        l = t_sum(l, prod());
      } else {
        return l;
      }
    }
  }
  TypePtr prod() {
    TypePtr l = atom();
    while (true) {
      skip();
      if (i < s.size() && s[i] == '*') {
        i++;
        l = t_prod(l, atom());
      } else {
        return l;
      }
    }
  }
  TypePtr atom() {
    skip();
    if (eat("(")) {
      TypePtr t = arrow();
      if (!eat(")")) fail("expected ')'");
      return t;
    }
    if (eat("Unit")) return t_unit();
    if (eat("Bool")) return t_bool();
    if (eat("Nat")) return t_nat();
    if (eat("Ref")) {
      if (!eat("(")) fail("expected '(' after Ref");
      TypePtr t = arrow();
      if (!eat(")")) fail("expected ')'");
      return t_ref(t);
    }
    if (eat("mu")) {
      std::string x = ident();
      if (!eat(".")) fail("expected '.' after mu binder");
      return t_mu(x, arrow());
    }
    return t_var(ident());
  }
};

}  // namespace

std::string print_type(const TypePtr& t) {
  std::ostringstream os;
  pt(os, t, 0);
  return os.str();
}

TypePtr parse_type(const std::string& text) {
  TParser p(text);
  TypePtr t = p.arrow();
  p.skip();
  if (p.i != text.size()) p.fail("trailing input");
  return t;
}

}  // namespace lsl
