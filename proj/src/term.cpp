#include "lsl/term.hpp"

#include <functional>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace lsl {

namespace {

std::shared_ptr<Term> mk(TermKind k) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  return t;
}

}  // namespace

TermPtr m_unit() {
  auto t = mk(TermKind::Const);
  t->cval = std::monostate{};
  return t;
}
TermPtr m_bool(bool b) {
  auto t = mk(TermKind::Const);
  t->cval = b;
  return t;
}
TermPtr m_nat(std::uint64_t n) {
  auto t = mk(TermKind::Const);
  t->cval = n;
  return t;
}
TermPtr m_var(std::string x) {
  auto t = mk(TermKind::Var);
  t->name = std::move(x);
  return t;
}
TermPtr m_loc(int label) {
  auto t = mk(TermKind::Loc);
  t->label = label;
  return t;
}
TermPtr m_lam(std::string x, TypePtr ty, TermPtr body) {
  auto t = mk(TermKind::Lam);
  t->name = std::move(x);
  t->type = std::move(ty);
  t->kids = {std::move(body)};
  return t;
}
TermPtr m_rec(std::string f, TypePtr ty, TermPtr lam) {
  auto t = mk(TermKind::Rec);
  t->name = std::move(f);
  t->type = std::move(ty);
  t->kids = {std::move(lam)};
  return t;
}
TermPtr m_pair(TermPtr a, TermPtr b) {
  auto t = mk(TermKind::Pair);
  t->kids = {std::move(a), std::move(b)};
  return t;
}
TermPtr m_inj(int idx, TermPtr body, TypePtr annot) {
  auto t = mk(TermKind::Inj);
  t->idx = idx;
  t->type = std::move(annot);
  t->kids = {std::move(body)};
  return t;
}
TermPtr m_app(TermPtr f, TermPtr a) {
  auto t = mk(TermKind::App);
  t->kids = {std::move(f), std::move(a)};
  return t;
}
TermPtr m_op(std::string op, std::vector<TermPtr> args) {
  auto t = mk(TermKind::Op);
  t->name = std::move(op);
  t->kids = std::move(args);
  return t;
}
TermPtr m_proj(int idx, TermPtr body) {
  auto t = mk(TermKind::Proj);
  t->idx = idx;
  t->kids = {std::move(body)};
  return t;
}
TermPtr m_if(TermPtr c, TermPtr th, TermPtr el) {
  auto t = mk(TermKind::If);
  t->kids = {std::move(c), std::move(th), std::move(el)};
  return t;
}
TermPtr m_case(TermPtr scrut, std::string x1, TermPtr b1, std::string x2, TermPtr b2) {
  auto t = mk(TermKind::Case);
  t->name = std::move(x1);
  t->name2 = std::move(x2);
  t->kids = {std::move(scrut), std::move(b1), std::move(b2)};
  return t;
}
TermPtr m_deref(TermPtr r) {
  auto t = mk(TermKind::Deref);
  t->kids = {std::move(r)};
  return t;
}
TermPtr m_assign(TermPtr r, TermPtr v) {
  auto t = mk(TermKind::Assign);
  t->kids = {std::move(r), std::move(v)};
  return t;
}
TermPtr m_refnew(TermPtr v) {
  auto t = mk(TermKind::RefNew);
  t->kids = {std::move(v)};
  return t;
}

bool is_value(const TermPtr& m) {
  switch (m->kind) {
    case TermKind::Const:
    case TermKind::Var:  // open values are values for substitution purposes
    case TermKind::Loc:
    case TermKind::Lam:
    case TermKind::Rec:
      return true;
    case TermKind::Pair:
      return is_value(m->kids[0]) && is_value(m->kids[1]);
    case TermKind::Inj:
      return is_value(m->kids[0]);
    default:
      return false;
  }
}

namespace {

void fv(const TermPtr& m, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (m->kind) {
    case TermKind::Const:
    case TermKind::Loc:
      return;
    case TermKind::Var:
      if (!bound.count(m->name)) out.insert(m->name);
      return;
    case TermKind::Lam: {
      bool added = bound.insert(m->name).second;
      fv(m->kids[0], bound, out);
      if (added) bound.erase(m->name);
      return;
    }
    case TermKind::Rec: {
      bool added = bound.insert(m->name).second;
      fv(m->kids[0], bound, out);
      if (added) bound.erase(m->name);
      return;
    }
    case TermKind::Case: {
      fv(m->kids[0], bound, out);
      bool a1 = bound.insert(m->name).second;
      fv(m->kids[1], bound, out);
      if (a1) bound.erase(m->name);
      bool a2 = bound.insert(m->name2).second;
      fv(m->kids[2], bound, out);
      if (a2) bound.erase(m->name2);
      return;
    }
    default:
      for (const auto& k : m->kids) fv(k, bound, out);
      return;
  }
}

}  // namespace

std::set<std::string> free_vars(const TermPtr& m) {
  std::set<std::string> bound, out;
  fv(m, bound, out);
  return out;
}

std::set<int> free_labels(const TermPtr& m) {
  std::set<int> out;
  if (m->kind == TermKind::Loc) out.insert(m->label);
  for (const auto& k : m->kids) {
    auto r = free_labels(k);
    out.insert(r.begin(), r.end());
  }
  return out;
}

std::string fresh_name(const std::string& base, const std::set<std::string>& used) {
  if (!used.count(base)) return base;
  for (int i = 1;; i++) {
    std::string cand = base + std::to_string(i);
    if (!used.count(cand)) return cand;
  }
}

namespace {

TermPtr rebind(const TermPtr& m, const std::string& oldv, const std::string& newv);

TermPtr subst_rec(const TermPtr& m, const TermPtr& v, const std::string& x,
                  const std::set<std::string>& avoid) {
  switch (m->kind) {
    case TermKind::Const:
    case TermKind::Loc:
      return m;
    case TermKind::Var:
      return m->name == x ? v : m;
    case TermKind::Lam:
    case TermKind::Rec: {
      if (m->name == x) return m;
      if (avoid.count(m->name)) {
        std::set<std::string> used = avoid;
        auto bodyfv = free_vars(m->kids[0]);
        used.insert(bodyfv.begin(), bodyfv.end());
        std::string fresh = fresh_name(m->name, used);
        TermPtr body = rebind(m->kids[0], m->name, fresh);
        TermPtr renamed = m->kind == TermKind::Lam ? m_lam(fresh, m->type, body)
                                                   : m_rec(fresh, m->type, body);
        return subst_rec(renamed, v, x, avoid);
      }
      TermPtr body = subst_rec(m->kids[0], v, x, avoid);
      return m->kind == TermKind::Lam ? m_lam(m->name, m->type, body) : m_rec(m->name, m->type, body);
    }
    case TermKind::Case: {
      TermPtr scrut = subst_rec(m->kids[0], v, x, avoid);
      auto one = [&](const std::string& binder, const TermPtr& body, std::string& outb) -> TermPtr {
        outb = binder;
        if (binder == x) return body;
        if (avoid.count(binder)) {
          std::set<std::string> used = avoid;
          auto bodyfv = free_vars(body);
          used.insert(bodyfv.begin(), bodyfv.end());
          outb = fresh_name(binder, used);
          return subst_rec(rebind(body, binder, outb), v, x, avoid);
        }
        return subst_rec(body, v, x, avoid);
      };
      std::string b1, b2;
      TermPtr m1 = one(m->name, m->kids[1], b1);
      TermPtr m2 = one(m->name2, m->kids[2], b2);
      return m_case(scrut, b1, m1, b2, m2);
    }
    default: {
      auto copy = std::make_shared<Term>(*m);
      for (auto& k : copy->kids) k = subst_rec(k, v, x, avoid);
      return copy;
    }
  }
}

TermPtr rebind(const TermPtr& m, const std::string& oldv, const std::string& newv) {
  std::set<std::string> avoid;  // newv is fresh, nothing to avoid
  return subst_rec(m, m_var(newv), oldv, avoid);
}

}  // namespace

TermPtr substitute(const TermPtr& body, const TermPtr& v, const std::string& x) {
  if (!is_value(v)) throw std::runtime_error("substitute: replacement is not a value form");
  return subst_rec(body, v, x, free_vars(v));
}

namespace {

bool aeq(const TermPtr& a, const TermPtr& b, std::map<std::string, std::string>& ab,
         std::map<std::string, std::string>& ba) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TermKind::Const:
      return a->cval == b->cval;
    case TermKind::Loc:
      return a->label == b->label;
    case TermKind::Var: {
      auto it = ab.find(a->name);
      if (it != ab.end()) return it->second == b->name && ba.at(b->name) == a->name;
      // Free on side a: must be an identical free name on side b.
      return !ba.count(b->name) && a->name == b->name;
    }
    case TermKind::Lam:
    case TermKind::Rec: {
      if ((a->type == nullptr) != (b->type == nullptr)) return false;
      if (a->type && !type_equal(a->type, b->type)) return false;
      auto sab = ab, sba = ba;
      sab[a->name] = b->name;
      sba[b->name] = a->name;
      return aeq(a->kids[0], b->kids[0], sab, sba);
    }
    case TermKind::Case: {
      if (!aeq(a->kids[0], b->kids[0], ab, ba)) return false;
      {
        auto sab = ab, sba = ba;
        sab[a->name] = b->name;
        sba[b->name] = a->name;
        if (!aeq(a->kids[1], b->kids[1], sab, sba)) return false;
      }
      auto sab = ab, sba = ba;
      sab[a->name2] = b->name2;
      sba[b->name2] = a->name2;
      return aeq(a->kids[2], b->kids[2], sab, sba);
    }
    default: {
      if (a->name != b->name || a->idx != b->idx) return false;
      if ((a->type == nullptr) != (b->type == nullptr)) return false;
      if (a->type && !type_equal(a->type, b->type)) return false;
      if (a->kids.size() != b->kids.size()) return false;
      for (size_t i = 0; i < a->kids.size(); i++)
        if (!aeq(a->kids[i], b->kids[i], ab, ba)) return false;
      return true;
    }
  }
}

}  // namespace

bool alpha_eq(const TermPtr& a, const TermPtr& b) {
  std::map<std::string, std::string> ab, ba;
  return aeq(a, b, ab, ba);
}

namespace {

// Precedence levels for printing:
// 0 seq ';'  1 assign ':='  2 comparison  3 additive  4 multiplicative
// 5 application  6 atoms.  fun/mu/let/if/case extend to the right.
void ppt(std::ostringstream& os, const TermPtr& m, int prec);

bool is_let_sugar(const TermPtr& m) {
  return m->kind == TermKind::App && m->kids[0]->kind == TermKind::Lam;
}

bool is_seq_sugar(const TermPtr& m) {
  // (fun _:Unit. N) M printed as M; N when the parameter is unused.
  if (!is_let_sugar(m)) return false;
  const auto& lam = m->kids[0];
  return lam->type && lam->type->kind == TypeKind::Unit && !free_vars(lam->kids[0]).count(lam->name);
}

void paren(std::ostringstream& os, const TermPtr& m, int myprec, int prec,
           const std::function<void()>& body) {
  (void)m;
  if (myprec < prec) {
    os << "(";
    body();
    os << ")";
  } else {
    body();
  }
}

void ppt(std::ostringstream& os, const TermPtr& m, int prec) {
  switch (m->kind) {
    case TermKind::Const:
      if (std::holds_alternative<std::monostate>(m->cval)) {
        os << "()";
      } else if (std::holds_alternative<bool>(m->cval)) {
        os << (std::get<bool>(m->cval) ? "true" : "false");
      } else {
        os << std::get<std::uint64_t>(m->cval);
      }
      return;
    case TermKind::Var:
      os << m->name;
      return;
    case TermKind::Loc:
      os << "#l" << m->label;
      return;
    case TermKind::Lam:
      paren(os, m, 0, prec, [&] {
        if (m->type && m->type->kind == TypeKind::Unit && !free_vars(m->kids[0]).count(m->name)) {
          os << "fun().";
        } else {
          os << "fun " << m->name;
          if (m->type) os << ":" << print_type(m->type);
          os << ".";
        }
        ppt(os, m->kids[0], 0);
      });
      return;
    case TermKind::Rec:
      paren(os, m, 0, prec, [&] {
        os << "mu " << m->name;
        if (m->type) os << ":" << print_type(m->type);
        os << ".";
        ppt(os, m->kids[0], 0);
      });
      return;
    case TermKind::Pair:
      // Print components above comparison precedence: a bare '>' inside a
      // pair would be read as the closing bracket.
      os << "<";
      ppt(os, m->kids[0], 3);
      os << ", ";
      ppt(os, m->kids[1], 3);
      os << ">";
      return;
    case TermKind::Inj:
      os << "inj" << m->idx;
      if (m->type) os << "[" << print_type(m->type) << "]";
      os << "(";
      ppt(os, m->kids[0], 0);
      os << ")";
      return;
    case TermKind::App:
      if (is_seq_sugar(m)) {
        paren(os, m, 0, prec, [&] {
          ppt(os, m->kids[1], 1);
          os << "; ";
          ppt(os, m->kids[0]->kids[0], 0);
        });
        return;
      }
      if (is_let_sugar(m)) {
        const auto& lam = m->kids[0];
        paren(os, m, 0, prec, [&] {
          os << "let " << lam->name << " = ";
          ppt(os, m->kids[1], 1);
          os << " in ";
          ppt(os, lam->kids[0], 0);
        });
        return;
      }
      paren(os, m, 5, prec, [&] {
        ppt(os, m->kids[0], 5);
        os << " ";
        ppt(os, m->kids[1], 6);
      });
      return;
    case TermKind::Op: {
      static const std::map<std::string, std::pair<std::string, int>> infix = {
          {"add", {"+", 3}}, {"sub", {"-", 3}}, {"mul", {"*", 4}}, {"eq", {"=", 2}},
          {"le", {"<=", 2}}, {"lt", {"<", 2}},  {"ge", {">=", 2}}, {"gt", {">", 2}},
      };
      auto it = infix.find(m->name);
      if (it != infix.end() && m->kids.size() == 2) {
        int p = it->second.second;
        paren(os, m, p, prec, [&] {
          ppt(os, m->kids[0], p);
          os << " " << it->second.first << " ";
          ppt(os, m->kids[1], p + 1);
        });
        return;
      }
      os << m->name << "(";
      for (size_t i = 0; i < m->kids.size(); i++) {
        if (i) os << ", ";
        ppt(os, m->kids[i], 0);
      }
      os << ")";
      return;
    }
    case TermKind::Proj:
      os << "pi" << m->idx << "(";
      ppt(os, m->kids[0], 0);
      os << ")";
      return;
    case TermKind::If:
      paren(os, m, 0, prec, [&] {
        os << "if ";
        ppt(os, m->kids[0], 1);
        os << " then ";
        ppt(os, m->kids[1], 1);
        os << " else ";
        ppt(os, m->kids[2], 0);
      });
      return;
    case TermKind::Case:
      paren(os, m, 0, prec, [&] {
        os << "case ";
        ppt(os, m->kids[0], 1);
        os << " of { inj1(" << m->name << ").";
        ppt(os, m->kids[1], 1);
        os << " | inj2(" << m->name2 << ").";
        ppt(os, m->kids[2], 1);
        os << " }";
      });
      return;
    case TermKind::Deref:
      os << "!";
      ppt(os, m->kids[0], 6);
      return;
    case TermKind::Assign:
      paren(os, m, 1, prec, [&] {
        ppt(os, m->kids[0], 2);
        os << " := ";
        ppt(os, m->kids[1], 2);
      });
      return;
    case TermKind::RefNew:
      os << "ref(";
      ppt(os, m->kids[0], 0);
      os << ")";
      return;
  }
}

}  // namespace

std::string print_term(const TermPtr& m) {
  std::ostringstream os;
  ppt(os, m, 0);
  return os.str();
}

}  // namespace lsl
