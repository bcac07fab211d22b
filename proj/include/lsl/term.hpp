#pragma once

// Abstract syntax of the target language: call-by-value PCF with unit,
// sums, products, recursive types and ML-style references.

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "lsl/types.hpp"

namespace lsl {

enum class TermKind {
  Const,   // (), true/false, numerals
  Var,     // x
  Loc,     // runtime location (never in source)
  Lam,     // fun x:T.M   (type may be null for let-sugar, inferred at App)
  Rec,     // mu f:T. fun x:T.M
  Pair,    // <M, N>
  Inj,     // inj1[T](M) / inj2[T](M)
  App,     // M N
  Op,      // first-order operation op(M...)
  Proj,    // pi1(M) / pi2(M)
  If,      // if M then M1 else M2
  Case,    // case M of { inj1(x).M1 | inj2(y).M2 }
  Deref,   // !M
  Assign,  // M := N
  RefNew,  // ref(M)
};

// Unit is represented by std::monostate.
using ConstVal = std::variant<std::monostate, bool, std::uint64_t>;

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  TermKind kind;
  ConstVal cval;          // Const
  std::string name;       // Var / Lam param / Rec fname / Op opname / Case binder 1
  std::string name2;      // Case binder 2
  int label = -1;         // Loc
  TypePtr type;           // Lam param type / Rec function type / Inj annotation
  int idx = 0;            // Inj / Proj index (1 or 2)
  std::vector<TermPtr> kids;
};

TermPtr m_unit();
TermPtr m_bool(bool b);
TermPtr m_nat(std::uint64_t n);
TermPtr m_var(std::string x);
TermPtr m_loc(int label);
TermPtr m_lam(std::string x, TypePtr t, TermPtr body);
TermPtr m_rec(std::string f, TypePtr t, TermPtr lam);
TermPtr m_pair(TermPtr a, TermPtr b);
TermPtr m_inj(int idx, TermPtr body, TypePtr annot);
TermPtr m_app(TermPtr f, TermPtr a);
TermPtr m_op(std::string op, std::vector<TermPtr> args);
TermPtr m_proj(int idx, TermPtr body);
TermPtr m_if(TermPtr c, TermPtr t, TermPtr e);
TermPtr m_case(TermPtr scrut, std::string x1, TermPtr b1, std::string x2, TermPtr b2);
TermPtr m_deref(TermPtr r);
TermPtr m_assign(TermPtr r, TermPtr v);
TermPtr m_refnew(TermPtr v);

bool is_value(const TermPtr& m);

std::set<std::string> free_vars(const TermPtr& m);
std::set<int> free_labels(const TermPtr& m);

// Smallest `base`, `base1`, `base2`, ... not in `used`.
std::string fresh_name(const std::string& base, const std::set<std::string>& used);

// Capture-avoiding substitution of value `v` for variable `x`.
// Throws if `v` is not a value form.
TermPtr substitute(const TermPtr& body, const TermPtr& v, const std::string& x);

bool alpha_eq(const TermPtr& a, const TermPtr& b);

std::string print_term(const TermPtr& m);

}  // namespace lsl
