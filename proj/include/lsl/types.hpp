#pragma once

// Type expressions: base types, arrows, products, sums, references,
// type variables and equi-isomorphic mu-types.

#include <memory>
#include <set>
#include <string>
#include <vector>

namespace lsl {

enum class TypeKind { Unit, Bool, Nat, Arrow, Prod, Sum, Ref, Var, Mu };

struct TypeExpr;
using TypePtr = std::shared_ptr<const TypeExpr>;

struct TypeExpr {
  TypeKind kind;
  TypePtr a;         // Arrow arg / Prod,Sum left / Ref content / Mu body
  TypePtr b;         // Arrow result / Prod,Sum right
  std::string name;  // Var name / Mu binder
};

TypePtr t_unit();
TypePtr t_bool();
TypePtr t_nat();
TypePtr t_arrow(TypePtr arg, TypePtr res);
TypePtr t_prod(TypePtr l, TypePtr r);
TypePtr t_sum(TypePtr l, TypePtr r);
TypePtr t_ref(TypePtr content);
TypePtr t_var(std::string name);
TypePtr t_mu(std::string binder, TypePtr body);

bool is_base_type(const TypePtr& t);

// Capture-avoiding substitution of `repl` for type variable `var`.
TypePtr type_subst(const TypePtr& t, const std::string& var, const TypePtr& repl);

// One unfolding of mu X.T to T[mu X.T / X]; identity on non-mu types.
TypePtr unfold_mu(const TypePtr& t);

// Equality under the equi-isomorphic discipline: mu-types compared by a
// pair-memoizing coinductive walk, with `depth` as a safety bound.
bool type_equal(const TypePtr& a, const TypePtr& b, int depth = 64);

// A type is finite when it contains no arrow type and no type variable
// (a mu whose binder actually occurs in the body is therefore not finite).
bool finite_type(const TypePtr& t);

std::set<std::string> free_type_vars(const TypePtr& t);

std::string print_type(const TypePtr& t);

// Parses the ASCII grammar `Unit|Bool|Nat|T->T|T*T|T+T|Ref(T)|X|mu X.T`.
// Throws std::runtime_error with position info on malformed input.
TypePtr parse_type(const std::string& text);

}  // namespace lsl
