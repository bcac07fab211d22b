#pragma once

// Models: a hidden-label set, an environment of closed values, a type-variable
// instantiation, and a store. Includes permutations, canonicalization and the
// decidable under-approximation of model equivalence.

#include <map>
#include <optional>
#include <set>
#include <string>

#include "lsl/eval.hpp"

namespace lsl {

struct Model {
  std::set<int> hidden;                  // nu-bound labels
  std::map<std::string, TermPtr> env;    // variable -> closed value
  std::map<std::string, TypePtr> tymap;  // type variable -> closed type
  Store store;
  std::map<int, TypePtr> labtypes;  // label -> content type (cache; see model_env)
};

// The typing environment induced by a model: variables typed by their values,
// labels typed Ref(content type).
Env model_env(const Model& m);

// Checks the model invariants (well-typed values, hidden within the store
// domain, no dangling labels). Throws on violation.
void check_model(const Model& m);

// Binds `name` to the result of evaluating program `t` (free variables
// resolved through m.env) under m's store; labels allocated during evaluation
// become hidden. Returns nullopt on fuel exhaustion.
std::optional<Model> model_extend(const Model& m, const std::string& name, const TermPtr& t,
                                  long fuel = 1000000);

// Store update at a given label; the label must exist.
Model model_update_label(const Model& m, int label, const TermPtr& v);

// Labels reachable from a value: label_closure of its free labels.
std::set<int> reachable_labels(const Model& m, const TermPtr& v);

// A permutation of model variables: a type-preserving bijection on a subset
// of dom(env), represented by its graph (fixpoints may be omitted).
using Permutation = std::map<std::string, std::string>;

Model permute(const Model& m, const Permutation& p);

enum class Approx { Equal, Unknown };

// Equal iff the two models coincide after garbage collection of unreachable
// hidden cells, canonical renaming of hidden labels in first-use order, and
// alpha-equivalence of values. Never claims inequality.
Approx model_equiv_approx(const Model& a, const Model& b);

// Proven iff permute(m, p) is Equal to m under model_equiv_approx.
enum class Symmetry { Proven, NotProven };
Symmetry is_symmetry(const Model& m, const Permutation& p);

// The normal form used by model_equiv_approx (GC + canonical relabeling).
Model canonicalize(const Model& m);

// Textual model files:
//   hidden: [l0, l2]
//   tyvar: X = Nat
//   env: x = <value literal> : T
//   store: l0 |-> <value literal> [: content type]
// Store type annotations are required when contents cannot be typed bottom-up
// (mutually recursive closures).
Model parse_model(const std::string& text);
std::string print_model(const Model& m);

}  // namespace lsl
