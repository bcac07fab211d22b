#pragma once

// Small-step operational semantics on nu-bound configurations.

#include <optional>
#include <set>

#include "lsl/term.hpp"
#include "lsl/typecheck.hpp"

namespace lsl {

// A configuration (nu l~)(M, sigma): the term under evaluation, the store,
// and the set of nu-bound (hidden) labels.
struct Config {
  TermPtr term;
  Store store;
  std::set<int> hidden;
};

// Performs one reduction step under the leftmost-innermost evaluation
// context. Returns nullopt when no redex exists (for well-typed terms this
// means `term` is a value). ref(V) allocates the smallest label not in the
// store and adds it to the hidden set.
std::optional<Config> step(const Config& c);

struct EvalResult {
  enum class Status { Converged, OutOfFuel } status;
  Config config;  // terminal configuration (Converged) or last state (OutOfFuel)
};

// Iterates step up to `fuel` times.
EvalResult evaluate(const Config& c, long fuel = 1000000);

// Least set containing `seed` and closed under free labels of stored values.
std::set<int> label_closure(const std::set<int>& seed, const Store& s);

// First-order operation on closed constant arguments (the delta rules).
TermPtr apply_op(const std::string& op, const std::vector<TermPtr>& args);

}  // namespace lsl
