#pragma once

// Type checking for programs and stores.

#include <map>
#include <stdexcept>
#include <string>

#include "lsl/term.hpp"
#include "lsl/types.hpp"

namespace lsl {

// Typing environment: variables and store labels. Labels always map to
// Ref-shaped types.
struct Env {
  std::map<std::string, TypePtr> vars;
  std::map<int, TypePtr> labels;
};

using Store = std::map<int, TermPtr>;

struct TypeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Returns the unique type of `t` under `env`, or throws TypeError naming the
// violated rule and the offending subterm. Recursive types are compared up to
// unfolding (the isomorphism rule).
TypePtr typecheck_term(const Env& env, const TermPtr& t);

// Checks that every stored value is a closed value of the content type the
// environment assigns to its label. Throws TypeError on violation.
void typecheck_store(const Env& env, const Store& s);

}  // namespace lsl
