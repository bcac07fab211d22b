#pragma once

// Reachability elimination at finite types, the i-step reachability
// expansion, and basic semantics-preserving simplification.

#include <string>
#include <utility>
#include <vector>

#include "lsl/formula.hpp"

namespace lsl {

struct RewriteStep {
  std::string path;    // dot-joined kid indices from the root to the redex
  std::string rule;    // clause names applied, outermost first
  std::string result;  // printed replacement subformula
};

struct RewriteTrace {
  std::vector<RewriteStep> steps;
};

// Replaces every Reach/NotReach whose source has a finite type by the
// equivalent reachability-free formula, per the inductive clauses
// (base: F; product/sum: existential decomposition; Ref: x=y or via !x).
// Throws when a predicate's source type is not finite (arrow / type
// variable / genuinely recursive mu), naming the offending type.
std::pair<FormulaPtr, RewriteTrace> eliminate_reachability(const FormulaPtr& f, const Env& env);

// Replays a trace: each step replaces the subformula at its path with the
// recorded result. Used to validate traces.
FormulaPtr replay_trace(const FormulaPtr& f, const RewriteTrace& trace);

// The i-step reachability formula reach(x, y, i) at x's (finite) type:
// i=0 is x=y; the successor clauses follow x's type structure.
FormulaPtr ireach_expand(const TermPtr& x, const TermPtr& y, int i, const Env& env);

// T/F absorption, double negation, decidable closed equalities,
// unmatchable-type equalities to F (blocked by type variables), and
// right-assoc flattening of conjunction/disjunction chains.
FormulaPtr simplify(const FormulaPtr& f);

// As above, with an environment used to type equality operands; equalities
// whose operand types cannot match are rewritten to F.
FormulaPtr simplify(const FormulaPtr& f, const Env& env);

}  // namespace lsl
