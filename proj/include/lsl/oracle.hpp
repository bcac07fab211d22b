#pragma once

// Bounded three-valued satisfaction on concrete models, judgement checking,
// random model generation and refutation search.

#include <cstdint>
#include <optional>
#include <string>

#include "lsl/formula.hpp"
#include "lsl/model.hpp"

namespace lsl {

struct Bounds {
  int nat_bound = 8;
  int value_depth = 3;
  long fuel = 100000;
  int extra_labels = 2;
};

enum class VKind { True, False, Unknown };

struct Verdict {
  VKind v;
  std::string reason;  // for Unknown: the first unsupported construct / bound
};

Verdict v_true();
Verdict v_false();
Verdict v_unknown(std::string reason);

// Homomorphic interpretation of a logical term in a model. Throws on unbound
// variables or dangling dereferences.
TermPtr interpret_term(const Model& m, const TermPtr& e);

// Reachability per the satisfaction clause: [[e2]] in lc(fl([[e1]]), store).
bool reachable_in_model(const Model& m, const TermPtr& e1, const TermPtr& e2);

// Three-valued bounded satisfaction. True/False answers are sound for the
// decidable fragment; everything else degrades to Unknown.
Verdict satisfies(const Model& m, const FormulaPtr& f, const Bounds& b = {});

struct Judgement {
  FormulaPtr pre;
  TermPtr program;
  std::string anchor;
  FormulaPtr post;
  bool located = false;
  std::vector<TermPtr> effects;
};

// Validity of {pre} program :anchor {post} [@effects] at a single model.
Verdict check_judgement_on_model(const Model& m, const Judgement& j, const Bounds& b = {});

struct GenParams {
  int max_labels = 4;
  int max_env_vars = 4;
  int value_depth = 2;
  bool closures = true;
};

Model gen_random_model(std::uint64_t seed, const GenParams& p = {});

struct RefuteResult {
  std::optional<Model> countermodel;  // model (with instantiated free vars) where f is False
  int trials_run = 0;
};

// Searches seeded random models (with random instantiations of f's free term
// and type variables) for one where satisfies answers False.
RefuteResult refute(const FormulaPtr& f, const Bounds& b, int trials, std::uint64_t seed,
                    const GenParams& p = {});

}  // namespace lsl
