#pragma once

// Proof-script checking: script parsing, per-rule validation, the axiom-schema
// registry, the propositional tableau, and the obligation discharge pipeline.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lsl/oracle.hpp"

namespace lsl {

struct ProofStep {
  int index = 0;
  Judgement j;
  std::string rule;
  std::vector<int> premises;                          // step indices, strictly earlier
  std::map<std::string, std::string> hints;           // named instantiations
  std::string text;                                   // source line (reports)
};

struct ProofScript {
  Env env;                                            // `var` declarations
  std::map<std::string, TermPtr> defs;                // `def` program abbreviations
  std::map<std::string, FormulaPtr> fdefs;            // `defc` formula abbreviations
  std::vector<ProofStep> steps;
};

// Parses the line-oriented script format:
//   # comment
//   var a : Ref(Nat)
//   def Inc = let x = ref(0) in fun ().(x := !x + 1; !x)
//   defc IncSpec = box all j:Nat. {!x = j} u . () = z {z = j + 1 & !x = j + 1} @ [x]
//   1. {T} Inc :u {nu x. C}  by LetRef(prem=2,3)
//   2. {C} a := M :u {C'} @ [a]  by Assign(prem=1; eff=a)
//   3. {C} M :u {C'}  by assume
// Formula abbreviations are referenced as $Name inside formula text; program
// abbreviations as bare names inside program text. Throws on syntax errors,
// unknown rules and dangling premise references.
ProofScript parse_script(const std::string& text);

enum class StepState { Valid, RuleError, ObligationOpen };

enum class Evidence {
  Alpha,             // syntactic identity of the two sides
  SchemaMatch,       // axiom registry
  Propositional,     // tableau
  NoCounterexample,  // oracle search found nothing (open unless trusted)
  AssumedByUser,     // `assume` pseudo-rule
  Refuted,           // oracle found a countermodel
  Open,              // nothing applied
};

std::string evidence_name(Evidence e);

struct ObligationRecord {
  int step = 0;
  std::string id;        // "<step>.<k>"
  std::string descr;     // which side condition / implication this is
  FormulaPtr formula;
  Evidence evidence = Evidence::Open;
  std::string detail;    // schema id, trial counts, countermodel text
  bool open = true;      // counts against "fully verified"
};

struct StepReport {
  int index = 0;
  StepState state = StepState::Valid;
  std::string detail;    // RuleError text / open obligation ids
};

struct CheckReport {
  std::vector<StepReport> steps;
  std::vector<ObligationRecord> obligations;
  bool accepted = false;        // no RuleError
  bool fully_verified = false;  // accepted and no open obligations
};

struct CheckOptions {
  Bounds bounds;
  int refute_trials = 60;
  std::uint64_t seed = 1;
  bool trust_oracle = false;    // upgrade NoCounterexample to a discharge
};

CheckReport check_script(const ProofScript& s, const CheckOptions& opts = {});

std::string report_text(const CheckReport& r);
std::string report_json(const CheckReport& r);

// The registered rule names (for CLI listings and diagnostics).
std::vector<std::string> rule_names();

// Propositional validity with evaluation/modal/quantified subformulas treated
// as opaque atoms (compared up to alpha-equivalence after desugaring).
bool tableau_valid(const FormulaPtr& f);

// Registered axiom-schema identifiers.
std::vector<std::string> axiom_ids();

// First-order schema matching against the registry: formula metavariables
// bind whole subformulas, term metavariables bind logical terms; all side
// conditions are verified. Tries a direct match first, then single-schema
// equivalence rewriting chains up to depth 3. Returns the schema id.
std::optional<std::string> match_axiom(const FormulaPtr& goal, const Env& env,
                                       const std::map<std::string, std::string>& hints = {});

enum class DischargeKind { Discharged, Refuted, Open };

struct DischargeResult {
  DischargeKind kind = DischargeKind::Open;
  Evidence evidence = Evidence::Open;
  std::string detail;
};

// Pipeline: alpha-identity, axiom registry, tableau, oracle refutation.
DischargeResult discharge(const FormulaPtr& ob, const Env& env, const CheckOptions& opts);

}  // namespace lsl
