#pragma once

// Assertion language: logical terms are the term fragment without
// abstraction/application (reusing Term with a validity predicate); formulae
// add equality, connectives, four binders, content quantification, evaluation
// formulae, necessity and reachability.

#include <memory>
#include <optional>
#include <vector>

#include "lsl/term.hpp"
#include "lsl/typecheck.hpp"

namespace lsl {

// True iff t lies in the logical-term fragment: variables, constants,
// first-order operations, pairs, injections, dereferences (plus labels, which
// occur only when interpreting, and projections, which desugaring removes).
bool is_logic_term(const TermPtr& t);

enum class FKind {
  Eq,           // e1 = e2
  Not,          // ~C
  And,          // C1 & C2
  Or,           // C1 | C2
  Implies,      // C1 => C2
  Forall,       // all x:T. C
  Exists,       // ex x:T. C
  ForallTy,     // all X. C
  ExistsTy,     // ex X. C
  Nu,           // nu x. C      (x of Ref type)
  NuBar,        // nubar x. C
  AllContent,   // [!e]C
  SomeContent,  // <!e>C
  Eval,         // e1 . e2 = z {C} [@ [e...]]
  Always,       // box C
  Someday,      // dia C
  Reach,        // e1 ~> e2
  NotReach,     // e1 # e2
  Meta,         // schema metavariable (proof-checker internal)
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  FKind kind;
  TermPtr e1, e2;      // Eq/Reach/NotReach operands; Eval function/argument;
                       // AllContent/SomeContent subject in e1
  std::string var;     // term binder, type binder, or Eval anchor
  TypePtr type;        // Forall/Exists annotation; Nu/NuBar optional annotation
  std::vector<FormulaPtr> kids;
  bool located = false;           // Eval only: effect set present
  std::vector<TermPtr> effects;   // Eval only (valid when located)
  std::string meta;               // Meta name
};

FormulaPtr f_eq(TermPtr a, TermPtr b);
FormulaPtr f_not(FormulaPtr c);
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr f_forall(std::string x, TypePtr t, FormulaPtr c);
FormulaPtr f_exists(std::string x, TypePtr t, FormulaPtr c);
FormulaPtr f_forall_ty(std::string X, FormulaPtr c);
FormulaPtr f_exists_ty(std::string X, FormulaPtr c);
FormulaPtr f_nu(std::string x, TypePtr t, FormulaPtr c);
FormulaPtr f_nubar(std::string x, TypePtr t, FormulaPtr c);
FormulaPtr f_allcontent(TermPtr e, FormulaPtr c);
FormulaPtr f_somecontent(TermPtr e, FormulaPtr c);
FormulaPtr f_eval(TermPtr f, TermPtr a, std::string z, FormulaPtr c);
FormulaPtr f_eval_at(TermPtr f, TermPtr a, std::string z, FormulaPtr c,
                     std::vector<TermPtr> effects);
FormulaPtr f_always(FormulaPtr c);
FormulaPtr f_someday(FormulaPtr c);
FormulaPtr f_reach(TermPtr a, TermPtr b);
FormulaPtr f_notreach(TermPtr a, TermPtr b);
FormulaPtr f_meta(std::string name);

// F is 1 != 1 and T is ~F (the paper's abbreviations); recognizers accept
// exactly those normal forms.
FormulaPtr f_false();
FormulaPtr f_true();
bool is_false(const FormulaPtr& f);
bool is_true(const FormulaPtr& f);

std::set<std::string> formula_free_vars(const FormulaPtr& f);
std::set<std::string> formula_free_tyvars(const FormulaPtr& f);

bool formula_alpha_eq(const FormulaPtr& a, const FormulaPtr& b);

std::string print_formula(const FormulaPtr& f);

// Replaces free occurrences of variable x by logical term e (capture
// avoiding).
FormulaPtr subst_var(const FormulaPtr& f, const TermPtr& e, const std::string& x);
TermPtr term_subst_var(const TermPtr& t, const TermPtr& e, const std::string& x);

// Replaces occurrences of the dereference !x (x a variable) by term e.
FormulaPtr subst_deref(const FormulaPtr& f, const TermPtr& e, const std::string& x);

// Logical substitution C{|e2/!e1|} = all m:T.(m=e2 => [!e1](!e1=m => C)),
// with m fresh; T is the type of e2 under env.
FormulaPtr logical_subst(const FormulaPtr& f, const TermPtr& e2, const TermPtr& e1,
                         const Env& env);

// Parses the ASCII grammar and fully desugars (see desugar).
FormulaPtr parse_formula(const std::string& text);

// Expands the notation layer: !=, {C}e1.e2=z{C'}, e1.e2=e'{C}, e1.e2{C},
// e1.e2 dv, multi-name content quantification, tuple #, T/F, projections.
// Idempotent.
FormulaPtr desugar(const FormulaPtr& f);

// Typechecks the formula; infers missing binder annotations from first use
// where possible. Throws TypeError. Eq across unmatchable types is allowed
// (it is semantically false). Returns an env extended with inferred types of
// the formula's free variables left untouched.
void typecheck_formula(const Env& env, const FormulaPtr& f);

// Free plain names of a logical term (reference names not under !).
std::set<std::string> fpn(const TermPtr& e);

// Syntactic classifiers (sound under-approximations).
enum class Classification { Proven, NotProven };
Classification classify_thin(const FormulaPtr& f, const std::string& y, const Env& env);
Classification classify_monotone(const FormulaPtr& f);
Classification classify_antimonotone(const FormulaPtr& f);
Classification classify_stateless(const FormulaPtr& f);
Classification classify_tame(const FormulaPtr& f);
Classification classify_stateless_except(const FormulaPtr& f, const std::set<std::string>& xs);

// Variables x with an active dereference !x (not under box / [!y] / <!y>).
std::set<std::string> active_derefs(const FormulaPtr& f);

// For a binder formula (Forall/Exists/Nu/NuBar) with a missing annotation,
// infers the binder's type from equations in its body. Returns null when
// nothing constrains it.
TypePtr infer_binder_type(const Env& env, const FormulaPtr& f);

// Substitutes a closed type for a free type variable (annotations in terms
// and binders).
FormulaPtr subst_tyvar(const FormulaPtr& f, const TypePtr& t, const std::string& X);

}  // namespace lsl
