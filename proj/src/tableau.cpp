// Propositional tableau over opaque atoms.

#include <vector>

#include "lsl/proof.hpp"

namespace lsl {

namespace {

struct Signed {
  FormulaPtr f;
  bool sign;  // asserted truth value
};

bool is_atom(const FormulaPtr& f) {
  switch (f->kind) {
    case FKind::Not:
    case FKind::And:
    case FKind::Or:
    case FKind::Implies:
      return false;
    default:
      return true;
  }
}

// True iff the branch extended with the queued formulas closes.
bool closes(std::vector<Signed> atoms, std::vector<Signed> queue) {
  while (!queue.empty()) {
    Signed cur = queue.back();
    queue.pop_back();
    const FormulaPtr& f = cur.f;
    if (is_atom(f)) {
      if (cur.sign && is_false(f)) return true;
      if (!cur.sign && is_true(f)) return true;
      for (const Signed& a : atoms)
        if (a.sign != cur.sign && formula_alpha_eq(a.f, f)) return true;
      atoms.push_back(cur);
      continue;
    }
    switch (f->kind) {
      case FKind::Not:
        queue.push_back({f->kids[0], !cur.sign});
        break;
      case FKind::And:
        if (cur.sign) {
          queue.push_back({f->kids[0], true});
          queue.push_back({f->kids[1], true});
        } else {
          auto q1 = queue, q2 = queue;
          q1.push_back({f->kids[0], false});
          q2.push_back({f->kids[1], false});
          return closes(atoms, q1) && closes(atoms, q2);
        }
        break;
      case FKind::Or:
        if (!cur.sign) {
          queue.push_back({f->kids[0], false});
          queue.push_back({f->kids[1], false});
        } else {
          auto q1 = queue, q2 = queue;
          q1.push_back({f->kids[0], true});
          q2.push_back({f->kids[1], true});
          return closes(atoms, q1) && closes(atoms, q2);
        }
        break;
      case FKind::Implies:
        if (!cur.sign) {
          queue.push_back({f->kids[0], true});
          queue.push_back({f->kids[1], false});
        } else {
          auto q1 = queue, q2 = queue;
          q1.push_back({f->kids[0], false});
          q2.push_back({f->kids[1], true});
          return closes(atoms, q1) && closes(atoms, q2);
        }
        break;
      default:
        break;  // unreachable: atoms handled above
    }
  }
  return false;
}

}  // namespace

bool tableau_valid(const FormulaPtr& f) {
  return closes({}, {{desugar(f), false}});
}

}  // namespace lsl
