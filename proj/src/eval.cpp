#include "lsl/eval.hpp"

#include <stdexcept>

namespace lsl {

namespace {

std::uint64_t nat_of(const TermPtr& v) { return std::get<std::uint64_t>(v->cval); }
bool bool_of(const TermPtr& v) { return std::get<bool>(v->cval); }

TermPtr delta(const std::string& op, const std::vector<TermPtr>& args) {
  if (op == "add") return m_nat(nat_of(args[0]) + nat_of(args[1]));
  if (op == "sub") {
    std::uint64_t a = nat_of(args[0]), b = nat_of(args[1]);
    return m_nat(a > b ? a - b : 0);  // truncated subtraction on Nat
  }
  if (op == "mul") return m_nat(nat_of(args[0]) * nat_of(args[1]));
  if (op == "le") return m_bool(nat_of(args[0]) <= nat_of(args[1]));
  if (op == "lt") return m_bool(nat_of(args[0]) < nat_of(args[1]));
  if (op == "ge") return m_bool(nat_of(args[0]) >= nat_of(args[1]));
  if (op == "gt") return m_bool(nat_of(args[0]) > nat_of(args[1]));
  if (op == "not") return m_bool(!bool_of(args[0]));
  if (op == "odd") return m_bool(nat_of(args[0]) % 2 == 1);
  if (op == "even") return m_bool(nat_of(args[0]) % 2 == 0);
  if (op == "eq") {
    const TermPtr& a = args[0];
    const TermPtr& b = args[1];
    return m_bool(a->cval == b->cval);  // base-type constants only, by typing
  }
  if (op == "fact") {
    std::uint64_t n = nat_of(args[0]), r = 1;
    for (std::uint64_t k = 2; k <= n; k++) r *= k;
    return m_nat(r);
  }
  throw std::logic_error("delta: unknown operation " + op);
}

int fresh_label(const Store& s) {
  int l = 0;
  while (s.count(l)) l++;
  return l;
}

// Tries to reduce `t` (leftmost-innermost), mutating store/hidden on
// allocation and assignment. Returns nullptr if `t` has no redex.
TermPtr red(const TermPtr& t, Store& store, std::set<int>& hidden) {
  auto sub = [&](size_t k) -> TermPtr {  // reduce child k, rebuild on success
    TermPtr r = red(t->kids[k], store, hidden);
    if (!r) return nullptr;
    auto t2 = std::make_shared<Term>(*t);
    t2->kids[k] = r;
    return t2;
  };

  switch (t->kind) {
    case TermKind::Const:
    case TermKind::Var:
    case TermKind::Loc:
    case TermKind::Lam:
    case TermKind::Rec:
      return nullptr;
    case TermKind::Pair:
      if (auto r = sub(0)) return r;
      return sub(1);
    case TermKind::Inj:
      return sub(0);
    case TermKind::App: {
      if (auto r = sub(0)) return r;
      if (auto r = sub(1)) return r;
      const TermPtr& f = t->kids[0];
      const TermPtr& a = t->kids[1];
      if (!is_value(a)) return nullptr;
      if (f->kind == TermKind::Lam) return substitute(f->kids[0], a, f->name);
      if (f->kind == TermKind::Rec) {
        // (mu f.lam) V -> (lam[mu f.lam / f]) V
        TermPtr unrolled = substitute(f->kids[0], f, f->name);
        auto t2 = std::make_shared<Term>(*t);
        t2->kids[0] = unrolled;
        return t2;
      }
      return nullptr;
    }
    case TermKind::Op: {
      for (size_t k = 0; k < t->kids.size(); k++)
        if (auto r = sub(k)) return r;
      for (const auto& a : t->kids)
        if (!is_value(a)) return nullptr;
      return delta(t->name, t->kids);
    }
    case TermKind::Proj: {
      if (auto r = sub(0)) return r;
      const TermPtr& p = t->kids[0];
      if (p->kind != TermKind::Pair) return nullptr;
      return p->kids[t->idx == 1 ? 0 : 1];
    }
    case TermKind::If: {
      if (auto r = sub(0)) return r;
      const TermPtr& c = t->kids[0];
      if (c->kind != TermKind::Const || !std::holds_alternative<bool>(c->cval)) return nullptr;
      return bool_of(c) ? t->kids[1] : t->kids[2];
    }
    case TermKind::Case: {
      if (auto r = sub(0)) return r;
      const TermPtr& s = t->kids[0];
      if (s->kind != TermKind::Inj) return nullptr;
      return s->idx == 1 ? substitute(t->kids[1], s->kids[0], t->name)
                         : substitute(t->kids[2], s->kids[0], t->name2);
    }
    case TermKind::Deref: {
      if (auto r = sub(0)) return r;
      const TermPtr& l = t->kids[0];
      if (l->kind != TermKind::Loc) return nullptr;
      auto it = store.find(l->label);
      if (it == store.end()) throw std::runtime_error("dereference of unallocated label");
      return it->second;
    }
    case TermKind::Assign: {
      if (auto r = sub(0)) return r;
      if (auto r = sub(1)) return r;
      const TermPtr& l = t->kids[0];
      if (l->kind != TermKind::Loc || !is_value(t->kids[1])) return nullptr;
      if (!store.count(l->label)) throw std::runtime_error("assignment to unallocated label");
      store[l->label] = t->kids[1];
      return m_unit();
    }
    case TermKind::RefNew: {
      if (auto r = sub(0)) return r;
      if (!is_value(t->kids[0])) return nullptr;
      int l = fresh_label(store);
      store[l] = t->kids[0];
      hidden.insert(l);
      return m_loc(l);
    }
  }
  throw std::logic_error("red: bad kind");
}

}  // namespace

std::optional<Config> step(const Config& c) {
  Config out = c;
  TermPtr r = red(c.term, out.store, out.hidden);
  if (!r) return std::nullopt;
  out.term = r;
  return out;
}

EvalResult evaluate(const Config& c, long fuel) {
  Config cur = c;
  for (long k = 0; k < fuel; k++) {
    auto next = step(cur);
    if (!next) return {EvalResult::Status::Converged, cur};
    cur = *next;
  }
  return {EvalResult::Status::OutOfFuel, cur};
}

TermPtr apply_op(const std::string& op, const std::vector<TermPtr>& args) {
  return delta(op, args);
}

std::set<int> label_closure(const std::set<int>& seed, const Store& s) {
  std::set<int> out = seed;
  std::vector<int> work(seed.begin(), seed.end());
  while (!work.empty()) {
    int l = work.back();
    work.pop_back();
    auto it = s.find(l);
    if (it == s.end()) continue;
    for (int l2 : free_labels(it->second))
      if (out.insert(l2).second) work.push_back(l2);
  }
  return out;
}

}  // namespace lsl
