// path_condition.cpp - normalization of path conditions

#include <algorithm>
#include <deque>
#include <sstream>

#include "diverge/solver.hpp"

namespace diverge {

namespace {

using Wide = __int128;

struct WideInterval {
  std::optional<Wide> lo, hi;
};

WideInterval eval_interval(const Term& t, const std::map<SymValue, Interval>& bounds) {
  WideInterval out{Wide(t.constant_part()), Wide(t.constant_part())};
  for (const auto& [v, c] : t.coeffs()) {
    auto it = bounds.find(v);
    Interval iv = it == bounds.end() ? Interval{} : it->second;
    const auto& from_lo = c > 0 ? iv.lo : iv.hi;
    const auto& from_hi = c > 0 ? iv.hi : iv.lo;
    std::optional<Wide> lo = from_lo ? std::optional<Wide>(Wide(*from_lo) * c) : std::nullopt;
    std::optional<Wide> hi = from_hi ? std::optional<Wide>(Wide(*from_hi) * c) : std::nullopt;
    out.lo = (out.lo && lo) ? std::optional<Wide>(*out.lo + *lo) : std::nullopt;
    out.hi = (out.hi && hi) ? std::optional<Wide>(*out.hi + *hi) : std::nullopt;
  }
  return out;
}

std::optional<std::int64_t> fold(const std::string& op, const std::vector<Term>& args,
                                 bool& infeasible) {
  if (args.size() != 2 || !args[0].is_constant() || !args[1].is_constant()) return std::nullopt;
  std::int64_t a = args[0].constant_part(), b = args[1].constant_part(), r = 0;
  if (op == "*") {
    if (__builtin_mul_overflow(a, b, &r)) return std::nullopt;
    return r;
  }
  if (op == "/") {
    if (b == 0) {
      infeasible = true;
      return std::nullopt;
    }
    if (a == INT64_MIN && b == -1) return std::nullopt;
    return a / b;
  }
  return std::nullopt;
}

}  // namespace

// Mutable workspace used by the value-semantic PathCondition operations.
class PcEditor {
 public:
  explicit PcEditor(PathCondition pc) : pc_(std::move(pc)) {}

  bool add(const Atom& a) {
    pending_.push_back(a);
    while (!pending_.empty()) {
      Atom next = pending_.front();
      pending_.pop_front();
      if (!process(next)) return false;
    }
    return true;
  }

  PathCondition take() { return std::move(pc_); }

 private:
  PathCondition pc_;
  std::deque<Atom> pending_;

  bool process(Atom a) {
    a.term = pc_.normalize(a.term);
    auto na = normalize_atom(a);
    if (!na) return false;
    a = *na;
    if (auto truth = a.constant_truth()) return *truth;
    const auto& cs = a.term.coeffs();
    WideInterval range = eval_interval(a.term, pc_.bounds_);
    switch (a.rel) {
      case Rel::Eq: {
        if ((range.lo && *range.lo > 0) || (range.hi && *range.hi < 0)) return false;
        std::optional<std::pair<SymValue, std::int64_t>> unit;
        for (const auto& [v, c] : cs)
          if (c == 1 || c == -1) unit = std::pair{v, c};  // keeps the largest id
        if (unit) {
          auto [v, c] = *unit;
          Term def = (a.term - Term::var(v, c)).scaled(-c);
          return eliminate(v, def);
        }
        pc_.atoms_.insert(a);
        return true;
      }
      case Rel::Le: {
        if (range.hi && *range.hi <= 0) return true;  // already entailed
        if (range.lo && *range.lo > 0) return false;
        if (cs.size() == 1) {
          auto [v, c] = cs.front();
          std::int64_t k = a.term.constant_part();
          Interval iv;
          if (c == 1) iv.hi = -k;  // v + k <= 0
          else iv.lo = k;          // -v + k <= 0
          return tighten(v, iv);
        }
        // Keep only the tightest constant per linear part.
        Term lin = a.term.plus_constant(-a.term.constant_part());
        for (auto it = pc_.atoms_.begin(); it != pc_.atoms_.end(); ++it) {
          if (it->rel != Rel::Le) continue;
          if (it->term.plus_constant(-it->term.constant_part()) != lin) continue;
          if (it->term.constant_part() >= a.term.constant_part()) return true;
          pc_.atoms_.erase(it);
          break;
        }
        pc_.atoms_.insert(a);
        return true;
      }
      case Rel::Ne: {
        if ((range.lo && *range.lo > 0) || (range.hi && *range.hi < 0)) return true;
        if (range.lo && range.hi && *range.lo == 0 && *range.hi == 0) return false;
        if (cs.size() == 1) {
          auto [v, c] = cs.front();  // c == 1 after normalization
          std::int64_t excluded = -a.term.constant_part() * c;
          Interval cur = pc_.bounds_of(v);
          if (cur.lo && *cur.lo == excluded) return tighten(v, Interval{excluded + 1, std::nullopt});
          if (cur.hi && *cur.hi == excluded) return tighten(v, Interval{std::nullopt, excluded - 1});
        }
        pc_.atoms_.insert(a);
        return true;
      }
    }
    return true;
  }

  bool tighten(SymValue v, Interval iv) {
    Interval cur = pc_.bounds_of(v);
    Interval next = cur;
    if (iv.lo && (!next.lo || *iv.lo > *next.lo)) next.lo = iv.lo;
    if (iv.hi && (!next.hi || *iv.hi < *next.hi)) next.hi = iv.hi;
    if (next == cur) return true;
    if (next.lo && next.hi && *next.lo > *next.hi) return false;
    if (next.lo && next.hi && *next.lo == *next.hi) {
      pc_.bounds_.erase(v);
      return eliminate(v, Term::constant(*next.lo));
    }
    pc_.bounds_[v] = next;
    // Single-variable disequalities may now sit on a bound; re-examine them
    // together with any atom whose range changed.
    std::vector<Atom> revisit;
    for (auto it = pc_.atoms_.begin(); it != pc_.atoms_.end();) {
      if (it->term.mentions(v)) {
        revisit.push_back(*it);
        it = pc_.atoms_.erase(it);
      } else {
        ++it;
      }
    }
    for (auto& a : revisit) pending_.push_back(std::move(a));
    return true;
  }

  bool eliminate(SymValue v, const Term& def) {
    for (auto& [w, t] : pc_.defs_) t = t.substitute(v, def);
    pc_.defs_[v] = def;
    auto b = pc_.bounds_.find(v);
    if (b != pc_.bounds_.end()) {
      if (b->second.hi) pending_.push_back(Atom{Rel::Le, def.plus_constant(-*b->second.hi)});
      if (b->second.lo) pending_.push_back(Atom{Rel::Le, (-def).plus_constant(*b->second.lo)});
      pc_.bounds_.erase(b);
    }
    for (auto it = pc_.atoms_.begin(); it != pc_.atoms_.end();) {
      if (it->term.mentions(v)) {
        pending_.push_back(Atom{it->rel, it->term.substitute(v, def)});
        it = pc_.atoms_.erase(it);
      } else {
        ++it;
      }
    }
    return rebuild_opaque();
  }

  // Re-normalizes opaque keys; colliding keys force equal results.
  bool rebuild_opaque() {
    std::map<OpaqueKey, SymValue> rebuilt;
    for (const auto& [key, r] : pc_.opaque_) {
      OpaqueKey k = key;
      for (auto& t : k.args) t = pc_.normalize(t);
      bool infeasible = false;
      if (auto folded = fold(k.op, k.args, infeasible)) {
        pending_.push_back(Atom{Rel::Eq, Term::var(r) - Term::constant(*folded)});
      }
      if (infeasible) return false;
      auto [it, inserted] = rebuilt.emplace(k, r);
      if (!inserted && it->second != r)
        pending_.push_back(Atom{Rel::Eq, Term::var(it->second) - Term::var(r)});
    }
    pc_.opaque_ = std::move(rebuilt);
    return true;
  }
};

Interval PathCondition::bounds_of(SymValue v) const {
  auto it = bounds_.find(v);
  return it == bounds_.end() ? Interval{} : it->second;
}

Term PathCondition::normalize(const Term& t) const {
  if (defs_.empty()) return t;
  Term out = t;
  for (const auto& [v, c] : t.coeffs()) {
    auto it = defs_.find(v);
    if (it != defs_.end()) out = out.substitute(v, it->second);
  }
  return out;
}

std::optional<PathCondition> PathCondition::assert_atom(const Atom& a) const {
  PcEditor ed(*this);
  if (!ed.add(a)) return std::nullopt;
  return ed.take();
}

std::optional<PathCondition> PathCondition::assume(const Atom& a) const {
  Atom normalized{a.rel, normalize(a.term)};
  auto next = assert_atom(a);
  if (!next) return std::nullopt;
  if (!is_sat_around(*next, normalized.vars())) return std::nullopt;
  return next;
}

std::pair<SymValue, PathCondition> PathCondition::intern(
    const std::string& op, std::vector<Term> args, const std::function<SymValue()>& fresh) const {
  for (auto& t : args) t = normalize(t);
  OpaqueKey key{op, std::move(args)};
  auto it = opaque_.find(key);
  if (it != opaque_.end()) return {it->second, *this};
  PathCondition next = *this;
  SymValue v = fresh();
  next.opaque_.emplace(std::move(key), v);
  return {v, std::move(next)};
}

std::optional<OpaqueKey> PathCondition::opaque_definition(SymValue v) const {
  for (const auto& [key, r] : opaque_)
    if (r == v) return key;
  return std::nullopt;
}

std::vector<Atom> PathCondition::constraints() const {
  std::vector<Atom> out;
  for (const auto& [v, t] : defs_) out.push_back(Atom{Rel::Eq, Term::var(v) - t});
  for (const auto& [v, iv] : bounds_) {
    if (iv.hi) out.push_back(Atom{Rel::Le, Term::var(v).plus_constant(-*iv.hi)});
    if (iv.lo) out.push_back(Atom{Rel::Le, (-Term::var(v)).plus_constant(*iv.lo)});
  }
  for (const auto& a : atoms_) out.push_back(a);
  return out;
}

std::set<SymValue> PathCondition::free_vars() const {
  std::set<SymValue> out;
  for (const auto& [v, t] : defs_)
    for (auto w : t.vars()) out.insert(w);
  for (const auto& [v, iv] : bounds_) out.insert(v);
  for (const auto& a : atoms_)
    for (auto w : a.vars()) out.insert(w);
  for (const auto& [key, r] : opaque_) {
    for (const auto& t : key.args)
      for (auto w : normalize(t).vars()) out.insert(w);
    for (auto w : normalize(r).vars()) out.insert(w);
  }
  return out;
}

std::string PathCondition::to_string(const Namer& namer) const {
  std::vector<std::string> parts;
  for (const auto& [v, t] : defs_) parts.push_back(namer(v) + " = " + t.to_string(namer));
  for (const auto& [v, iv] : bounds_) {
    if (iv.lo) parts.push_back(namer(v) + " >= " + std::to_string(*iv.lo));
    if (iv.hi) parts.push_back(namer(v) + " <= " + std::to_string(*iv.hi));
  }
  for (const auto& a : atoms_) parts.push_back(a.to_string(namer));
  for (const auto& [key, r] : opaque_) {
    std::string s = namer(r) + " = " + key.op + "(";
    for (size_t i = 0; i < key.args.size(); ++i)
      s += (i ? ", " : "") + normalize(key.args[i]).to_string(namer);
    parts.push_back(s + ")");
  }
  if (parts.empty()) return "true";
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) out += (i ? " /\\ " : "") + parts[i];
  return out;
}

PathCondition PathCondition::from_parts(std::map<SymValue, Term> defs,
                                        std::map<SymValue, Interval> bounds,
                                        std::set<Atom> atoms,
                                        std::map<OpaqueKey, SymValue> opaque) {
  PathCondition pc;
  pc.defs_ = std::move(defs);
  pc.bounds_ = std::move(bounds);
  pc.atoms_ = std::move(atoms);
  pc.opaque_ = std::move(opaque);
  return pc;
}

}  // namespace diverge
