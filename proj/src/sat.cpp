// sat.cpp - decision procedure for normalized path conditions
//
// Constraints are split into variable-connected components. Each component
// goes through integer bound propagation, then exhaustive search when the
// box is small, then Fourier-Motzkin elimination. Anything that runs out of
// budget is reported satisfiable, which keeps the procedure sound for
// refutation.

#include <algorithm>
#include <numeric>

#include "diverge/solver.hpp"

namespace diverge {

namespace {

using Wide = __int128;

constexpr Wide kClamp = Wide(1) << 62;
constexpr int kPropagationRounds = 100;
constexpr std::size_t kMaxEnumVars = 8;
constexpr Wide kMaxBox = 200000;
constexpr std::size_t kMaxFmAtoms = 2000;
constexpr long kSearchBudget = 2000000;

struct Range {
  std::optional<Wide> lo, hi;
  bool empty() const { return lo && hi && *lo > *hi; }
};

Wide floor_div(Wide a, Wide b) {
  Wide q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Wide ceil_div(Wide a, Wide b) { return -floor_div(-a, b); }

struct Problem {
  std::vector<SymValue> vars;
  std::map<SymValue, Range> ranges;
  std::vector<Atom> atoms;  // multi-variable Le/Eq/Ne and single-variable Ne
};

// Collects the constraints connected to `seeds`.
Problem gather(const PathCondition& pc, const std::vector<SymValue>& seeds) {
  std::vector<Atom> pool(pc.atoms().begin(), pc.atoms().end());
  std::set<SymValue> in;
  for (auto v : seeds)
    for (auto w : pc.normalize(v).vars()) in.insert(w);
  std::vector<bool> taken(pool.size(), false);
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (taken[i]) continue;
      auto vs = pool[i].vars();
      if (std::none_of(vs.begin(), vs.end(), [&](SymValue v) { return in.count(v); })) continue;
      taken[i] = true;
      grew = true;
      for (auto v : vs) in.insert(v);
    }
  }
  Problem p;
  p.vars.assign(in.begin(), in.end());
  for (auto v : p.vars) {
    Interval iv = pc.bounds_of(v);
    Range r;
    if (iv.lo) r.lo = *iv.lo;
    if (iv.hi) r.hi = *iv.hi;
    p.ranges[v] = r;
  }
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (taken[i]) p.atoms.push_back(pool[i]);
  return p;
}

std::vector<Atom> as_le(const Atom& a) {
  if (a.rel == Rel::Le) return {a};
  if (a.rel == Rel::Eq) return {a, Atom{Rel::Le, -a.term}};
  return {};
}

bool set_lo(Range& r, Wide v, bool& changed) {
  if (v < -kClamp || v > kClamp) return true;
  if (!r.lo || v > *r.lo) {
    r.lo = v;
    changed = true;
  }
  return !r.empty();
}

bool set_hi(Range& r, Wide v, bool& changed) {
  if (v < -kClamp || v > kClamp) return true;
  if (!r.hi || v < *r.hi) {
    r.hi = v;
    changed = true;
  }
  return !r.empty();
}

// Interval propagation. Returns false when some range becomes empty.
bool propagate(Problem& p) {
  std::vector<Atom> les;
  for (const auto& a : p.atoms)
    for (auto& l : as_le(a)) les.push_back(l);
  for (int round = 0; round < kPropagationRounds; ++round) {
    bool changed = false;
    for (const auto& a : les) {
      const auto& cs = a.term.coeffs();
      for (std::size_t j = 0; j < cs.size(); ++j) {
        Wide rest_min = a.term.constant_part();
        bool bounded = true;
        for (std::size_t i = 0; i < cs.size() && bounded; ++i) {
          if (i == j) continue;
          const Range& r = p.ranges[cs[i].first];
          Wide c = cs[i].second;
          auto m = c > 0 ? r.lo : r.hi;
          if (!m) bounded = false;
          else rest_min += c * *m;
        }
        if (!bounded) continue;
        Wide cj = cs[j].second;
        Range& rj = p.ranges[cs[j].first];
        // cj * x <= -rest_min
        bool ok = cj > 0 ? set_hi(rj, floor_div(-rest_min, cj), changed)
                         : set_lo(rj, ceil_div(rest_min, -cj), changed);
        if (!ok) return false;
      }
    }
    for (const auto& a : p.atoms) {
      if (a.rel != Rel::Ne || a.term.coeffs().size() != 1) continue;
      auto [v, c] = a.term.coeffs().front();
      if (a.term.constant_part() % c != 0) continue;
      Wide excluded = -Wide(a.term.constant_part()) / c;
      Range& r = p.ranges[v];
      if (r.lo && *r.lo == excluded && !set_lo(r, excluded + 1, changed)) return false;
      if (r.hi && *r.hi == excluded && !set_hi(r, excluded - 1, changed)) return false;
    }
    if (!changed) break;
  }
  for (auto& [v, r] : p.ranges)
    if (r.empty()) return false;
  return true;
}

Wide eval(const Term& t, const std::map<SymValue, Wide>& model) {
  Wide s = t.constant_part();
  for (const auto& [v, c] : t.coeffs()) s += Wide(c) * model.at(v);
  return s;
}

bool holds(const Atom& a, const std::map<SymValue, Wide>& model) {
  Wide s = eval(a.term, model);
  switch (a.rel) {
    case Rel::Eq: return s == 0;
    case Rel::Ne: return s != 0;
    case Rel::Le: return s <= 0;
  }
  return false;
}

// Backtracking search over the given ranges (all finite).
struct Search {
  const std::vector<SymValue>& order;
  const std::map<SymValue, std::pair<Wide, Wide>>& box;
  std::vector<std::vector<const Atom*>> checks;  // atoms completed at each depth
  std::map<SymValue, Wide> model;
  long budget = kSearchBudget;
  bool exhausted = false;

  Search(const std::vector<SymValue>& o, const std::map<SymValue, std::pair<Wide, Wide>>& b,
         const std::vector<Atom>& atoms)
      : order(o), box(b), checks(o.size()) {
    std::map<SymValue, std::size_t> pos;
    for (std::size_t i = 0; i < o.size(); ++i) pos[o[i]] = i;
    for (const auto& a : atoms) {
      std::size_t last = 0;
      for (auto v : a.vars()) last = std::max(last, pos.at(v));
      checks[last].push_back(&a);
    }
  }

  bool run(std::size_t depth = 0) {
    if (depth == order.size()) return true;
    auto [lo, hi] = box.at(order[depth]);
    for (Wide x = lo; x <= hi; ++x) {
      if (--budget < 0) {
        exhausted = true;
        return false;
      }
      model[order[depth]] = x;
      bool ok = true;
      for (const Atom* a : checks[depth])
        if (!holds(*a, model)) {
          ok = false;
          break;
        }
      if (ok && run(depth + 1)) return true;
      if (exhausted) return false;
    }
    model.erase(order[depth]);
    return false;
  }
};

struct FmAtom {
  std::map<SymValue, Wide> coeffs;
  Wide constant = 0;
  friend auto operator<=>(const FmAtom&, const FmAtom&) = default;
};

// Integer-tightened: divide by the coefficient gcd and floor the bound.
bool tighten(FmAtom& a) {
  Wide g = 0;
  for (auto& [v, c] : a.coeffs) {
    Wide m = c < 0 ? -c : c;
    Wide x = g, y = m;
    while (y != 0) {
      Wide t = x % y;
      x = y;
      y = t;
    }
    g = x;
  }
  if (g == 0) return true;
  for (auto& [v, c] : a.coeffs) {
    c /= g;
    if (c > kClamp || c < -kClamp) return false;
  }
  a.constant = -floor_div(-a.constant, g);
  return a.constant <= kClamp && a.constant >= -kClamp;
}

enum class FmResult { Unsat, Unknown };

FmResult fourier_motzkin(const Problem& p) {
  std::set<FmAtom> cur;
  auto add = [&](FmAtom a) -> bool {
    if (!tighten(a)) return false;
    cur.insert(std::move(a));
    return true;
  };
  for (const auto& a : p.atoms)
    for (const auto& l : as_le(a)) {
      FmAtom f;
      for (const auto& [v, c] : l.term.coeffs()) f.coeffs[v] = c;
      f.constant = l.term.constant_part();
      add(std::move(f));
    }
  for (const auto& [v, r] : p.ranges) {
    if (r.hi) add(FmAtom{{{v, 1}}, -*r.hi});
    if (r.lo) add(FmAtom{{{v, -1}}, *r.lo});
  }
  std::set<SymValue> remaining(p.vars.begin(), p.vars.end());
  while (true) {
    for (const auto& a : cur)
      if (a.coeffs.empty() && a.constant > 0) return FmResult::Unsat;
    if (remaining.empty()) return FmResult::Unknown;
    SymValue pick{};
    std::size_t best = SIZE_MAX;
    for (auto v : remaining) {
      std::size_t pos = 0, neg = 0;
      for (const auto& a : cur) {
        auto it = a.coeffs.find(v);
        if (it == a.coeffs.end()) continue;
        (it->second > 0 ? pos : neg)++;
      }
      if (pos * neg < best) {
        best = pos * neg;
        pick = v;
      }
    }
    remaining.erase(pick);
    std::vector<FmAtom> pos, neg;
    std::set<FmAtom> next;
    for (const auto& a : cur) {
      auto it = a.coeffs.find(pick);
      if (it == a.coeffs.end()) next.insert(a);
      else (it->second > 0 ? pos : neg).push_back(a);
    }
    for (const auto& a : pos)
      for (const auto& b : neg) {
        Wide ca = a.coeffs.at(pick), cb = -b.coeffs.at(pick);
        FmAtom r;
        r.constant = a.constant * cb + b.constant * ca;
        for (const auto& [v, c] : a.coeffs) r.coeffs[v] += c * cb;
        for (const auto& [v, c] : b.coeffs) r.coeffs[v] += c * ca;
        for (auto it = r.coeffs.begin(); it != r.coeffs.end();)
          it = it->second == 0 ? r.coeffs.erase(it) : std::next(it);
        if (!tighten(r)) return FmResult::Unknown;
        next.insert(std::move(r));
        if (next.size() > kMaxFmAtoms) return FmResult::Unknown;
      }
    cur = std::move(next);
  }
}

bool decide(Problem p) {
  if (p.vars.empty() && p.atoms.empty()) return true;
  if (!propagate(p)) return false;
  std::map<SymValue, std::pair<Wide, Wide>> box;
  Wide volume = 1;
  bool finite = p.vars.size() <= kMaxEnumVars;
  for (auto v : p.vars) {
    if (!finite) break;
    const Range& r = p.ranges[v];
    if (!r.lo || !r.hi) {
      finite = false;
      break;
    }
    box[v] = {*r.lo, *r.hi};
    volume *= (*r.hi - *r.lo + 1);
    if (volume > kMaxBox) finite = false;
  }
  if (finite) {
    Search s(p.vars, box, p.atoms);
    bool found = s.run();
    if (found || !s.exhausted) return found;
  }
  return fourier_motzkin(p) != FmResult::Unsat;
}

}  // namespace

bool is_sat(const PathCondition& pc) {
  // Decide each connected component separately.
  std::set<SymValue> seen;
  for (auto v : pc.free_vars()) {
    if (seen.count(v)) continue;
    Problem p = gather(pc, {v});
    for (auto w : p.vars) seen.insert(w);
    if (!decide(std::move(p))) return false;
  }
  return true;
}

bool is_sat_around(const PathCondition& pc, const std::vector<SymValue>& vars) {
  if (vars.empty()) return true;
  return decide(gather(pc, vars));
}

bool entails(const PathCondition& pc, const Atom& a) {
  for (const auto& n : negate(a)) {
    auto q = pc.assert_atom(n);
    if (!q) continue;
    if (is_sat_around(*q, Atom{n.rel, pc.normalize(n.term)}.vars())) return false;
  }
  return true;
}

std::optional<std::map<SymValue, std::int64_t>> find_model(const PathCondition& pc,
                                                           const std::vector<SymValue>& wanted,
                                                           std::int64_t bound) {
  Problem p = gather(pc, wanted);
  if (!propagate(p)) return std::nullopt;
  std::map<SymValue, std::pair<Wide, Wide>> box;
  for (auto v : p.vars) {
    const Range& r = p.ranges[v];
    Wide lo = r.lo ? std::max<Wide>(*r.lo, -bound) : -bound;
    Wide hi = r.hi ? std::min<Wide>(*r.hi, bound) : bound;
    if (lo > hi) return std::nullopt;
    box[v] = {lo, hi};
  }
  Search s(p.vars, box, p.atoms);
  if (!s.run()) return std::nullopt;
  std::map<SymValue, std::int64_t> out;
  for (const auto& [v, x] : s.model) out[v] = static_cast<std::int64_t>(x);
  for (auto v : wanted) {
    if (out.count(v)) continue;
    Term t = pc.normalize(v);
    Wide x = t.constant_part();
    for (const auto& [w, c] : t.coeffs()) {
      auto it = s.model.find(w);
      x += Wide(c) * (it == s.model.end() ? 0 : it->second);
    }
    out[v] = static_cast<std::int64_t>(x);
  }
  return out;
}

OracleResult oracle_sat(const std::vector<Atom>& atoms, std::int64_t bound) {
  std::set<SymValue> vs;
  for (const auto& a : atoms)
    for (auto v : a.vars()) vs.insert(v);
  std::vector<SymValue> order(vs.begin(), vs.end());
  std::map<SymValue, Wide> model;
  for (auto v : order) model[v] = -bound;
  while (true) {
    if (std::all_of(atoms.begin(), atoms.end(), [&](const Atom& a) { return holds(a, model); })) {
      OracleResult r{true, {}};
      for (const auto& [v, x] : model) r.model[v] = static_cast<std::int64_t>(x);
      return r;
    }
    std::size_t i = 0;
    for (; i < order.size(); ++i) {
      if (model[order[i]] < bound) {
        ++model[order[i]];
        break;
      }
      model[order[i]] = -bound;
    }
    if (i == order.size()) return OracleResult{};
  }
}

}  // namespace diverge
