// canonical.cpp - alpha-renamed state projections

#include <algorithm>

#include "diverge/solver.hpp"

namespace diverge {

namespace {

class Renamer {
 public:
  void name(SymValue v) {
    if (!names_.count(v)) names_.emplace(v, SymValue{next_++});
  }
  void name_all(const Term& t) {
    for (auto v : t.vars()) name(v);
  }
  bool named(SymValue v) const { return names_.count(v) != 0; }
  std::uint32_t index(SymValue v) const { return names_.at(v).id; }

  Term apply(const Term& t) {
    name_all(t);
    return t.rename([this](SymValue v) { return names_.at(v); });
  }
  std::string render(const Term& t) { return apply(t).to_string(namer); }
  std::string render(const Atom& a) {
    auto n = normalize_atom(Atom{a.rel, apply(a.term)});
    return n ? n->to_string(namer) : "false";
  }

  static std::string namer(SymValue v) { return "c" + std::to_string(v.id); }

 private:
  std::map<SymValue, SymValue> names_;
  std::uint32_t next_ = 0;
};

bool touches(const std::vector<SymValue>& vs, const std::set<SymValue>& s) {
  return std::any_of(vs.begin(), vs.end(), [&](SymValue v) { return s.count(v) != 0; });
}

}  // namespace

std::set<SymValue> support_closure(const PathCondition& pc, const std::vector<HeapCell>& heap,
                                   std::set<SymValue> seeds) {
  std::set<SymValue> s;
  for (auto v : seeds)
    for (auto w : pc.normalize(v).vars()) s.insert(w);
  std::vector<std::vector<SymValue>> groups;
  for (const auto& a : pc.atoms()) groups.push_back(a.vars());
  for (const auto& [key, r] : pc.opaque()) {
    std::vector<SymValue> g = pc.normalize(r).vars();
    for (const auto& t : key.args)
      for (auto v : pc.normalize(t).vars()) g.push_back(v);
    groups.push_back(std::move(g));
  }
  std::vector<std::pair<std::vector<SymValue>, std::vector<SymValue>>> cells;
  for (const auto& c : heap)
    cells.push_back({pc.normalize(c.addr).vars(), pc.normalize(c.content).vars()});

  bool grew = true;
  while (grew) {
    grew = false;
    auto add = [&](const std::vector<SymValue>& vs) {
      for (auto v : vs) grew |= s.insert(v).second;
    };
    for (const auto& g : groups)
      if (touches(g, s)) add(g);
    for (const auto& [addr, content] : cells)
      if (touches(addr, s)) add(content);
  }
  return s;
}

CanonicalForm canonicalize(const PathCondition& pc, const std::vector<TerminationCondition>& tcs,
                           const std::vector<HeapCell>& heap, const std::set<SymValue>& support,
                           const std::vector<Term>& tracked) {
  Renamer rn;
  CanonicalForm out;

  // Naming order: termination conditions, then heap cells reachable from
  // already-named addresses, then everything else by identifier.
  std::vector<Term> tc_terms;
  for (const auto& tc : tcs) {
    Term t = pc.normalize(tc.guard.term);
    rn.name_all(t);
    tc_terms.push_back(t);
  }
  std::vector<Term> tracked_terms;
  for (const auto& t : tracked) {
    tracked_terms.push_back(pc.normalize(t));
    rn.name_all(tracked_terms.back());
  }

  struct Cell {
    Term addr, content;
    bool done = false;
  };
  std::vector<Cell> cells;
  for (const auto& c : heap) {
    Term a = pc.normalize(c.addr);
    if (!touches(a.vars(), support)) continue;
    cells.push_back({a, pc.normalize(c.content)});
  }
  auto cell_key = [&](const Cell& c) -> std::optional<std::uint32_t> {
    std::optional<std::uint32_t> best;
    for (auto v : c.addr.vars()) {
      if (!rn.named(v)) return std::nullopt;
      best = best ? std::max(*best, rn.index(v)) : rn.index(v);
    }
    return best ? best : std::optional<std::uint32_t>(0);
  };
  while (true) {
    Cell* pick = nullptr;
    std::uint32_t pick_key = 0;
    for (auto& c : cells) {
      if (c.done) continue;
      auto k = cell_key(c);
      if (k && (!pick || *k < pick_key)) {
        pick = &c;
        pick_key = *k;
      }
    }
    if (!pick) {
      for (auto& c : cells)
        if (!c.done) {
          pick = &c;  // cells are in address-identifier order
          break;
        }
      if (!pick) break;
      rn.name_all(pick->addr);
    }
    rn.name_all(pick->content);
    pick->done = true;
  }
  for (auto v : support) rn.name(v);

  std::set<std::string> tc_strings;
  for (std::size_t i = 0; i < tcs.size(); ++i) {
    std::string prefix = "h" + std::to_string(tcs[i].head) + (tcs[i].polarity ? "+ " : "- ");
    tc_strings.insert(prefix + rn.render(Atom{tcs[i].guard.rel, tc_terms[i]}));
  }
  out.tcs.assign(tc_strings.begin(), tc_strings.end());
  for (const auto& t : tracked_terms) out.tracked.push_back(rn.render(t));

  for (auto& c : cells) out.heap.push_back(rn.render(c.addr) + " |-> " + rn.render(c.content));
  std::sort(out.heap.begin(), out.heap.end());

  for (const auto& [v, iv] : pc.bounds()) {
    if (!support.count(v)) continue;
    if (iv.lo) out.atoms.push_back(rn.render(Atom{Rel::Le, (-Term::var(v)).plus_constant(*iv.lo)}));
    if (iv.hi) out.atoms.push_back(rn.render(Atom{Rel::Le, Term::var(v).plus_constant(-*iv.hi)}));
  }
  for (const auto& a : pc.atoms())
    if (touches(a.vars(), support)) out.atoms.push_back(rn.render(a));
  for (const auto& [key, r] : pc.opaque()) {
    Term rt = pc.normalize(r);
    std::vector<Term> args;
    std::vector<SymValue> vs = rt.vars();
    for (const auto& t : key.args) {
      args.push_back(pc.normalize(t));
      for (auto v : args.back().vars()) vs.push_back(v);
    }
    if (!touches(vs, support)) continue;
    std::string s = key.op + "(";
    for (std::size_t i = 0; i < args.size(); ++i) s += (i ? ", " : "") + rn.render(args[i]);
    out.atoms.push_back(s + ") = " + rn.render(rt));
  }
  std::sort(out.atoms.begin(), out.atoms.end());
  out.atoms.erase(std::unique(out.atoms.begin(), out.atoms.end()), out.atoms.end());
  return out;
}

std::string CanonicalForm::to_string() const {
  std::string s = "{";
  auto emit = [&](const char* label, const std::vector<std::string>& xs) {
    s += label;
    s += ": [";
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "; " : "") + xs[i];
    s += "]";
  };
  emit("tc", tcs);
  s += ", ";
  emit("heap", heap);
  s += ", ";
  emit("pc", atoms);
  s += ", ";
  emit("vars", tracked);
  return s + "}";
}

}  // namespace diverge
