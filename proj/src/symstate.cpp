// symstate.cpp - operations on abstract states

#include "diverge/symstate.hpp"

#include <algorithm>
#include <sstream>

namespace diverge {

TracePtr trace_push(TracePtr t, TraceEntry e) {
  return std::make_shared<const TraceNode>(TraceNode{std::move(e), std::move(t)});
}

std::vector<TraceEntry> trace_entries(const TracePtr& t) {
  std::vector<TraceEntry> out;
  for (const TraceNode* n = t.get(); n; n = n->prev.get()) out.push_back(n->entry);
  std::reverse(out.begin(), out.end());
  return out;
}

AbstractState fresh_entry_state(const Cfg& cfg) {
  AbstractState st;
  int np = cfg.param_count();
  for (int i = 0; i < np; ++i) st.params.push_back(st.fresh());
  for (std::size_t i = 0; i < cfg.vars.size(); ++i) {
    SymValue a = st.fresh();
    st.stack.push_back(a);
    st.slot_addrs.insert(a);
  }
  for (int i = 0; i < np; ++i) st.heap.points_to[st.stack[i]] = st.params[i];
  return st;
}

namespace {

bool is_opaque_address(const PathCondition& pc, SymValue k, std::vector<Term>* args = nullptr) {
  auto def = pc.opaque_definition(k);
  if (!def || def->op != "&") return false;
  if (args) *args = def->args;
  return true;
}

bool is_local(const AbstractState& st, SymValue k) {
  if (st.slot_addrs.count(k) || st.heap.allocated.count(k)) return true;
  std::vector<Term> args;
  if (!is_opaque_address(st.pc, k, &args)) return false;
  for (const auto& t : args)
    for (auto v : st.pc.normalize(t).vars())
      if (st.slot_addrs.count(v) || st.heap.allocated.count(v)) return true;
  return false;
}

bool needs_rekey(const AbstractState& st) {
  const auto& defs = st.pc.definitions();
  if (defs.empty()) return false;
  auto defined = [&](SymValue v) { return defs.count(v) != 0; };
  for (const auto& [k, c] : st.heap.points_to)
    if (defined(k)) return true;
  for (const auto& [k, c] : st.footprint)
    if (defined(k)) return true;
  for (auto v : st.slot_addrs)
    if (defined(v)) return true;
  for (auto v : st.heap.allocated)
    if (defined(v)) return true;
  for (auto v : st.heap.freed)
    if (defined(v)) return true;
  for (auto v : st.stack)
    if (defined(v)) return true;
  return false;
}

// Moves every address to its current normal form, merging cells whose
// addresses became equal.
void rekey(AbstractState& st) {
  for (int round = 0; round < 16 && needs_rekey(st); ++round) {
    std::vector<Atom> merges;
    auto key_of = [&](SymValue k) -> SymValue {
      auto nk = address_key(st, Term::var(k));
      if (!nk) throw InfeasibleState();
      return *nk;
    };
    std::set<SymValue> locals;
    for (auto v : st.slot_addrs) locals.insert(v);
    for (auto v : st.heap.allocated) locals.insert(v);

    auto remap_set = [&](const std::set<SymValue>& in, bool distinct) {
      std::set<SymValue> out;
      for (auto v : in)
        if (!out.insert(key_of(v)).second && distinct) throw InfeasibleState();
      return out;
    };
    std::set<SymValue> slots = remap_set(st.slot_addrs, true);
    std::set<SymValue> allocated = remap_set(st.heap.allocated, true);
    for (auto v : allocated)
      if (slots.count(v)) throw InfeasibleState();

    std::map<SymValue, SymValue> cells;
    std::map<SymValue, SymValue> origin;
    for (const auto& [k, c] : st.heap.points_to) {
      SymValue nk = key_of(k);
      auto [it, inserted] = cells.emplace(nk, c);
      if (!inserted) {
        if (locals.count(k) || locals.count(origin[nk])) throw InfeasibleState();
        if (it->second != c) merges.push_back(Atom{Rel::Eq, Term::var(it->second) - Term::var(c)});
      } else {
        origin[nk] = k;
      }
    }
    std::map<SymValue, SymValue> fp;
    for (const auto& [k, c] : st.footprint) {
      auto [it, inserted] = fp.emplace(key_of(k), c);
      if (!inserted && it->second != c)
        merges.push_back(Atom{Rel::Eq, Term::var(it->second) - Term::var(c)});
    }
    std::set<SymValue> freed;
    for (auto v : st.heap.freed) {
      auto nk = address_key(st, Term::var(v));
      if (nk) freed.insert(*nk);
    }
    for (auto& s : st.stack) s = key_of(s);

    st.slot_addrs = std::move(slots);
    st.heap.allocated = std::move(allocated);
    st.heap.points_to = std::move(cells);
    st.heap.freed = std::move(freed);
    st.footprint = std::move(fp);
    for (const auto& m : merges) {
      auto next = st.pc.assume(m);
      if (!next) throw InfeasibleState();
      st.pc = std::move(*next);
    }
  }
}

}  // namespace

std::optional<SymValue> address_key(AbstractState& st, const Term& addr) {
  Term t = st.pc.normalize(addr);
  if (auto v = t.as_var()) return *v;
  if (t.is_constant() && t.constant_part() == 0) return std::nullopt;
  auto [v, pc] = st.pc.intern("&", {t}, [&] { return st.fresh(); });
  st.pc = std::move(pc);
  return v;
}

std::pair<SymValue, AbstractState> load(AbstractState st, SymValue addr) {
  if (st.heap.freed.count(addr)) throw UseAfterFree();
  auto it = st.heap.points_to.find(addr);
  if (it != st.heap.points_to.end()) return {it->second, std::move(st)};
  SymValue c = st.fresh();
  bool local = is_local(st, addr);
  st.heap.points_to[addr] = c;
  if (!local) {
    st.footprint[addr] = c;
    auto next = st.pc.assume(Atom{Rel::Ne, Term::var(addr)});
    if (!next) throw InfeasibleState();
    st.pc = std::move(*next);
    rekey(st);
  }
  return {c, std::move(st)};
}

std::optional<SymValue> peek(const AbstractState& st, SymValue addr) {
  auto it = st.heap.points_to.find(addr);
  if (it == st.heap.points_to.end()) return std::nullopt;
  return it->second;
}

AbstractState store(AbstractState st, SymValue addr, SymValue value) {
  if (st.heap.freed.count(addr)) throw UseAfterFree();
  if (!st.heap.points_to.count(addr)) {
    SymValue old;
    std::tie(old, st) = load(std::move(st), addr);
    // The address may have been re-keyed by the non-null assumption.
    addr = *address_key(st, Term::var(addr));
  }
  st.heap.points_to[addr] = value;
  return st;
}

std::vector<std::pair<SymValue, AbstractState>> alloc(AbstractState st) {
  std::vector<std::pair<SymValue, AbstractState>> out;
  AbstractState null_st = st;
  SymValue a = st.fresh();
  st.heap.allocated.insert(a);
  st.heap.points_to[a] = st.fresh();
  if (auto pc = st.pc.assert_atom(Atom{Rel::Ne, Term::var(a)})) {
    st.pc = std::move(*pc);
    out.emplace_back(a, std::move(st));
  }
  SymValue z = bind_term(null_st, Term::constant(0));
  out.emplace_back(z, std::move(null_st));
  return out;
}

AbstractState free_cell(AbstractState st, SymValue addr) {
  if (st.heap.freed.count(addr)) throw UseAfterFree();
  if (st.heap.allocated.erase(addr)) {
    st.heap.points_to.erase(addr);
    st.heap.freed.insert(addr);
    return st;
  }
  if (!is_local(st, addr)) {
    if (!st.heap.points_to.count(addr)) {
      SymValue old;
      std::tie(old, st) = load(std::move(st), addr);
      addr = *address_key(st, Term::var(addr));
    }
    st.heap.points_to.erase(addr);
    st.heap.freed.insert(addr);
  }
  return st;
}

std::optional<AbstractState> assume(AbstractState st, const Atom& a) {
  auto next = st.pc.assume(a);
  if (!next) return std::nullopt;
  st.pc = std::move(*next);
  try {
    rekey(st);
  } catch (const InfeasibleState&) {
    return std::nullopt;
  }
  return st;
}

SymValue bind_term(AbstractState& st, const Term& t) {
  Term n = st.pc.normalize(t);
  if (auto v = n.as_var()) return *v;
  SymValue v = st.fresh();
  st.pc = *st.pc.assert_atom(Atom{Rel::Eq, Term::var(v) - n});
  return v;
}

std::map<SymValue, SymValue> subheap_rooted_at(const AbstractState& st,
                                               const std::vector<SymValue>& roots) {
  std::set<SymValue> reached;
  for (auto r : roots)
    for (auto v : st.pc.normalize(r).vars()) reached.insert(v);
  std::map<SymValue, SymValue> out;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [k, c] : st.heap.points_to) {
      if (out.count(k)) continue;
      bool hit = reached.count(k) != 0;
      std::vector<Term> args;
      if (!hit && is_opaque_address(st.pc, k, &args))
        for (const auto& t : args)
          for (auto v : st.pc.normalize(t).vars()) hit = hit || reached.count(v);
      if (!hit) continue;
      out[k] = c;
      grew = true;
      reached.insert(k);
      for (auto v : st.pc.normalize(c).vars()) reached.insert(v);
    }
  }
  return out;
}

LoopSnapshot snapshot(const AbstractState& st, int head,
                      const std::vector<TerminationCondition>& instantiated,
                      const std::vector<SymValue>& tracked) {
  std::set<SymValue> seeds(tracked.begin(), tracked.end());
  for (const auto& tc : instantiated)
    for (auto v : st.pc.normalize(tc.guard.term).vars()) seeds.insert(v);
  std::vector<HeapCell> cells;
  for (const auto& [k, c] : st.heap.points_to) cells.push_back({k, c});
  auto support = support_closure(st.pc, cells, seeds);
  std::vector<Term> tracked_terms;
  for (auto v : tracked) tracked_terms.push_back(Term::var(v));
  return LoopSnapshot{head, canonicalize(st.pc, instantiated, cells, support, tracked_terms),
                      st.trace};
}

std::string to_string(SpecKind k) {
  switch (k) {
    case SpecKind::Ok: return "ok";
    case SpecKind::InfiniteProgram: return "infinite_program";
    case SpecKind::RecursivePending: return "recursive_pending";
  }
  return "?";
}

std::map<SymValue, std::string> precondition_names(const PathCondition& pc,
                                                   const std::vector<std::string>& param_names,
                                                   const std::vector<SymValue>& params,
                                                   const std::map<SymValue, SymValue>& footprint) {
  std::map<SymValue, std::string> names;
  for (std::size_t i = 0; i < params.size() && i < param_names.size(); ++i)
    names.emplace(params[i], param_names[i]);
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [addr, content] : footprint) {
      if (names.count(content)) continue;
      std::string base;
      if (auto it = names.find(addr); it != names.end()) {
        base = "*" + it->second;
      } else if (auto def = pc.opaque_definition(addr); def && def->op == "&") {
        Term t = pc.normalize(def->args.front());
        bool known = true;
        for (auto v : t.vars()) known = known && names.count(v);
        if (!known) continue;
        base = "*(" + t.to_string([&](SymValue v) { return names.at(v); }) + ")";
      } else {
        continue;
      }
      names.emplace(content, base);
      grew = true;
    }
  }
  return names;
}

namespace {

std::string print_cells(const std::map<SymValue, SymValue>& cells, const PathCondition& pc) {
  std::string s;
  for (const auto& [k, c] : cells) {
    if (!s.empty()) s += " * ";
    s += default_name(k) + " |-> " + pc.normalize(c).to_string();
  }
  return s.empty() ? "emp" : s;
}

std::string print_records(const std::vector<RecursiveCallRecord>& recs) {
  std::string s;
  for (const auto& r : recs) {
    s += "  RecursiveCall(" + r.callee;
    for (const auto& a : r.args) s += ", " + a.to_string();
    s += ") via [";
    for (std::size_t i = 0; i < r.chain.size(); ++i) s += (i ? ", " : "") + r.chain[i];
    s += "]\n";
  }
  return s;
}

}  // namespace

std::string print_state(const AbstractState& st, const Cfg& cfg) {
  std::ostringstream os;
  os << "stack:";
  for (std::size_t i = 0; i < st.stack.size() && i < cfg.vars.size(); ++i)
    os << ' ' << cfg.vars[i].name << '=' << default_name(st.stack[i]);
  os << "\nheap: " << print_cells(st.heap.points_to, st.pc) << "\n";
  os << "footprint: " << print_cells(st.footprint, st.pc) << "\n";
  os << "pc: " << st.pc.to_string() << "\n";
  for (const auto& tc : st.tcs) os << "tc h" << tc.head << ": " << tc.guard.to_string() << "\n";
  os << print_records(st.rec_calls);
  return os.str();
}

std::string print_spec(const Spec& s) {
  std::ostringstream os;
  os << to_string(s.kind) << (s.widened ? " (widened)" : "") << "\n";
  os << "  params:";
  for (auto p : s.params) os << ' ' << default_name(p);
  os << "\n  pre: " << print_cells(s.footprint, s.pc) << "\n";
  os << "  pc: " << s.pc.to_string() << "\n";
  if (s.kind == SpecKind::InfiniteProgram) {
    os << "  post: false (" << s.origin << ")\n";
  } else {
    os << "  post: " << print_cells(s.post_heap, s.pc) << "\n";
    if (s.ret) os << "  ret: " << s.pc.normalize(*s.ret).to_string() << "\n";
  }
  os << print_records(s.rec_calls);
  return os.str();
}

std::string print_summary(const Summary& s) {
  std::ostringstream os;
  os << "summary " << s.procedure << " (k=" << s.k << (s.truncated ? ", truncated" : "")
     << (s.incomplete ? ", incomplete" : "") << ")\n";
  for (const auto& sp : s.specs) os << print_spec(sp);
  return os.str();
}

}  // namespace diverge
