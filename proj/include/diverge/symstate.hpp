// symstate.hpp - symbolic heaps, abstract states, specs and summaries
//
// Every program variable lives in a stack slot: the stack maps a variable
// to the address of its slot, and the slot's content is an ordinary
// points-to cell. Cells reached through pointers that were not allocated by
// the procedure are materialized on first access and recorded in the
// footprint, which is the precondition heap of the spec being built.

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "diverge/cfg.hpp"
#include "diverge/issue.hpp"
#include "diverge/solver.hpp"

namespace diverge {

struct SymHeap {
  std::map<SymValue, SymValue> points_to;
  std::set<SymValue> allocated;
  std::set<SymValue> freed;

  friend bool operator==(const SymHeap&, const SymHeap&) = default;
};

struct TraceEntry {
  int line = 0;
  std::string description;
  std::vector<std::string> calls;  // callees reached by this step
};

struct TraceNode;
using TracePtr = std::shared_ptr<const TraceNode>;
struct TraceNode {
  TraceEntry entry;
  TracePtr prev;
};

TracePtr trace_push(TracePtr t, TraceEntry e);
std::vector<TraceEntry> trace_entries(const TracePtr& t);  // oldest first

struct LoopSnapshot {
  int head = -1;
  CanonicalForm form;
  TracePtr trace;  // trace when the snapshot was taken

  bool same_state(const LoopSnapshot& o) const { return head == o.head && form == o.form; }
};

struct RecursiveCallRecord {
  std::string callee;
  std::vector<Term> args;
  std::vector<std::string> chain;  // procedures the record passed through, innermost first
  SourceLoc loc;                   // call site in the procedure holding the record

  friend bool operator==(const RecursiveCallRecord&, const RecursiveCallRecord&) = default;
};

class UseAfterFree : public std::runtime_error {
 public:
  UseAfterFree() : std::runtime_error("use after free") {}
};

/// Raised when a heap update makes the state infeasible (two distinct
/// allocations or slots collapsing to the same address).
class InfeasibleState : public std::runtime_error {
 public:
  InfeasibleState() : std::runtime_error("infeasible state") {}
};

struct AbstractState {
  std::vector<SymValue> stack;  // variable slot -> slot address
  SymHeap heap;
  std::set<SymValue> slot_addrs;
  std::map<SymValue, SymValue> footprint;  // precondition cells
  std::vector<SymValue> params;            // precondition parameter values
  PathCondition pc;
  std::vector<TerminationCondition> tcs;
  std::vector<RecursiveCallRecord> rec_calls;
  std::map<int, std::vector<LoopSnapshot>> head_history;
  std::map<int, int> visit_counts;
  std::set<int> stopped_heads;  // heads where unrolling was cut off
  bool widened = false;
  std::optional<Term> ret;
  TracePtr trace;
  std::set<std::string> external_calls;
  std::uint32_t next_id = 1;

  SymValue fresh() { return SymValue{next_id++}; }
};

AbstractState fresh_entry_state(const Cfg& cfg);

/// The heap key for an address term: a variable stays itself, anything else
/// is interned as an opaque `&` application. Returns nullopt for address 0.
std::optional<SymValue> address_key(AbstractState& st, const Term& addr);

std::pair<SymValue, AbstractState> load(AbstractState st, SymValue addr);
/// Non-mutating read: the content if the cell exists.
std::optional<SymValue> peek(const AbstractState& st, SymValue addr);
AbstractState store(AbstractState st, SymValue addr, SymValue value);
std::vector<std::pair<SymValue, AbstractState>> alloc(AbstractState st);
/// Frees a cell. Freeing 0 is a no-op; freeing an address that is not the
/// start of an allocation is treated as an unknown free (cell dropped).
AbstractState free_cell(AbstractState st, SymValue addr);

/// Conjoins `a` and re-keys the heap. Returns nullopt if infeasible.
std::optional<AbstractState> assume(AbstractState st, const Atom& a);
/// Binds `v` to `t` (a fresh value equal to `t`, or `t` itself when it is a
/// plain variable).
SymValue bind_term(AbstractState& st, const Term& t);

std::map<SymValue, SymValue> subheap_rooted_at(const AbstractState& st,
                                               const std::vector<SymValue>& roots);

/// The canonical projection at a loop head: the instantiated termination
/// conditions, the values of `tracked` and everything connected to them.
LoopSnapshot snapshot(const AbstractState& st, int head,
                      const std::vector<TerminationCondition>& instantiated,
                      const std::vector<SymValue>& tracked = {});

enum class SpecKind { Ok, InfiniteProgram, RecursivePending };
std::string to_string(SpecKind k);

struct Spec {
  SpecKind kind = SpecKind::Ok;
  std::vector<SymValue> params;
  std::map<SymValue, SymValue> footprint;
  PathCondition pc;
  std::map<SymValue, SymValue> post_heap;  // footprint and allocated cells at exit
  std::set<SymValue> allocated;
  std::set<SymValue> freed;
  std::optional<Term> ret;
  std::vector<RecursiveCallRecord> rec_calls;
  std::string origin;  // InfiniteProgram: issue origin key
  std::set<std::string> external_calls;
  bool widened = false;
  std::uint32_t next_id = 1;

  friend bool operator==(const Spec&, const Spec&) = default;
};

struct Summary {
  std::string procedure;
  std::vector<Spec> specs;
  std::vector<Issue> issues;
  int k = 3;
  bool truncated = false;         // spec list cut at max_disjuncts
  bool incomplete = false;        // some path exhausted its step budget
  bool dropped_records = false;   // a recursive-call record failed to translate

  friend bool operator==(const Summary&, const Summary&) = default;
};

/// Names precondition values after the parameters they come from: `x` for
/// a parameter, `*x` for the cell it points to, `**x` and `*(x + 1)` and so
/// on further down.
std::map<SymValue, std::string> precondition_names(const PathCondition& pc,
                                                   const std::vector<std::string>& param_names,
                                                   const std::vector<SymValue>& params,
                                                   const std::map<SymValue, SymValue>& footprint);

std::string print_state(const AbstractState& st, const Cfg& cfg);
std::string print_spec(const Spec& s);
std::string print_summary(const Summary& s);

}  // namespace diverge
