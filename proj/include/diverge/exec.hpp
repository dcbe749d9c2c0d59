// exec.hpp - intra-procedural symbolic execution with lasso detection
//
// Paths are explored depth first, one disjunct at a time. Each arrival at a
// loop head takes a snapshot of the control-relevant state; meeting an
// earlier snapshot again proves the loop can run forever. After k distinct
// snapshots the loop is cut off: values it assigns are havocked and only
// its exits are followed, and nothing derived from the havocked state is
// ever reported.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "diverge/cfg.hpp"
#include "diverge/models.hpp"
#include "diverge/symstate.hpp"

namespace diverge {

struct WidenConfig {
  int k = 3;
  int max_disjuncts = 32;
  long step_budget = 10000;  // instructions per disjunct
};

struct LassoWitness {
  int head = -1;
  LoopSnapshot snapshot;
  PathCondition pre;
  TracePtr trace;        // full path up to the repeated visit
  TracePtr cycle_start;  // trace at the earlier, equal snapshot
};

/// Answer to a summary request.
struct SummaryResult {
  enum class Kind { Found, UnknownProcedure, MutualRecursion };
  Kind kind = Kind::UnknownProcedure;
  const Summary* summary = nullptr;  // Found only
};

using SummaryOracle = std::function<SummaryResult(const std::string&)>;

struct ExecContext {
  const FunctionDef* function = nullptr;
  const Cfg* cfg = nullptr;
  const ModelTable* models = nullptr;
  SummaryOracle oracle;
  WidenConfig config;
  std::string file;
};

struct Outcome {
  enum class Kind { Continue, Returned, Error, Diverged };
  Kind kind = Kind::Continue;
  AbstractState state;
  std::string origin;          // Diverged: key of the divergence
  std::optional<Issue> issue;  // Diverged: issue proven at this step, if any
};

std::vector<Outcome> exec_instr(const AbstractState& st, const Instr& instr,
                                const ExecContext& ctx);

struct Proceed {
  AbstractState state;
};
struct StopUnrolling {};
using WidenResult = std::variant<Proceed, StopUnrolling, LassoWitness>;

/// Snapshots `st` at `head` and compares it with the head's history.
WidenResult widen_at_head(const AbstractState& st, int head, const Cfg& cfg,
                          const WidenConfig& config);
/// The control atoms of the loop at `head` evaluated on `scratch`. Cells
/// read for the first time are materialized in `scratch` only.
std::vector<TerminationCondition> instantiate_control_atoms(AbstractState& scratch, int head,
                                                            const Cfg& cfg);

Summary analyze_procedure(const FunctionDef& f, const Cfg& cfg, const ExecContext& ctx);

/// Applies every spec of `callee` at a call site. `dest` is the variable or
/// dereference receiving the result (may be null).
std::vector<Outcome> apply_summary(const AbstractState& st, const Summary& callee,
                                   const std::vector<Term>& args, const ExprPtr& dest,
                                   const ExecContext& ctx, SourceLoc loc);

/// Expression evaluation over the current state; loads may materialize
/// footprint cells. Throws InfeasibleState for a null dereference.
Term eval_expr(AbstractState& st, const Expr& e);
/// Evaluates a condition into an atom that holds when `e` is true.
Atom eval_condition(AbstractState& st, const Expr& e);
/// Writes `value` to the location denoted by `lhs` (a variable or `*e`).
void assign_to(AbstractState& st, const Expr& lhs, const Term& value);

/// The witness text for a precondition: constraints over parameter-derived
/// values, printed with their source names.
std::string witness_string(const PathCondition& pc, const std::map<SymValue, std::string>& names);
/// Fills the witness fields of `issue` from the state that proved it.
void fill_witness(Issue& issue, const AbstractState& st, const ExecContext& ctx);

}  // namespace diverge
