// cfg.hpp - per-function control-flow graphs
//
// Lowering resolves every variable to a slot index, hoists calls out of
// expressions into temporaries, and turns `&&`, `||`, `!` and comparisons
// used as values into explicit branches. After lowering, every expression
// stored in an instruction is pure arithmetic over slots.

#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "diverge/ast.hpp"

namespace diverge {

struct VarInfo {
  std::string name;
  MiniType type;
  bool is_param = false;
  bool is_temp = false;
};

struct Instr {
  enum class Kind { Assign, Assume, Call, Alloc, Free, Return };

  Kind kind = Kind::Assign;
  ExprPtr lhs;                 // Assign / Call / Alloc destination (may be null for Call)
  ExprPtr expr;                // Assign rhs; Assume atom; Free arg; Return value (may be null)
  bool polarity = true;        // Assume: branch taken when the atom has this truth value
  bool is_loop_guard = false;  // Assume: controls exit from an enclosing loop
  int guard_head = -1;         // Assume: innermost loop head this guard controls
  std::string callee;          // Call
  std::vector<ExprPtr> args;   // Call
  SourceLoc loc;
};

enum class GuardKind { Plain, True, False };

struct Edge {
  int src = 0;
  int dst = 0;
  GuardKind guard = GuardKind::Plain;
  bool from_goto = false;  // created by a `goto` statement
  bool back = false;       // back edge in the DFS spanning tree
};

struct BasicBlock {
  int id = 0;
  std::vector<Instr> instrs;
  std::vector<int> succs;  // edge ids, in exploration order
  std::vector<int> preds;  // edge ids
  SourceLoc loc;           // statement that opened the block
};

/// A loop guard atom, oriented so that it holds on the stay-in-loop branch.
struct GuardAtom {
  ExprPtr atom;
  bool polarity = true;  // truth value of `atom` on the stay branch
  SourceLoc loc;
};

struct Cfg {
  std::string function;
  std::vector<VarInfo> vars;  // params first, in declaration order
  std::vector<BasicBlock> blocks;
  std::vector<Edge> edges;
  int entry = 0;
  std::set<int> loop_heads;
  std::set<int> back_edges;

  /// Blocks of the natural loop rooted at `head`, including the head.
  std::set<int> loop_body(int head) const;
  /// Every Assume atom inside the loop rooted at `head`, in block order,
  /// syntactic duplicates removed.
  std::vector<GuardAtom> control_atoms(int head) const;
  /// Slots whose values can influence the loop's branches, calls or heap
  /// writes while it runs, in slot order.
  std::vector<int> loop_tracked_slots(int head) const;
  int param_count() const;
};

Cfg build_cfg(const FunctionDef& f);

/// Guards controlling exit from the loop rooted at `head`; empty for a
/// guard-less goto loop.
std::vector<GuardAtom> loop_guard_atoms(const Cfg& cfg, int head);

std::string print_cfg(const Cfg& cfg);

}  // namespace diverge
