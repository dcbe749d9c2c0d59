// issue.hpp - divergence issues as reported to users

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "diverge/solver.hpp"

namespace diverge {

enum class IssueType { InfiniteLoop, InfiniteGoto, InfiniteRecursion, MutualRecursion };

std::string to_string(IssueType t);
std::optional<IssueType> issue_type_from_string(const std::string& s);

struct TraceStep {
  std::string file;
  int line = 0;
  std::string description;
  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct Issue {
  IssueType type = IssueType::InfiniteLoop;
  std::string procedure;
  std::string file;
  int line = 0;
  std::vector<TraceStep> trace;
  std::string witness_precondition;
  bool reachable_from_entry = false;
  bool intended = false;
  std::vector<std::string> cycle;
  int k_used = 0;

  // Not part of the report schema.
  std::string origin;                     // key matched by InfiniteProgram specs
  std::vector<std::string> trace_calls;   // callees invoked along the trace, transitively
  PathCondition witness_pc;
  std::map<std::string, SymValue> witness_vars;  // printed name -> value

  friend bool operator==(const Issue&, const Issue&) = default;
};

}  // namespace diverge
