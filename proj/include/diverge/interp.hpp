// interp.hpp - concrete reference interpreter for MiniC
//
// Runs a procedure on concrete integer inputs and watches for a repeated
// state at loop heads. Only the part of the state that can influence
// control flow is compared: variables that are never read by a branch,
// a call, a return or the heap cannot make a later step differ.

#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "diverge/ast.hpp"

namespace diverge {

struct ConcreteResult {
  enum class Kind { Terminated, RepeatedState, BudgetExhausted };
  Kind kind = Kind::Terminated;
  long steps = 0;
};

std::string to_string(ConcreteResult::Kind k);

/// Executes `entry` with parameters bound from `env` (missing ones are 0).
/// Calls to procedures without code return 0; runtime errors terminate.
ConcreteResult concrete_run(const Program& program, const std::string& entry,
                            const std::map<std::string, std::int64_t>& env, long budget);

}  // namespace diverge
