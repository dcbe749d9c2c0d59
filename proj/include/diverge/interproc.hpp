// interproc.hpp - on-demand scheduling, summary database and recursion cycles

#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "diverge/cfg.hpp"
#include "diverge/exec.hpp"
#include "diverge/models.hpp"

namespace diverge {

class SummaryDb {
 public:
  const Summary* find(const std::string& name) const;
  /// Stores a summary; a stored summary is never replaced.
  const Summary* put(Summary s);
  bool contains(const std::string& name) const { return summaries_.count(name) != 0; }
  const std::map<std::string, Summary>& all() const { return summaries_; }
  void merge(const SummaryDb& other);

  std::string fingerprint;  // identifies the sources and configuration

  friend bool operator==(const SummaryDb& a, const SummaryDb& b) {
    return a.fingerprint == b.fingerprint && a.summaries_ == b.summaries_;
  }

 private:
  std::map<std::string, Summary> summaries_;
};

class ActiveSet {
 public:
  bool contains(const std::string& name) const;
  void push(const std::string& name);
  void pop(const std::string& name);
  const std::vector<std::string>& order() const { return stack_; }

 private:
  std::vector<std::string> stack_;
};

struct AnalysisConfig {
  WidenConfig widen;
  ModelTable models;
  std::vector<std::string> entries;  // empty: `main` when defined
  int jobs = 1;
  /// Overrides the scheduling order (procedures not listed follow in the
  /// default order).
  std::vector<std::string> order;
};

/// Calls that have neither code nor a model.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
void validate_calls(const Program& program, const ModelTable& models);

/// Analyzes procedures on demand, keeping the active stack.
class Scheduler {
 public:
  Scheduler(const Program& program, const AnalysisConfig& config, SummaryDb& db);

  SummaryResult request_summary(const std::string& name);
  const ActiveSet& active() const { return active_; }
  const Cfg& cfg_of(const std::string& name);

 private:
  const Program& program_;
  const AnalysisConfig& config_;
  SummaryDb& db_;
  ActiveSet active_;
  std::map<std::string, Cfg> cfgs_;

  Summary analyze(const FunctionDef& f);
};

SummaryResult request_summary(const std::string& name, Scheduler& scheduler);

/// Records a call to a procedure under analysis.
AbstractState on_mutual_recursion(AbstractState st, const std::string& current,
                                  const std::string& callee, const std::vector<Term>& args,
                                  SourceLoc loc);

/// Checks whether a recursive call to the current procedure repeats its
/// precondition. Returns the issue when the cycle is proven divergent.
std::optional<Issue> close_cycle(const std::string& current_proc, const AbstractState& st,
                                 const RecursiveCallRecord& record, const ExecContext& ctx);

/// Static call graph in declaration order, and the bottom-up scheduling
/// order derived from its strongly connected components.
std::map<std::string, std::vector<std::string>> call_graph(const Program& program);
std::vector<std::string> schedule_order(const Program& program);

struct AnalysisResult {
  std::vector<Issue> issues;
  SummaryDb db;
};

/// Analyzes every procedure. Summaries already in `warm` are reused.
AnalysisResult analyze_program(const Program& program, const AnalysisConfig& config,
                               const SummaryDb* warm = nullptr);

/// Identifies the program text, tool version and configuration; stored in
/// summary databases to detect stale caches.
std::string compute_fingerprint(const Program& program, const AnalysisConfig& config);

}  // namespace diverge
