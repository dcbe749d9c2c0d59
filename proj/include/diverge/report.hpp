// report.hpp - issue triage and output

#pragma once

#include <string>
#include <vector>

#include "diverge/interproc.hpp"
#include "diverge/issue.hpp"
#include "diverge/models.hpp"

namespace diverge {

inline constexpr const char* kToolVersion = "diverge 1.0.0";

/// True when the divergence is deliberate: its trace calls a function
/// modeled `blocking`, or its procedure carries an `//@ intended` comment.
bool classify_intended(const Issue& issue, const ModelTable& models, const Program& program);

/// True when some entry's summary carries the issue's divergence.
bool reachability(const SummaryDb& db, const std::vector<std::string>& entries,
                  const Issue& issue);

/// The configured entries, or `main` when none are given and it exists.
std::vector<std::string> effective_entries(const Program& program,
                                           const std::vector<std::string>& configured);

/// Deduplicates, classifies and sorts by (file, line, issue_type, procedure).
void finalize_issues(std::vector<Issue>& issues, const SummaryDb& db, const Program& program,
                     const AnalysisConfig& config);

/// Unintended reachable issues first, then unintended, then intended.
std::vector<Issue> rank_issues(const std::vector<Issue>& issues);

enum class Format { Text, Json };

struct ReportHeader {
  std::string tool = kToolVersion;
  int k = 3;
};

/// Bare report: `{"version":1,"issues":[...]}` in JSON.
std::string emit(const std::vector<Issue>& issues, Format format);
/// Full report with tool and k in the JSON header.
std::string emit(const std::vector<Issue>& issues, Format format, const ReportHeader& header);

/// 0 when there is no unintended issue, 1 otherwise.
int exit_code_for(const std::vector<Issue>& issues);

}  // namespace diverge
