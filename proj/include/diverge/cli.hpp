// cli.hpp - command-line driver

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "diverge/interproc.hpp"

namespace diverge {

/// Runs the tool. Exit codes: 0 no unintended issue, 1 unintended issues,
/// 2 usage, input or configuration error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// One `//@ expect:` line: `clean`, or `<issue-type> @ <line>` optionally
/// followed by `proc=<name>` and `intended`.
struct Expectation {
  IssueType type = IssueType::InfiniteLoop;
  int issue_line = 0;     // 0: any line
  std::string procedure;  // empty: any
  bool intended = false;
  int line = 0;           // line of the annotation itself
};

struct FileExpectations {
  bool annotated = false;  // at least one expect line (including `clean`)
  std::vector<Expectation> expected;
};

FileExpectations parse_expectations(const Program& program);

struct CorpusFileResult {
  std::string file;
  bool skipped = false;  // no expectations
  bool error = false;    // did not parse or validate
  std::string message;
  int expected = 0;
  int found = 0;
  int false_positives = 0;
  int false_negatives = 0;
  bool pass() const { return !skipped && !error && false_positives == 0 && false_negatives == 0; }
};

/// Compares emitted issues with expectations.
CorpusFileResult check_expectations(const std::string& file, const FileExpectations& exp,
                                    const std::vector<Issue>& issues);

/// Sorted `.mc` files directly inside `dir`.
std::vector<std::string> mc_files_in(const std::string& dir);

}  // namespace diverge
