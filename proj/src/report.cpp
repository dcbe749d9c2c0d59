// report.cpp - issue triage and output

#include "diverge/report.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace diverge {

std::string to_string(IssueType t) {
  switch (t) {
    case IssueType::InfiniteLoop: return "infinite_loop";
    case IssueType::InfiniteGoto: return "infinite_goto";
    case IssueType::InfiniteRecursion: return "infinite_recursion";
    case IssueType::MutualRecursion: return "mutual_recursion";
  }
  return "infinite_loop";
}

std::optional<IssueType> issue_type_from_string(const std::string& s) {
  for (auto t : {IssueType::InfiniteLoop, IssueType::InfiniteGoto, IssueType::InfiniteRecursion,
                 IssueType::MutualRecursion})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

namespace {

bool annotated_intended(const Issue& issue, const Program& program) {
  const FunctionDef* f = program.find(issue.procedure);
  if (!f) return false;
  for (const auto& a : program.annotations) {
    if (a.file != f->loc.file) continue;
    if (a.text.rfind("intended", 0) != 0) continue;
    if (a.line >= f->loc.line - 1 && a.line <= f->end_line) return true;
  }
  return false;
}

}  // namespace

bool classify_intended(const Issue& issue, const ModelTable& models, const Program& program) {
  for (const auto& c : issue.trace_calls)
    if (models.kind_of(c) == ModelKind::Blocking) return true;
  return annotated_intended(issue, program);
}

bool reachability(const SummaryDb& db, const std::vector<std::string>& entries,
                  const Issue& issue) {
  for (const auto& e : entries) {
    const Summary* s = db.find(e);
    if (!s) continue;
    for (const auto& spec : s->specs)
      if (spec.kind == SpecKind::InfiniteProgram && spec.origin == issue.origin) return true;
  }
  return false;
}

std::vector<std::string> effective_entries(const Program& program,
                                           const std::vector<std::string>& configured) {
  if (!configured.empty()) return configured;
  if (program.find("main")) return {"main"};
  return {};
}

namespace {

auto sort_key(const Issue& i) {
  return std::make_tuple(i.file, i.line, to_string(i.type), i.procedure);
}

}  // namespace

void finalize_issues(std::vector<Issue>& issues, const SummaryDb& db, const Program& program,
                     const AnalysisConfig& config) {
  std::stable_sort(issues.begin(), issues.end(),
                   [](const Issue& a, const Issue& b) { return sort_key(a) < sort_key(b); });
  // One issue per loop and per recursion cycle, whichever procedure found it.
  std::set<std::string> seen;
  std::vector<Issue> kept;
  for (auto& i : issues)
    if (i.origin.empty() || seen.insert(i.origin).second) kept.push_back(std::move(i));
  issues = std::move(kept);

  auto entries = effective_entries(program, config.entries);
  for (auto& i : issues) {
    i.intended = classify_intended(i, config.models, program);
    i.reachable_from_entry = reachability(db, entries, i);
  }
}

std::vector<Issue> rank_issues(const std::vector<Issue>& issues) {
  auto rank = [](const Issue& i) {
    if (i.intended) return 2;
    return i.reachable_from_entry ? 0 : 1;
  };
  std::vector<Issue> out = issues;
  std::stable_sort(out.begin(), out.end(),
                   [&](const Issue& a, const Issue& b) { return rank(a) < rank(b); });
  return out;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson issue_json(const Issue& i) {
  ojson j;
  j["issue_type"] = to_string(i.type);
  j["procedure"] = i.procedure;
  j["file"] = i.file;
  j["line"] = i.line;
  ojson trace = ojson::array();
  for (const auto& s : i.trace) {
    ojson step;
    step["file"] = s.file;
    step["line"] = s.line;
    step["description"] = s.description;
    trace.push_back(std::move(step));
  }
  j["trace"] = std::move(trace);
  j["witness_precondition"] = i.witness_precondition;
  j["reachable_from_entry"] = i.reachable_from_entry;
  j["intended"] = i.intended;
  j["cycle"] = i.cycle;
  j["k_used"] = i.k_used;
  return j;
}

std::string emit_json(const std::vector<Issue>& issues, const ReportHeader* header) {
  ojson root;
  root["version"] = 1;
  if (header) {
    root["tool"] = header->tool;
    root["k"] = header->k;
  }
  ojson arr = ojson::array();
  for (const auto& i : issues) arr.push_back(issue_json(i));
  root["issues"] = std::move(arr);
  return root.dump() + "\n";
}

std::string emit_text(const std::vector<Issue>& issues, const ReportHeader* header) {
  std::ostringstream out;
  if (header) out << header->tool << " (k=" << header->k << ")\n";
  for (const auto& i : rank_issues(issues)) {
    out << i.file << ":" << i.line << ": " << to_string(i.type) << " in " << i.procedure;
    out << " [" << (i.intended ? "intended" : "unintended") << ", "
        << (i.reachable_from_entry ? "reachable from entry" : "entry reachability unknown")
        << "]\n";
    if (!i.cycle.empty()) {
      out << "  cycle:";
      for (const auto& c : i.cycle) out << " " << c;
      out << "\n";
    }
    out << "  witness: " << i.witness_precondition << "\n";
    out << "  trace:\n";
    for (const auto& s : i.trace)
      out << "    " << s.file << ":" << s.line << ": " << s.description << "\n";
  }
  std::size_t unintended = static_cast<std::size_t>(
      std::count_if(issues.begin(), issues.end(), [](const Issue& i) { return !i.intended; }));
  out << issues.size() << (issues.size() == 1 ? " issue" : " issues") << " (" << unintended
      << " unintended)\n";
  return out.str();
}

}  // namespace

std::string emit(const std::vector<Issue>& issues, Format format) {
  if (format == Format::Json) {
    std::string s = emit_json(issues, nullptr);
    s.pop_back();
    return s;
  }
  return emit_text(issues, nullptr);
}

std::string emit(const std::vector<Issue>& issues, Format format, const ReportHeader& header) {
  return format == Format::Json ? emit_json(issues, &header) : emit_text(issues, &header);
}

int exit_code_for(const std::vector<Issue>& issues) {
  return std::any_of(issues.begin(), issues.end(), [](const Issue& i) { return !i.intended; })
             ? 1
             : 0;
}

}  // namespace diverge
