// Issue triage and report formats.

#include "doctest.h"
#include "json.hpp"
#include "diverge/frontend.hpp"
#include "diverge/interproc.hpp"
#include "diverge/report.hpp"

using namespace diverge;

namespace {

Issue issue(const std::string& proc, int line, IssueType t = IssueType::InfiniteLoop) {
  Issue i;
  i.type = t;
  i.procedure = proc;
  i.file = "a.mc";
  i.line = line;
  i.origin = proc + ":" + std::to_string(line);
  i.witness_precondition = "true";
  return i;
}

AnalysisResult analyze(const std::string& src, AnalysisConfig c = {}) {
  static std::vector<Program> keep;
  keep.push_back(parse(src, "a.mc"));
  validate_calls(keep.back(), c.models);
  return analyze_program(keep.back(), c);
}

}  // namespace

TEST_CASE("an empty issue list has a fixed json form") {
  CHECK(emit({}, Format::Json) == R"({"version":1,"issues":[]})");
}

TEST_CASE("json reports carry every field in schema order") {
  Issue i = issue("f", 3);
  i.cycle = {"f"};
  i.k_used = 3;
  i.trace = {TraceStep{"a.mc", 3, "loop head"}};
  auto j = nlohmann::ordered_json::parse(emit({i}, Format::Json, ReportHeader{"diverge 1.0.0", 3}));
  std::vector<std::string> top;
  for (auto it = j.begin(); it != j.end(); ++it) top.push_back(it.key());
  CHECK(top == std::vector<std::string>{"version", "tool", "k", "issues"});
  const auto& e = j["issues"][0];
  std::vector<std::string> keys;
  for (auto it = e.begin(); it != e.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"issue_type", "procedure", "file", "line", "trace",
                                         "witness_precondition", "reachable_from_entry",
                                         "intended", "cycle", "k_used"});
  CHECK(e["trace"][0]["description"] == "loop head");
}

TEST_CASE("issue type names round trip") {
  for (auto t : {IssueType::InfiniteLoop, IssueType::InfiniteGoto, IssueType::InfiniteRecursion,
                 IssueType::MutualRecursion})
    CHECK(issue_type_from_string(to_string(t)) == t);
  CHECK(!issue_type_from_string("endless"));
}

TEST_CASE("exit code depends on unintended issues only") {
  CHECK(exit_code_for({}) == 0);
  Issue i = issue("f", 1);
  CHECK(exit_code_for({i}) == 1);
  i.intended = true;
  CHECK(exit_code_for({i}) == 0);
}

TEST_CASE("a blocking call on the trace marks the issue intended") {
  std::string src = "void ev() {\n  while (1) {\n    wait_event();\n  }\n}\n";
  AnalysisConfig blocking;
  blocking.models.set("wait_event", ModelKind::Blocking);
  auto r = analyze(src, blocking);
  REQUIRE(r.issues.size() == 1);
  CHECK(r.issues[0].intended);

  AnalysisConfig havoc;
  havoc.models.set("wait_event", ModelKind::Havoc);
  auto h = analyze(src, havoc);
  REQUIRE(h.issues.size() == 1);
  CHECK(!h.issues[0].intended);
}

TEST_CASE("an intended annotation on the function marks its issues") {
  auto r = analyze("//@ intended: server loop\nvoid serve(int a, int b) {\n  while (a) b++;\n}\n");
  REQUIRE(r.issues.size() == 1);
  CHECK(r.issues[0].intended);
  auto far = analyze("//@ intended\n\nvoid serve(int a, int b) {\n  while (a) b++;\n}\n");
  REQUIRE(far.issues.size() == 1);
  CHECK(!far.issues[0].intended);
}

TEST_CASE("issues reached from main are reachable, guarded ones are not") {
  auto r = analyze(
      "void spin(int a, int b) {\n  while (a) b++;\n}\n"
      "int main() {\n  spin(1, 0);\n  return 0;\n}\n");
  REQUIRE(r.issues.size() == 1);
  CHECK(r.issues[0].reachable_from_entry);

  auto g = analyze(
      "void spin(int a, int b) {\n  while (a) b++;\n}\n"
      "int main() {\n  spin(0, 0);\n  return 0;\n}\n");
  REQUIRE(g.issues.size() == 1);
  CHECK(!g.issues[0].reachable_from_entry);
}

TEST_CASE("without main nothing is reachable unless an entry is given") {
  std::string src = "void spin(int a, int b) {\n  while (a) b++;\n}\n";
  auto r = analyze(src);
  REQUIRE(r.issues.size() == 1);
  CHECK(!r.issues[0].reachable_from_entry);
  AnalysisConfig c;
  c.entries = {"spin"};
  auto e = analyze(src, c);
  REQUIRE(e.issues.size() == 1);
  CHECK(e.issues[0].reachable_from_entry);
}

TEST_CASE("issues are sorted by location and deduplicated by origin") {
  std::vector<Issue> v{issue("g", 9), issue("f", 2), issue("f", 2)};
  v[2].procedure = "caller";
  Program p = parse("void f() {}\nvoid g() {}\n", "a.mc");
  finalize_issues(v, SummaryDb{}, p, AnalysisConfig{});
  REQUIRE(v.size() == 2);
  CHECK(v[0].line == 2);
  CHECK(v[1].line == 9);
}

TEST_CASE("text output ranks reachable unintended issues first") {
  Issue a = issue("a", 1), b = issue("b", 2), c = issue("c", 3);
  a.intended = true;
  c.reachable_from_entry = true;
  auto ranked = rank_issues({a, b, c});
  CHECK(ranked[0].procedure == "c");
  CHECK(ranked[1].procedure == "b");
  CHECK(ranked[2].procedure == "a");
  std::string text = emit({a, b, c}, Format::Text);
  CHECK(text.find("a.mc:3") < text.find("a.mc:2"));
  CHECK(text.find("3 issues (2 unintended)") != std::string::npos);
}
