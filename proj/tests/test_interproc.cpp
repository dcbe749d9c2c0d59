// Call graph scheduling, recursion cycles and the summary database.

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "diverge/frontend.hpp"
#include "diverge/interproc.hpp"
#include "diverge/report.hpp"
#include "diverge/summary_db.hpp"

using namespace diverge;

namespace {

const char* kFgh =
    "void f(int *x, int *y) {\n"
    "  int *z = malloc(sizeof(int));\n"
    "  if (z) {\n"
    "    g(x, y);\n"
    "    free(z);\n"
    "  }\n"
    "}\n"
    "void g(int *p, int *q) {\n"
    "  if (*p > *q) {\n"
    "    h(q, p);\n"
    "  }\n"
    "}\n"
    "void h(int *u, int *v) { f(v, u); }\n";

std::string json_of(const AnalysisResult& r) {
  return emit(r.issues, Format::Json, ReportHeader{});
}

}  // namespace

TEST_CASE("call graph lists defined callees only") {
  Program p = parse("int a() { return b() + c(); }\nint b() { return 1; }\nint c() { return b(); }\n");
  auto g = call_graph(p);
  CHECK(g["a"] == std::vector<std::string>{"b", "c"});
  CHECK(g["c"] == std::vector<std::string>{"b"});
  CHECK(g["b"].empty());
}

TEST_CASE("schedule order puts callees before callers") {
  Program p = parse("int a() { return b() + c(); }\nint b() { return 1; }\nint c() { return b(); }\n");
  auto order = schedule_order(p);
  auto pos = [&](const std::string& n) {
    return std::find(order.begin(), order.end(), n) - order.begin();
  };
  REQUIRE(order.size() == 3);
  CHECK(pos("b") < pos("c"));
  CHECK(pos("c") < pos("a"));
}

TEST_CASE("calls to undefined functions without a model are rejected") {
  Program p = parse("void f() { mystery(); }\n");
  CHECK_THROWS_AS(validate_calls(p, ModelTable{}), ValidationError);
  ModelTable m;
  m.set("mystery", ModelKind::Havoc);
  CHECK_NOTHROW(validate_calls(p, m));
}

TEST_CASE("direct self recursion with the same argument") {
  Program p = parse("void trivial(int x) {\n  trivial(x);\n}\n", "t.mc");
  auto r = analyze_program(p, AnalysisConfig{});
  REQUIRE(r.issues.size() == 1);
  CHECK(r.issues[0].type == IssueType::InfiniteRecursion);
  CHECK(r.issues[0].cycle == std::vector<std::string>{"trivial"});
}

TEST_CASE("recursion on a decreasing argument is not reported") {
  Program p = parse("int down(int n) {\n  if (n <= 0) return 0;\n  return down(n - 1);\n}\n");
  CHECK(analyze_program(p, AnalysisConfig{}).issues.empty());
}

TEST_CASE("the f g h cycle is found once with the swapped-pointer witness") {
  Program p = parse(kFgh, "fgh.mc");
  auto r = analyze_program(p, AnalysisConfig{});
  REQUIRE(r.issues.size() == 1);
  const Issue& i = r.issues[0];
  CHECK(i.type == IssueType::MutualRecursion);
  std::set<std::string> cycle(i.cycle.begin(), i.cycle.end());
  CHECK(cycle == std::set<std::string>{"f", "g", "h"});
  REQUIRE(i.witness_vars.count("*x") == 1);
  REQUIRE(i.witness_vars.count("*y") == 1);
  Atom gt = make_atom(Term::var(i.witness_vars.at("*x")), CmpOp::Gt,
                      Term::var(i.witness_vars.at("*y")));
  CHECK(entails(i.witness_pc, gt));
}

TEST_CASE("starting the analysis from a different procedure finds the same cycle") {
  Program p = parse(kFgh, "fgh.mc");
  for (std::vector<std::string> order : {std::vector<std::string>{"g", "h", "f"},
                                         std::vector<std::string>{"h", "f", "g"}}) {
    AnalysisConfig c;
    c.order = order;
    auto r = analyze_program(p, c);
    REQUIRE(r.issues.size() == 1);
    std::set<std::string> cycle(r.issues[0].cycle.begin(), r.issues[0].cycle.end());
    CHECK(cycle == std::set<std::string>{"f", "g", "h"});
    CHECK(r.issues[0].type == IssueType::MutualRecursion);
  }
}

TEST_CASE("parallel runs match sequential runs") {
  std::string src = std::string(kFgh) +
                    "void lp(int x, int y) {\n  while (x > 0) { y++; }\n}\n"
                    "int cnt(int n) {\n  while (n > 0) n--;\n  return n;\n}\n"
                    "void me(int a) {\n  me(a);\n}\n";
  Program p = parse(src, "mix.mc");
  AnalysisConfig one;
  AnalysisConfig four;
  four.jobs = 4;
  auto a = analyze_program(p, one);
  auto b = analyze_program(p, four);
  CHECK(json_of(a) == json_of(b));
  CHECK(a.db == b.db);
  CHECK(a.issues.size() == 3);
}

TEST_CASE("summary database round trips through its byte format") {
  Program p = parse(kFgh, "fgh.mc");
  AnalysisConfig c;
  auto r = analyze_program(p, c);
  r.db.fingerprint = compute_fingerprint(p, c);
  std::string bytes = serialize_db(r.db);
  SummaryDb back = deserialize_db(bytes);
  CHECK(back == r.db);
  CHECK(serialize_db(back) == bytes);
}

TEST_CASE("warm runs reuse summaries and report the same issues") {
  Program p = parse(kFgh, "fgh.mc");
  AnalysisConfig c;
  auto cold = analyze_program(p, c);
  SummaryDb warm = deserialize_db(serialize_db(cold.db));
  auto again = analyze_program(p, c, &warm);
  CHECK(json_of(again) == json_of(cold));
}

TEST_CASE("fingerprints change with the source and the configuration") {
  Program p = parse(kFgh, "fgh.mc");
  AnalysisConfig c;
  std::string base = compute_fingerprint(p, c);
  CHECK(base.size() == 16);
  AnalysisConfig k5;
  k5.widen.k = 5;
  CHECK(compute_fingerprint(p, k5) != base);
  Program q = parse(std::string(kFgh) + "void extra() {}\n", "fgh.mc");
  CHECK(compute_fingerprint(q, c) != base);
  CHECK(compute_fingerprint(p, c) == base);
}

TEST_CASE("damaged databases are rejected") {
  Program p = parse(kFgh, "fgh.mc");
  std::string bytes = serialize_db(analyze_program(p, AnalysisConfig{}).db);
  CHECK_THROWS_AS(deserialize_db("garbage"), CorruptDb);
  CHECK_THROWS_AS(deserialize_db(bytes.substr(0, bytes.size() / 2)), CorruptDb);
  std::string other = bytes;
  auto at = other.find("format 1");
  REQUIRE(at != std::string::npos);
  other.replace(at, 8, "format 9");
  CHECK_THROWS_AS(deserialize_db(other), VersionMismatch);
}

TEST_CASE("database files are written and read back") {
  Program p = parse(kFgh, "fgh.mc");
  auto r = analyze_program(p, AnalysisConfig{});
  auto path = (std::filesystem::temp_directory_path() / "diverge_test.db").string();
  save_db(r.db, path);
  CHECK(load_db(path) == r.db);
  std::filesystem::remove(path);
}

TEST_CASE("the summary db keeps the first summary for a name") {
  SummaryDb db;
  Summary a;
  a.procedure = "f";
  a.k = 3;
  Summary b = a;
  b.k = 7;
  db.put(a);
  db.put(b);
  CHECK(db.find("f")->k == 3);
  CHECK(db.find("g") == nullptr);
}

TEST_CASE("active set tracks the procedures under analysis") {
  ActiveSet s;
  s.push("f");
  s.push("g");
  CHECK(s.contains("f"));
  s.pop("g");
  CHECK(!s.contains("g"));
  CHECK(s.order() == std::vector<std::string>{"f"});
}

TEST_CASE("repeated calls to a callee with many specs stay bounded") {
  std::string src =
      "int g(int a, int b, int c, int d, int e) {\n"
      "  int r = 0;\n"
      "  if (a > 0) r++;\n  if (b > 0) r++;\n  if (c > 0) r++;\n"
      "  if (d > 0) r++;\n  if (e > 0) r++;\n"
      "  return r;\n"
      "}\n"
      "int f(int a, int b, int c, int d, int e, int v, int w, int x, int y, int z) {\n"
      "  int s = g(a, b, c, d, e);\n"
      "  s = s + g(v, w, x, y, z);\n"
      "  return s;\n"
      "}\n";
  Program p = parse(src);
  auto r = analyze_program(p, AnalysisConfig{});
  const Summary* f = r.db.find("f");
  REQUIRE(f);
  CHECK(f->truncated);
  CHECK(!f->specs.empty());
  CHECK(f->specs.size() <= 32);
}
