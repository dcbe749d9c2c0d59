// Intraprocedural symbolic execution and lasso detection.

#include "doctest.h"
#include "diverge/exec.hpp"
#include "diverge/frontend.hpp"

using namespace diverge;

namespace {

struct Analyzed {
  Program program;
  Summary summary;
};

Analyzed run(const std::string& src, int k = 3, ModelTable models = {}) {
  Analyzed a;
  a.program = parse(src, "t.mc");
  const FunctionDef& f = a.program.functions[0];
  Cfg cfg = build_cfg(f);
  ExecContext ctx;
  ctx.function = &f;
  ctx.cfg = &cfg;
  ctx.models = &models;
  ctx.oracle = [](const std::string&) { return SummaryResult{}; };
  ctx.config.k = k;
  ctx.file = "t.mc";
  a.summary = analyze_procedure(f, cfg, ctx);
  return a;
}

}  // namespace

TEST_CASE("a guard that never changes while another variable grows is a lasso") {
  auto a = run("int b(int x, int y) {\n  while (x > 0) {\n    y++;\n  }\n  return y;\n}\n");
  REQUIRE(a.summary.issues.size() == 1);
  const Issue& i = a.summary.issues[0];
  CHECK(i.type == IssueType::InfiniteLoop);
  CHECK(i.line == 2);
  CHECK(i.procedure == "b");
  CHECK(i.k_used == 3);
  CHECK(i.witness_precondition.find("x") != std::string::npos);
  CHECK(!i.trace.empty());
}

TEST_CASE("a backward goto that changes nothing relevant is reported as a goto loop") {
  auto a = run("int a(int x) {\nprevious:\n  x++;\n  goto previous;\n}\n");
  REQUIRE(a.summary.issues.size() == 1);
  CHECK(a.summary.issues[0].type == IssueType::InfiniteGoto);
}

TEST_CASE("a counting-down loop terminates") {
  auto a = run("int e(int x) {\n  while (x > 0) {\n    x--;\n  }\n  return x;\n}\n");
  CHECK(a.summary.issues.empty());
  bool has_ok = false;
  for (const auto& s : a.summary.specs) has_ok |= s.kind == SpecKind::Ok;
  CHECK(has_ok);
}

TEST_CASE("a loop with no progress is found once the head is visited twice") {
  std::string src = "void s(int n) {\n  int i = 0;\n  while (i < n) {\n    n = n;\n  }\n}\n";
  CHECK(run(src, 1).summary.issues.empty());
  for (int k : {2, 3, 8}) {
    CAPTURE(k);
    CHECK(run(src, k).summary.issues.size() == 1);
  }
}

TEST_CASE("a loop that stalls only after a warm-up needs a larger k") {
  std::string src =
      "void w(int n) {\n"
      "  int i = 0;\n"
      "  while (n > 0) {\n"
      "    if (i < 6) i++;\n"
      "  }\n"
      "}\n";
  CHECK(run(src, 2).summary.issues.empty());
  CHECK(run(src, 10).summary.issues.size() == 1);
}

TEST_CASE("infinite loops produce an infinite-program spec with the issue origin") {
  auto a = run("int b(int x, int y) {\n  while (x > 0) {\n    y++;\n  }\n  return y;\n}\n");
  REQUIRE(a.summary.issues.size() == 1);
  bool found = false;
  for (const auto& s : a.summary.specs)
    found |= s.kind == SpecKind::InfiniteProgram && s.origin == a.summary.issues[0].origin;
  CHECK(found);
}

TEST_CASE("a havoc-modeled read may keep returning a value that stays in the loop") {
  ModelTable m;
  m.set("read", ModelKind::Havoc);
  auto a = run("void r(int n) {\n  while (n > 0) {\n    n = read();\n  }\n}\n", 3, m);
  REQUIRE(a.summary.issues.size() == 1);
  CHECK(a.summary.issues[0].witness_precondition == "n >= 1");
}

TEST_CASE("an increasing counter never revisits an equal state") {
  auto a = run("int u(int x) {\n  while (x > 0) {\n    x++;\n  }\n  return x;\n}\n", 10);
  CHECK(a.summary.issues.empty());
}

TEST_CASE("a blocking model inside a loop does not stop the lasso") {
  ModelTable m;
  m.set("wait_event", ModelKind::Blocking);
  auto a = run("void ev() {\n  while (1) {\n    wait_event();\n  }\n}\n", 3, m);
  REQUIRE(a.summary.issues.size() == 1);
  const auto& calls = a.summary.issues[0].trace_calls;
  CHECK(std::find(calls.begin(), calls.end(), "wait_event") != calls.end());
}

TEST_CASE("pointer chasing through a table is not mistaken for a repeat") {
  auto a = run(
      "void c(int *table, int off) {\n"
      "  while (off != 0) {\n"
      "    off = *(table + off);\n"
      "  }\n"
      "}\n");
  CHECK(a.summary.issues.empty());
}

TEST_CASE("a self-referential heap cell loops forever") {
  auto a = run(
      "void p(int *y) {\n"
      "  int *z = y;\n"
      "  *z = 1;\n"
      "  while (*y > 0) {\n"
      "    *z = *y;\n"
      "  }\n"
      "}\n");
  CHECK(a.summary.issues.size() == 1);
}

TEST_CASE("the spec list respects max disjuncts") {
  std::string src =
      "int m(int a, int b, int c, int d) {\n"
      "  int r = 0;\n"
      "  if (a > 0) r++;\n"
      "  if (b > 0) r++;\n"
      "  if (c > 0) r++;\n"
      "  if (d > 0) r++;\n"
      "  return r;\n"
      "}\n";
  Program p = parse(src);
  Cfg cfg = build_cfg(p.functions[0]);
  ModelTable models;
  ExecContext ctx;
  ctx.function = &p.functions[0];
  ctx.cfg = &cfg;
  ctx.models = &models;
  ctx.oracle = [](const std::string&) { return SummaryResult{}; };
  ctx.config.max_disjuncts = 4;
  Summary s = analyze_procedure(p.functions[0], cfg, ctx);
  CHECK(s.specs.size() <= 4);
  CHECK(s.truncated);
}

TEST_CASE("expression evaluation is linear over slots") {
  Program p = parse("int f(int a, int b) {\n  return 2 * a - b + 3;\n}\n");
  Cfg cfg = build_cfg(p.functions[0]);
  AbstractState st = fresh_entry_state(cfg);
  Expr lhs = *Expr::binary(BinOp::Sub,
                           Expr::binary(BinOp::Mul, Expr::int_lit(2), Expr::variable("a", {}, 0)),
                           Expr::variable("b", {}, 1));
  Term t = eval_expr(st, lhs);
  CHECK(t == Term::var(st.params[0], 2) - Term::var(st.params[1]));
}
