// Parser, printer and CFG construction.

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "diverge/cfg.hpp"
#include "diverge/cli.hpp"
#include "diverge/frontend.hpp"

using namespace diverge;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_back_edges(const Cfg& cfg) {
  int n = 0;
  for (const auto& e : cfg.edges) n += e.back ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("every corpus program parses and prints back to the same shape") {
  int seen = 0;
  for (const auto& dir : {std::string(DIVERGE_CORPUS_DIR), std::string(DIVERGE_CORPUS_DIR) + "/ksens",
                          std::string(DIVERGE_CORPUS_DIR) + "/limits"}) {
    for (const auto& path : mc_files_in(dir)) {
      CAPTURE(path);
      Program p = parse(slurp(path), path);
      CHECK(!p.functions.empty());
      Program again = parse(print_program(p), "<printed>");
      CHECK(same_shape(p, again));
      ++seen;
    }
  }
  CHECK(seen > 30);
}

TEST_CASE("empty source yields an empty program") {
  Program p = parse("", "empty.mc");
  CHECK(p.functions.empty());
}

TEST_CASE("annotations are collected with their lines") {
  Program p = parse("int f() {\n  //@ intended\n  return 0;\n}\n");
  REQUIRE(p.annotations.size() == 1);
  CHECK(p.annotations[0].line == 2);
  CHECK(p.annotations[0].text == "intended");
}

TEST_CASE("goto to a missing label is rejected with its position") {
  try {
    parse("void f() {\n  goto nowhere;\n}\n");
    FAIL("expected UndefinedLabel");
  } catch (const UndefinedLabel& e) {
    CHECK(e.loc().line == 2);
  }
}

TEST_CASE("syntax errors carry a location") {
  CHECK_THROWS_AS(parse("int f( {"), ParseError);
  try {
    parse("int f() {\n  x = ;\n}\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.loc().line == 2);
  }
}

TEST_CASE("backward goto makes a back edge, forward goto does not") {
  Program back = parse("int a(int x) {\nprevious:\n  x++;\n  goto previous;\n}\n");
  Cfg cb = build_cfg(back.functions[0]);
  CHECK(count_back_edges(cb) == 1);
  CHECK(cb.loop_heads.size() == 1);
  bool goto_back = false;
  for (const auto& e : cb.edges) goto_back |= e.back && e.from_goto;
  CHECK(goto_back);

  Program fwd = parse("int d(int x) {\n  goto next;\nnext:\n  x++;\n  return x;\n}\n");
  Cfg cf = build_cfg(fwd.functions[0]);
  CHECK(count_back_edges(cf) == 0);
  CHECK(cf.loop_heads.empty());
}

TEST_CASE("while loop guard atoms name the guard with its polarity") {
  Program p = parse("int b(int x) {\n  while (x > 0) {\n    x++;\n  }\n  return x;\n}\n");
  Cfg cfg = build_cfg(p.functions[0]);
  REQUIRE(cfg.loop_heads.size() == 1);
  auto atoms = loop_guard_atoms(cfg, *cfg.loop_heads.begin());
  REQUIRE(atoms.size() == 1);
  CHECK(print_expr(*atoms[0].atom) == "x > 0");
  CHECK(atoms[0].polarity);
  CHECK(atoms[0].loc.line == 2);
}

TEST_CASE("nested loops have separate heads and guards") {
  Program p = parse(
      "void n(int i, int j) {\n"
      "  while (i > 0) {\n"
      "    while (j < 10) {\n"
      "      j++;\n"
      "    }\n"
      "    i--;\n"
      "  }\n"
      "}\n");
  Cfg cfg = build_cfg(p.functions[0]);
  REQUIRE(cfg.loop_heads.size() == 2);
  std::set<std::string> guards;
  for (int h : cfg.loop_heads)
    for (const auto& g : loop_guard_atoms(cfg, h)) guards.insert(print_expr(*g.atom));
  CHECK(guards == std::set<std::string>{"i > 0", "j < 10"});
  int outer = *cfg.loop_heads.begin(), inner = *cfg.loop_heads.rbegin();
  CHECK(cfg.loop_body(outer).count(inner) == 1);
  CHECK(cfg.loop_body(inner).count(outer) == 0);
}

TEST_CASE("short-circuit conditions lower into separate guard atoms") {
  Program p = parse("void s(int a, int b) {\n  while (a > 0 && b > 0) {\n    a = a + b;\n  }\n}\n");
  Cfg cfg = build_cfg(p.functions[0]);
  REQUIRE(cfg.loop_heads.size() == 1);
  auto atoms = loop_guard_atoms(cfg, *cfg.loop_heads.begin());
  std::set<std::string> printed;
  for (const auto& g : atoms) printed.insert(print_expr(*g.atom));
  CHECK(printed.count("a > 0") == 1);
  CHECK(printed.count("b > 0") == 1);
  for (const auto& b : cfg.blocks)
    for (const auto& i : b.instrs)
      if (i.kind == Instr::Kind::Assume) CHECK(!is_logical(i.expr->binop));
}

TEST_CASE("parameters come first in the variable table") {
  Program p = parse("int f(int *p, int n) {\n  int t = 0;\n  return t;\n}\n");
  Cfg cfg = build_cfg(p.functions[0]);
  CHECK(cfg.param_count() == 2);
  CHECK(cfg.vars[0].name == "p");
  CHECK(cfg.vars[0].type.depth == 1);
  CHECK(cfg.vars[1].name == "n");
}
