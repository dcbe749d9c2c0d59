// Abstract states: slots, lazy footprint, allocation and loop snapshots.

#include "doctest.h"
#include "diverge/frontend.hpp"
#include "diverge/symstate.hpp"

using namespace diverge;

namespace {

Cfg cfg_of(const std::string& src) {
  static std::vector<Program> keep;
  keep.push_back(parse(src));
  return build_cfg(keep.back().functions[0]);
}

}  // namespace

TEST_CASE("entry state binds each parameter slot to its parameter value") {
  Cfg cfg = cfg_of("int f(int a, int *p) {\n  int t = 0;\n  return t;\n}\n");
  AbstractState st = fresh_entry_state(cfg);
  REQUIRE(st.params.size() == 2);
  REQUIRE(st.stack.size() == cfg.vars.size());
  CHECK(peek(st, st.stack[0]) == st.params[0]);
  CHECK(peek(st, st.stack[1]) == st.params[1]);
  CHECK(!peek(st, st.stack[2]));
  CHECK(st.footprint.empty());
}

TEST_CASE("loading through a parameter pointer grows the footprint") {
  Cfg cfg = cfg_of("int f(int *p) {\n  return *p;\n}\n");
  AbstractState st = fresh_entry_state(cfg);
  SymValue p = st.params[0];
  auto [c, after] = load(st, p);
  CHECK(after.footprint.size() == 1);
  CHECK(entails(after.pc, Atom{Rel::Ne, Term::var(p)}));
  auto [c2, again] = load(after, p);
  CHECK(c2 == c);
  CHECK(again.footprint.size() == 1);
}

TEST_CASE("stores replace cell contents") {
  Cfg cfg = cfg_of("void f(int *p) {\n  *p = 1;\n}\n");
  AbstractState st = fresh_entry_state(cfg);
  SymValue val = bind_term(st, Term::constant(5));
  AbstractState after = store(st, st.params[0], val);
  auto [got, s2] = load(after, st.params[0]);
  CHECK(s2.pc.normalize(got) == Term::constant(5));
}

TEST_CASE("allocation splits into a fresh cell and a null result") {
  Cfg cfg = cfg_of("void f() {\n  int *q = malloc(sizeof(int));\n}\n");
  AbstractState st = fresh_entry_state(cfg);
  auto outs = alloc(st);
  REQUIRE(outs.size() == 2);
  auto& [cell, ok] = outs[0];
  CHECK(ok.heap.allocated.count(cell) == 1);
  CHECK(entails(ok.pc, Atom{Rel::Ne, Term::var(cell)}));
  auto& [null_v, nul] = outs[1];
  CHECK(nul.pc.normalize(null_v) == Term::constant(0));
}

TEST_CASE("freeing twice is a use after free") {
  Cfg cfg = cfg_of("void f() {\n  int *q = malloc(sizeof(int));\n}\n");
  AbstractState st = alloc(fresh_entry_state(cfg))[0].second;
  SymValue cell = *st.heap.allocated.begin();
  AbstractState freed = free_cell(st, cell);
  CHECK(freed.heap.freed.count(cell) == 1);
  CHECK_THROWS_AS(free_cell(freed, cell), UseAfterFree);
  CHECK_THROWS_AS(load(freed, cell), UseAfterFree);
}

TEST_CASE("assume prunes contradictory branches") {
  Cfg cfg = cfg_of("int f(int a) {\n  return a;\n}\n");
  AbstractState st = fresh_entry_state(cfg);
  Term a = Term::var(st.params[0]);
  auto pos = assume(st, make_atom(a, CmpOp::Gt, Term::constant(0)));
  REQUIRE(pos);
  CHECK(!assume(*pos, make_atom(a, CmpOp::Lt, Term::constant(0))));
}

TEST_CASE("snapshots compare states up to renaming") {
  Cfg cfg = cfg_of("int f(int a) {\n  while (a > 0) {\n    a++;\n  }\n  return a;\n}\n");
  AbstractState st = fresh_entry_state(cfg);
  Term a = Term::var(st.params[0]);
  auto s1 = *assume(st, make_atom(a, CmpOp::Gt, Term::constant(0)));
  TerminationCondition tc1{make_atom(a, CmpOp::Gt, Term::constant(0)), 1, {}, true};
  LoopSnapshot first = snapshot(s1, 1, {tc1}, {st.params[0]});

  // Same shape over a different value: a' = a + 1 with a > 0.
  AbstractState s2 = s1;
  SymValue a2 = bind_term(s2, a + Term::constant(1));
  TerminationCondition tc2{make_atom(Term::var(a2), CmpOp::Gt, Term::constant(0)), 1, {}, true};
  LoopSnapshot second = snapshot(s2, 1, {tc2}, {a2});
  CHECK(!first.same_state(second));

  AbstractState s3 = fresh_entry_state(cfg);
  s3.next_id += 40;
  SymValue b = s3.fresh();
  s3 = *assume(s3, make_atom(Term::var(b), CmpOp::Gt, Term::constant(0)));
  TerminationCondition tc3{make_atom(Term::var(b), CmpOp::Gt, Term::constant(0)), 1, {}, true};
  CHECK(first.same_state(snapshot(s3, 1, {tc3}, {b})));
}

TEST_CASE("subheap reachability follows pointer chains") {
  Cfg cfg = cfg_of("void f(int **pp) {\n  int x = **pp;\n}\n");
  AbstractState st = fresh_entry_state(cfg);
  auto [inner, s1] = load(st, st.params[0]);
  auto [leaf, s2] = load(s1, inner);
  auto reached = subheap_rooted_at(s2, {st.params[0]});
  CHECK(reached.size() == 2);
  CHECK(subheap_rooted_at(s2, {}).empty());
}

TEST_CASE("traces keep insertion order") {
  TracePtr t;
  t = trace_push(t, TraceEntry{1, "one", {}});
  t = trace_push(t, TraceEntry{2, "two", {"g"}});
  auto es = trace_entries(t);
  REQUIRE(es.size() == 2);
  CHECK(es[0].description == "one");
  CHECK(es[1].calls == std::vector<std::string>{"g"});
}
