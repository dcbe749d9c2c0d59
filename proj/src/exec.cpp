// exec.cpp - symbolic execution of one procedure

#include "diverge/exec.hpp"

#include <algorithm>

#include "diverge/frontend.hpp"
#include "diverge/interproc.hpp"

namespace diverge {

namespace {

CmpOp to_cmp(BinOp op) {
  switch (op) {
    case BinOp::Lt: return CmpOp::Lt;
    case BinOp::Le: return CmpOp::Le;
    case BinOp::Gt: return CmpOp::Gt;
    case BinOp::Ge: return CmpOp::Ge;
    case BinOp::Eq: return CmpOp::Eq;
    default: return CmpOp::Ne;
  }
}

Atom flip(const Atom& a) {
  switch (a.rel) {
    case Rel::Eq: return Atom{Rel::Ne, a.term};
    case Rel::Ne: return Atom{Rel::Eq, a.term};
    case Rel::Le: return a.negated_le();
  }
  return a;
}

Term opaque(AbstractState& st, const std::string& op, std::vector<Term> args) {
  auto [v, pc] = st.pc.intern(op, std::move(args), [&] { return st.fresh(); });
  st.pc = std::move(pc);
  return Term::var(v);
}

SymValue load_into(AbstractState& st, SymValue addr) {
  auto [c, next] = load(std::move(st), addr);
  st = std::move(next);
  return c;
}

SymValue deref_key(AbstractState& st, const Term& addr) {
  auto key = address_key(st, addr);
  if (!key) throw InfeasibleState();  // null dereference ends the path
  return *key;
}

}  // namespace

Term eval_expr(AbstractState& st, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::IntLit: return Term::constant(e.value);
    case Expr::Kind::SizeOf: return Term::constant(1);
    case Expr::Kind::Var: {
      SymValue slot = st.stack.at(static_cast<std::size_t>(e.var));
      return st.pc.normalize(load_into(st, slot));
    }
    case Expr::Kind::Unary: {
      const Expr& k = *e.kids[0];
      switch (e.unop) {
        case UnOp::Neg: return -eval_expr(st, k);
        case UnOp::Deref: {
          SymValue key = deref_key(st, eval_expr(st, k));
          return st.pc.normalize(load_into(st, key));
        }
        case UnOp::AddrOf:
          if (k.kind != Expr::Kind::Var) throw std::logic_error("& of non-variable");
          return Term::var(st.stack.at(static_cast<std::size_t>(k.var)));
        case UnOp::Not: break;
      }
      break;
    }
    case Expr::Kind::Binary: {
      Term a = eval_expr(st, *e.kids[0]);
      Term b = eval_expr(st, *e.kids[1]);
      switch (e.binop) {
        case BinOp::Add: return a + b;
        case BinOp::Sub: return a - b;
        case BinOp::Mul:
          if (a.is_constant()) return b.scaled(a.constant_part());
          if (b.is_constant()) return a.scaled(b.constant_part());
          if (b < a) std::swap(a, b);
          return opaque(st, "*", {a, b});
        case BinOp::Div:
          if (b.is_constant()) {
            std::int64_t d = b.constant_part();
            if (d == 0) throw InfeasibleState();
            if (d == 1) return a;
            if (a.is_constant()) {
              if (a.constant_part() == INT64_MIN && d == -1) throw ArithmeticOverflow();
              return Term::constant(a.constant_part() / d);
            }
          }
          return opaque(st, "/", {a, b});
        default: break;
      }
      break;
    }
    case Expr::Kind::Call: break;
  }
  throw std::logic_error("expression not lowered: " + print_expr(e));
}

Atom eval_condition(AbstractState& st, const Expr& e) {
  if (e.kind == Expr::Kind::Binary && is_comparison(e.binop)) {
    Term a = eval_expr(st, *e.kids[0]);
    Term b = eval_expr(st, *e.kids[1]);
    return make_atom(a, to_cmp(e.binop), b);
  }
  return Atom{Rel::Ne, eval_expr(st, e)};
}

void assign_to(AbstractState& st, const Expr& lhs, const Term& value) {
  SymValue v = bind_term(st, value);
  SymValue key;
  if (lhs.kind == Expr::Kind::Var) {
    key = st.stack.at(static_cast<std::size_t>(lhs.var));
  } else if (lhs.kind == Expr::Kind::Unary && lhs.unop == UnOp::Deref) {
    key = deref_key(st, eval_expr(st, *lhs.kids[0]));
  } else {
    throw std::logic_error("bad assignment target");
  }
  st = store(std::move(st), key, v);
}

namespace {

std::string with_offset(const std::string& side, std::int64_t c) {
  if (c == 0) return side;
  if (side.empty()) return std::to_string(c);
  return side + (c > 0 ? " + " : " - ") + std::to_string(c > 0 ? c : -c);
}

// `P + k REL N` with every coefficient positive, written the way a
// programmer would state it.
std::string readable(const Atom& a, const Namer& namer) {
  Term pos, neg;
  for (const auto& [v, c] : a.term.coeffs())
    (c > 0 ? pos : neg) = (c > 0 ? pos : neg) + Term::var(v, c > 0 ? c : -c);
  std::int64_t k = a.term.constant_part();
  std::string p = pos.is_constant() ? "" : pos.to_string(namer);
  std::string n = neg.is_constant() ? "" : neg.to_string(namer);
  if (a.rel != Rel::Le) {
    const char* op = a.rel == Rel::Eq ? " = " : " != ";
    if (p.empty()) return n + op + std::to_string(k);
    if (n.empty()) return p + op + std::to_string(-k);
    return p + op + with_offset(n, -k);
  }
  if (n.empty()) return p + " <= " + std::to_string(-k);
  if (p.empty()) return n + " >= " + std::to_string(k);
  if (k >= 1) return n + " > " + with_offset(p, k - 1);
  return n + " >= " + with_offset(p, k);
}

}  // namespace

std::string witness_string(const PathCondition& pc, const std::map<SymValue, std::string>& names) {
  auto namer = [&](SymValue v) { return names.at(v); };
  auto all_named = [&](const std::vector<SymValue>& vs) {
    return std::all_of(vs.begin(), vs.end(), [&](SymValue v) { return names.count(v) != 0; });
  };
  std::vector<std::string> parts;
  for (const auto& [v, t] : pc.definitions())
    if (names.count(v) && all_named(t.vars()))
      parts.push_back(names.at(v) + " = " + t.to_string(namer));
  for (const auto& [v, iv] : pc.bounds()) {
    if (!names.count(v)) continue;
    if (iv.lo) parts.push_back(names.at(v) + " >= " + std::to_string(*iv.lo));
    if (iv.hi) parts.push_back(names.at(v) + " <= " + std::to_string(*iv.hi));
  }
  for (const auto& a : pc.atoms())
    if (all_named(a.vars())) parts.push_back(readable(a, namer));
  if (parts.empty()) return "true";
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? " && " : "") + parts[i];
  return s;
}

void fill_witness(Issue& issue, const AbstractState& st, const ExecContext& ctx) {
  std::vector<std::string> param_names;
  for (const auto& p : ctx.function->params) param_names.push_back(p.name);
  auto names = precondition_names(st.pc, param_names, st.params, st.footprint);
  issue.witness_precondition = witness_string(st.pc, names);
  issue.witness_pc = st.pc;
  issue.witness_vars.clear();
  for (const auto& [v, n] : names) issue.witness_vars.emplace(n, v);
  std::vector<TraceStep> steps;
  for (const auto& e : trace_entries(st.trace)) steps.push_back({ctx.file, e.line, e.description});
  issue.trace = std::move(steps);
  issue.k_used = ctx.config.k;
}

namespace {

void exec_call(AbstractState s, const Instr& ins, const ExecContext& ctx,
               std::vector<Outcome>& out) {
  std::vector<Term> args;
  for (const auto& a : ins.args) args.push_back(s.pc.normalize(eval_expr(s, *a)));
  const std::string& name = ins.callee;
  const std::string& current = ctx.function->name;

  if (name == "nondet") {
    if (ins.lhs) assign_to(s, *ins.lhs, Term::var(s.fresh()));
    out.push_back({Outcome::Kind::Continue, std::move(s), {}, {}});
    return;
  }

  SummaryResult res = ctx.oracle(name);
  if (res.kind == SummaryResult::Kind::Found) {
    auto outs = apply_summary(s, *res.summary, args, ins.lhs, ctx, ins.loc);
    for (auto& o : outs) out.push_back(std::move(o));
    return;
  }
  if (res.kind == SummaryResult::Kind::MutualRecursion) {
    s.trace = trace_push(s.trace, {ins.loc.line, "recursive call to " + name, {}});
    if (name == current) {
      RecursiveCallRecord rec{name, args, {current}, ins.loc};
      if (!s.widened) {
        if (auto issue = close_cycle(current, s, rec, ctx)) {
          std::string origin = issue->origin;
          out.push_back({Outcome::Kind::Diverged, std::move(s), origin, std::move(issue)});
          return;
        }
      }
    } else {
      s = on_mutual_recursion(std::move(s), current, name, args, ins.loc);
    }
    if (ins.lhs) assign_to(s, *ins.lhs, Term::var(s.fresh()));
    out.push_back({Outcome::Kind::Continue, std::move(s), {}, {}});
    return;
  }

  // No code: use the model.
  auto kind = ctx.models ? ctx.models->kind_of(name) : std::nullopt;
  s.external_calls.insert(name);
  s.trace = trace_push(s.trace, {ins.loc.line, "call to " + name, {name}});
  switch (kind.value_or(ModelKind::Havoc)) {
    case ModelKind::NoReturn: return;
    case ModelKind::Pure: {
      Term r = opaque(s, "call:" + name, args);
      if (ins.lhs) assign_to(s, *ins.lhs, r);
      break;
    }
    case ModelKind::Alloc: {
      for (auto& [addr, st2] : alloc(std::move(s))) {
        if (ins.lhs) assign_to(st2, *ins.lhs, Term::var(addr));
        out.push_back({Outcome::Kind::Continue, std::move(st2), {}, {}});
      }
      return;
    }
    case ModelKind::Havoc:
    case ModelKind::Blocking:
      if (ins.lhs) assign_to(s, *ins.lhs, Term::var(s.fresh()));
      break;
  }
  out.push_back({Outcome::Kind::Continue, std::move(s), {}, {}});
}

}  // namespace

std::vector<Outcome> exec_instr(const AbstractState& st, const Instr& ins, const ExecContext& ctx) {
  std::vector<Outcome> out;
  AbstractState s = st;
  try {
    switch (ins.kind) {
      case Instr::Kind::Assign: {
        Term v = eval_expr(s, *ins.expr);
        assign_to(s, *ins.lhs, v);
        out.push_back({Outcome::Kind::Continue, std::move(s), {}, {}});
        break;
      }
      case Instr::Kind::Assume: {
        Atom a = eval_condition(s, *ins.expr);
        if (!ins.polarity) a = flip(a);
        auto next = assume(std::move(s), a);
        if (!next) break;
        if (ins.is_loop_guard)
          next->tcs = record_termination_condition(std::move(next->tcs), a, ins.guard_head,
                                                   ins.loc, ins.polarity);
        next->trace = trace_push(next->trace, {ins.loc.line,
                                               std::string(ins.polarity ? "taking true branch of "
                                                                        : "taking false branch of ") +
                                                   print_expr(*ins.expr),
                                               {}});
        out.push_back({Outcome::Kind::Continue, std::move(*next), {}, {}});
        break;
      }
      case Instr::Kind::Alloc: {
        if (ins.expr) (void)eval_expr(s, *ins.expr);
        for (auto& [addr, st2] : alloc(std::move(s))) {
          if (ins.lhs) assign_to(st2, *ins.lhs, Term::var(addr));
          out.push_back({Outcome::Kind::Continue, std::move(st2), {}, {}});
        }
        break;
      }
      case Instr::Kind::Free: {
        auto key = address_key(s, eval_expr(s, *ins.expr));
        if (key) s = free_cell(std::move(s), *key);
        out.push_back({Outcome::Kind::Continue, std::move(s), {}, {}});
        break;
      }
      case Instr::Kind::Return: {
        if (ins.expr) s.ret = s.pc.normalize(eval_expr(s, *ins.expr));
        s.trace = trace_push(s.trace, {ins.loc.line, "return", {}});
        out.push_back({Outcome::Kind::Returned, std::move(s), {}, {}});
        break;
      }
      case Instr::Kind::Call: exec_call(std::move(s), ins, ctx, out); break;
    }
  } catch (const UseAfterFree&) {
    out.clear();
    out.push_back({Outcome::Kind::Error, st, {}, {}});
  } catch (const InfeasibleState&) {
    out.clear();
  } catch (const ArithmeticOverflow&) {
    out.clear();
  }
  return out;
}

std::vector<TerminationCondition> instantiate_control_atoms(AbstractState& scratch, int head,
                                                            const Cfg& cfg) {
  std::vector<TerminationCondition> out;
  for (const auto& g : cfg.control_atoms(head)) {
    try {
      Atom a = eval_condition(scratch, *g.atom);
      out.push_back({a, head, g.loc, g.polarity});
    } catch (const InfeasibleState&) {
    } catch (const ArithmeticOverflow&) {
    } catch (const UseAfterFree&) {
    }
  }
  if (out.empty()) out.push_back({Atom{Rel::Eq, Term()}, head, cfg.blocks.at(head).loc, true});
  return out;
}

WidenResult widen_at_head(const AbstractState& st, int head, const Cfg& cfg,
                          const WidenConfig& config) {
  AbstractState scratch = st;
  auto inst = instantiate_control_atoms(scratch, head, cfg);
  std::vector<SymValue> tracked;
  for (int slot : cfg.loop_tracked_slots(head)) {
    auto [v, next] = load(std::move(scratch), scratch.stack.at(static_cast<std::size_t>(slot)));
    scratch = std::move(next);
    tracked.push_back(v);
  }
  LoopSnapshot snap = snapshot(scratch, head, inst, tracked);
  auto hist = st.head_history.find(head);
  if (hist != st.head_history.end())
    for (const auto& prev : hist->second)
      if (prev.same_state(snap)) return LassoWitness{head, snap, st.pc, st.trace, prev.trace};
  auto count = st.visit_counts.find(head);
  int visits = count == st.visit_counts.end() ? 0 : count->second;
  if (visits >= config.k) return StopUnrolling{};
  AbstractState next = st;
  next.trace = trace_push(next.trace, {cfg.blocks.at(head).loc.line,
                                       "loop head, visit " + std::to_string(visits + 1), {}});
  snap.trace = next.trace;
  next.head_history[head].push_back(std::move(snap));
  next.visit_counts[head] = visits + 1;
  return Proceed{std::move(next)};
}

namespace {

class ProcedureAnalysis {
 public:
  ProcedureAnalysis(const FunctionDef& f, const Cfg& cfg, const ExecContext& ctx)
      : f_(f), cfg_(cfg), ctx_(ctx) {
    summary_.procedure = f.name;
    summary_.k = ctx.config.k;
  }

  Summary run() {
    AbstractState init = fresh_entry_state(cfg_);
    init.trace = trace_push(nullptr, {f_.loc.line, "start of " + f_.name, {}});
    arrive(std::move(init), cfg_.entry, -1, 0);
    long total_budget = ctx_.config.step_budget * std::max(1, ctx_.config.max_disjuncts);
    long total = 0;
    while (!work_.empty()) {
      Item it = std::move(work_.back());
      work_.pop_back();
      const BasicBlock& b = cfg_.blocks.at(static_cast<std::size_t>(it.block));
      if (it.idx < b.instrs.size()) {
        if (++it.steps > ctx_.config.step_budget || ++total > total_budget) {
          summary_.incomplete = true;
          continue;
        }
        auto outs = exec_instr(it.st, b.instrs[it.idx], ctx_);
        for (auto o = outs.rbegin(); o != outs.rend(); ++o) handle(std::move(*o), it);
        continue;
      }
      for (auto e = b.succs.rbegin(); e != b.succs.rend(); ++e) {
        const Edge& edge = cfg_.edges.at(static_cast<std::size_t>(*e));
        arrive(it.st, edge.dst, *e, it.steps);
      }
    }
    return std::move(summary_);
  }

 private:
  struct Item {
    AbstractState st;
    int block = 0;
    std::size_t idx = 0;
    long steps = 0;
  };

  const FunctionDef& f_;
  const Cfg& cfg_;
  const ExecContext& ctx_;
  Summary summary_;
  std::vector<Item> work_;
  std::map<int, long> arrivals_;  // states that entered each block
  std::set<int> reported_heads_;
  std::set<std::string> reported_cycles_;
  std::set<std::string> divergent_origins_;

  void handle(Outcome o, const Item& from) {
    switch (o.kind) {
      case Outcome::Kind::Continue:
        work_.push_back({std::move(o.state), from.block, from.idx + 1, from.steps});
        break;
      case Outcome::Kind::Returned:
        add_spec(o.state, o.state.rec_calls.empty() ? SpecKind::Ok : SpecKind::RecursivePending,
                 {});
        break;
      case Outcome::Kind::Error: break;
      case Outcome::Kind::Diverged:
        if (o.state.widened) break;
        if (o.issue) {
          std::vector<std::string> key = o.issue->cycle;
          std::sort(key.begin(), key.end());
          std::string k;
          for (const auto& n : key) k += n + ",";
          if (reported_cycles_.insert(k).second) summary_.issues.push_back(std::move(*o.issue));
        }
        add_spec(o.state, SpecKind::InfiniteProgram, o.origin);
        break;
    }
  }

  void arrive(AbstractState st, int dst, int edge_id, long steps) {
    long cap = static_cast<long>(ctx_.config.max_disjuncts) * (ctx_.config.k + 1);
    if (++arrivals_[dst] > cap) {
      summary_.truncated = true;
      return;
    }
    if (!cfg_.loop_heads.count(dst)) {
      work_.push_back({std::move(st), dst, 0, steps});
      return;
    }
    bool back = edge_id >= 0 && cfg_.edges.at(static_cast<std::size_t>(edge_id)).back;
    if (back && st.stopped_heads.count(dst)) return;  // loop was cut off: exits only
    if (!back) {
      st.head_history.erase(dst);
      st.visit_counts.erase(dst);
      st.stopped_heads.erase(dst);
    }
    WidenResult r = widen_at_head(st, dst, cfg_, ctx_.config);
    if (auto* p = std::get_if<Proceed>(&r)) {
      work_.push_back({std::move(p->state), dst, 0, steps});
      return;
    }
    if (auto* w = std::get_if<LassoWitness>(&r); w && !st.widened) {
      bool from_goto = edge_id >= 0 && cfg_.edges.at(static_cast<std::size_t>(edge_id)).from_goto;
      report_lasso(st, *w, from_goto);
      return;
    }
    work_.push_back({cut_off(std::move(st), dst), dst, 0, steps});
  }

  // Havocs what the loop may write and switches the head to exit mode.
  AbstractState cut_off(AbstractState st, int head) {
    bool heap_writes = false;
    std::set<int> slots;
    for (int bid : cfg_.loop_body(head)) {
      for (const auto& ins : cfg_.blocks.at(static_cast<std::size_t>(bid)).instrs) {
        if (ins.kind == Instr::Kind::Call || ins.kind == Instr::Kind::Free) heap_writes = true;
        if (!ins.lhs) continue;
        if (ins.lhs->kind == Expr::Kind::Var) slots.insert(ins.lhs->var);
        else heap_writes = true;
      }
    }
    for (int slot : slots) {
      SymValue key = st.stack.at(static_cast<std::size_t>(slot));
      st.heap.points_to[key] = st.fresh();
    }
    if (heap_writes)
      for (auto& [k, c] : st.heap.points_to)
        if (!st.slot_addrs.count(k)) c = st.fresh();
    st.widened = true;
    st.stopped_heads.insert(head);
    st.trace = trace_push(st.trace, {cfg_.blocks.at(static_cast<std::size_t>(head)).loc.line,
                                     "loop unrolling bound reached", {}});
    return st;
  }

  void report_lasso(const AbstractState& st, const LassoWitness& w, bool from_goto) {
    int line = cfg_.blocks.at(static_cast<std::size_t>(w.head)).loc.line;
    std::string origin = "loop:" + f_.name + ":" + std::to_string(line) + ":" +
                         std::to_string(w.head);
    if (reported_heads_.insert(w.head).second) {
      Issue issue;
      issue.type = from_goto ? IssueType::InfiniteGoto : IssueType::InfiniteLoop;
      issue.procedure = f_.name;
      issue.file = ctx_.file;
      issue.line = line;
      issue.origin = origin;
      AbstractState closed = st;
      closed.trace = trace_push(st.trace, {line, "loop head reached again in a repeated state", {}});
      fill_witness(issue, closed, ctx_);
      std::set<std::string> calls;
      for (const TraceNode* n = st.trace.get(); n && n != w.cycle_start.get(); n = n->prev.get())
        for (const auto& c : n->entry.calls) calls.insert(c);
      issue.trace_calls.assign(calls.begin(), calls.end());
      summary_.issues.push_back(std::move(issue));
    }
    add_spec(st, SpecKind::InfiniteProgram, origin);
  }

  void add_spec(const AbstractState& st, SpecKind kind, const std::string& origin) {
    bool first_divergence =
        kind == SpecKind::InfiniteProgram && divergent_origins_.insert(origin).second;
    if (static_cast<int>(summary_.specs.size()) >= ctx_.config.max_disjuncts) {
      summary_.truncated = true;
      if (!first_divergence) return;
      // Every divergence keeps at least one spec; evict the latest other one.
      auto victim = std::find_if(summary_.specs.rbegin(), summary_.specs.rend(),
                                 [](const Spec& s) { return s.kind != SpecKind::InfiniteProgram; });
      if (victim == summary_.specs.rend()) return;
      summary_.specs.erase(std::next(victim).base());
    }
    Spec sp;
    sp.kind = kind;
    sp.params = st.params;
    sp.footprint = st.footprint;
    sp.pc = st.pc;
    for (const auto& [k, c] : st.heap.points_to)
      if (st.footprint.count(k) || st.heap.allocated.count(k)) sp.post_heap[k] = c;
    sp.allocated = st.heap.allocated;
    for (auto v : st.heap.freed)
      if (st.footprint.count(v)) sp.freed.insert(v);
    if (kind != SpecKind::InfiniteProgram) {
      sp.ret = st.ret;
      sp.rec_calls = st.rec_calls;
    }
    sp.origin = origin;
    sp.external_calls = st.external_calls;
    sp.widened = st.widened;
    sp.next_id = st.next_id;
    summary_.specs.push_back(std::move(sp));
  }
};

}  // namespace

Summary analyze_procedure(const FunctionDef& f, const Cfg& cfg, const ExecContext& ctx) {
  return ProcedureAnalysis(f, cfg, ctx).run();
}

}  // namespace diverge
