// interp.cpp - concrete reference interpreter

#include "diverge/interp.hpp"

#include <set>
#include <stdexcept>
#include <vector>

#include "diverge/cfg.hpp"

namespace diverge {

std::string to_string(ConcreteResult::Kind k) {
  switch (k) {
    case ConcreteResult::Kind::Terminated: return "Terminated";
    case ConcreteResult::Kind::RepeatedState: return "RepeatedState";
    case ConcreteResult::Kind::BudgetExhausted: return "BudgetExhausted";
  }
  return "Terminated";
}

namespace {

struct RuntimeFault {};

void vars_of(const Expr& e, std::set<int>& out, bool& pointer) {
  if (e.kind == Expr::Kind::Var) out.insert(e.var);
  if (e.kind == Expr::Kind::Unary && (e.unop == UnOp::Deref || e.unop == UnOp::AddrOf))
    pointer = true;
  for (const auto& k : e.kids)
    if (k) vars_of(*k, out, pointer);
}

class Machine {
 public:
  Machine(const Program& p) : program_(p) {
    for (const auto& f : p.functions) cfgs_.push_back(build_cfg(f));
    compute_relevance();
  }

  ConcreteResult run(const std::string& entry, const std::map<std::string, std::int64_t>& env,
                     long budget) {
    int fi = program_.index_of(entry);
    if (fi < 0) throw std::invalid_argument("unknown entry procedure " + entry);
    std::vector<std::int64_t> args;
    for (const auto& prm : program_.functions[static_cast<std::size_t>(fi)].params) {
      auto it = env.find(prm.name);
      args.push_back(it == env.end() ? 0 : it->second);
    }
    push_frame(fi, args, nullptr);
    ConcreteResult r;
    try {
      while (!frames_.empty()) {
        if (r.steps >= budget) {
          r.kind = ConcreteResult::Kind::BudgetExhausted;
          return r;
        }
        ++r.steps;
        if (!step()) {
          r.kind = ConcreteResult::Kind::RepeatedState;
          return r;
        }
      }
    } catch (const RuntimeFault&) {
    }
    r.kind = ConcreteResult::Kind::Terminated;
    return r;
  }

 private:
  struct Frame {
    int fn = 0;
    int block = 0;
    std::size_t idx = 0;
    std::int64_t base = 0;  // address of slot 0
    const Expr* dest = nullptr;  // caller's destination for the return value
  };

  const Program& program_;
  std::vector<Cfg> cfgs_;
  std::vector<std::set<int>> relevant_;
  bool pointers_ = false;
  std::vector<Frame> frames_;
  std::map<std::int64_t, std::int64_t> heap_;
  std::int64_t next_addr_ = 4096;
  std::set<std::vector<std::int64_t>> seen_;

  // Slots whose values can reach a branch, a call argument or the heap. A
  // returned value counts only when some caller stores it in a relevant slot.
  void compute_relevance() {
    relevant_.assign(cfgs_.size(), {});
    std::vector<bool> result_used(cfgs_.size(), false);
    auto is_var = [](const ExprPtr& e) { return e && e->kind == Expr::Kind::Var; };
    for (std::size_t f = 0; f < cfgs_.size(); ++f)
      for (const auto& b : cfgs_[f].blocks)
        for (const auto& ins : b.instrs) {
          if (ins.kind == Instr::Kind::Return) continue;
          if (ins.kind == Instr::Kind::Assign && is_var(ins.lhs)) continue;
          if (ins.lhs && !is_var(ins.lhs)) vars_of(*ins.lhs, relevant_[f], pointers_);
          if (ins.expr) vars_of(*ins.expr, relevant_[f], pointers_);
          for (const auto& a : ins.args) vars_of(*a, relevant_[f], pointers_);
        }
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t f = 0; f < cfgs_.size(); ++f)
        for (const auto& b : cfgs_[f].blocks)
          for (const auto& ins : b.instrs) {
            if (ins.kind == Instr::Kind::Call && ins.lhs) {
              int g = program_.index_of(ins.callee);
              bool stored = !is_var(ins.lhs) || relevant_[f].count(ins.lhs->var);
              if (g >= 0 && stored && !result_used[static_cast<std::size_t>(g)])
                changed = result_used[static_cast<std::size_t>(g)] = true;
            } else if (ins.kind == Instr::Kind::Return && ins.expr && result_used[f]) {
              std::set<int> vs;
              vars_of(*ins.expr, vs, pointers_);
              for (int v : vs) changed |= relevant_[f].insert(v).second;
            } else if (ins.kind == Instr::Kind::Assign && is_var(ins.lhs) &&
                       relevant_[f].count(ins.lhs->var)) {
              std::set<int> vs;
              vars_of(*ins.expr, vs, pointers_);
              for (int v : vs) changed |= relevant_[f].insert(v).second;
            }
          }
    }
    if (pointers_)
      for (std::size_t f = 0; f < cfgs_.size(); ++f)
        for (std::size_t v = 0; v < cfgs_[f].vars.size(); ++v)
          relevant_[f].insert(static_cast<int>(v));
  }

  void push_frame(int fn, const std::vector<std::int64_t>& args, const Expr* dest) {
    const Cfg& cfg = cfgs_[static_cast<std::size_t>(fn)];
    Frame fr{fn, cfg.entry, 0, next_addr_, dest};
    next_addr_ += static_cast<std::int64_t>(cfg.vars.size()) + 1;
    for (std::size_t i = 0; i < cfg.vars.size(); ++i)
      heap_[fr.base + static_cast<std::int64_t>(i)] = i < args.size() ? args[i] : 0;
    frames_.push_back(fr);
  }

  void pop_frame(std::optional<std::int64_t> value) {
    Frame fr = frames_.back();
    const Cfg& cfg = cfgs_[static_cast<std::size_t>(fr.fn)];
    for (std::size_t i = 0; i < cfg.vars.size(); ++i)
      heap_.erase(fr.base + static_cast<std::int64_t>(i));
    frames_.pop_back();
    if (!frames_.empty() && fr.dest) write(*fr.dest, value.value_or(0));
    if (!frames_.empty()) ++frames_.back().idx;
  }

  std::int64_t& cell(std::int64_t addr) {
    auto it = heap_.find(addr);
    if (it == heap_.end()) throw RuntimeFault();
    return it->second;
  }

  static std::int64_t checked(__int128 v) {
    if (v > INT64_MAX || v < INT64_MIN) throw RuntimeFault();
    return static_cast<std::int64_t>(v);
  }

  std::int64_t eval(const Expr& e) {
    const Frame& fr = frames_.back();
    switch (e.kind) {
      case Expr::Kind::IntLit: return e.value;
      case Expr::Kind::SizeOf: return 1;
      case Expr::Kind::Var: return cell(fr.base + e.var);
      case Expr::Kind::Unary:
        switch (e.unop) {
          case UnOp::Neg: return checked(-static_cast<__int128>(eval(*e.kids[0])));
          case UnOp::Not: return eval(*e.kids[0]) == 0;
          case UnOp::Deref: return cell(eval(*e.kids[0]));
          case UnOp::AddrOf: return fr.base + e.kids[0]->var;
        }
        break;
      case Expr::Kind::Binary: {
        __int128 a = eval(*e.kids[0]);
        if (e.binop == BinOp::And) return a != 0 && eval(*e.kids[1]) != 0;
        if (e.binop == BinOp::Or) return a != 0 || eval(*e.kids[1]) != 0;
        __int128 b = eval(*e.kids[1]);
        switch (e.binop) {
          case BinOp::Add: return checked(a + b);
          case BinOp::Sub: return checked(a - b);
          case BinOp::Mul: return checked(a * b);
          case BinOp::Div:
            if (b == 0) throw RuntimeFault();
            return checked(a / b);
          case BinOp::Lt: return a < b;
          case BinOp::Le: return a <= b;
          case BinOp::Gt: return a > b;
          case BinOp::Ge: return a >= b;
          case BinOp::Eq: return a == b;
          case BinOp::Ne: return a != b;
          default: break;
        }
        break;
      }
      case Expr::Kind::Call: break;
    }
    throw std::logic_error("unexpected expression in lowered code");
  }

  void write(const Expr& lhs, std::int64_t v) {
    const Frame& fr = frames_.back();
    if (lhs.kind == Expr::Kind::Var) cell(fr.base + lhs.var) = v;
    else cell(eval(*lhs.kids[0])) = v;
  }

  bool holds(const Instr& ins) { return (eval(*ins.expr) != 0) == ins.polarity; }

  // Records the projected state at a loop head; false when seen before.
  bool remember() {
    std::vector<std::int64_t> key;
    for (const auto& fr : frames_) {
      key.insert(key.end(), {fr.fn, fr.block, static_cast<std::int64_t>(fr.idx), fr.base});
      for (int v : relevant_[static_cast<std::size_t>(fr.fn)])
        key.push_back(heap_.at(fr.base + v));
    }
    if (pointers_) {
      key.push_back(next_addr_);
      for (const auto& [a, v] : heap_) key.insert(key.end(), {a, v});
    }
    return seen_.insert(std::move(key)).second;
  }

  bool enter(int block) {
    Frame& fr = frames_.back();
    fr.block = block;
    fr.idx = 0;
    if (cfgs_[static_cast<std::size_t>(fr.fn)].loop_heads.count(block)) return remember();
    return true;
  }

  // One instruction or block transition. False on a repeated state.
  bool step() {
    Frame& fr = frames_.back();
    const Cfg& cfg = cfgs_[static_cast<std::size_t>(fr.fn)];
    const BasicBlock& b = cfg.blocks[static_cast<std::size_t>(fr.block)];
    if (fr.idx >= b.instrs.size()) {
      if (b.succs.empty()) {
        pop_frame(std::nullopt);
        return true;
      }
      for (int eid : b.succs) {
        int dst = cfg.edges[static_cast<std::size_t>(eid)].dst;
        const auto& d = cfg.blocks[static_cast<std::size_t>(dst)];
        if (!d.instrs.empty() && d.instrs[0].kind == Instr::Kind::Assume && !holds(d.instrs[0]))
          continue;
        return enter(dst);
      }
      throw RuntimeFault();  // no feasible successor
    }
    const Instr& ins = b.instrs[fr.idx];
    switch (ins.kind) {
      case Instr::Kind::Assign:
        write(*ins.lhs, eval(*ins.expr));
        break;
      case Instr::Kind::Assume:
        if (!holds(ins)) throw RuntimeFault();
        break;
      case Instr::Kind::Alloc: {
        std::int64_t addr = next_addr_;
        next_addr_ += 1 + std::max<std::int64_t>(0, ins.expr ? eval(*ins.expr) : 1);
        heap_[addr] = 0;
        if (ins.lhs) write(*ins.lhs, addr);
        break;
      }
      case Instr::Kind::Free: {
        std::int64_t addr = eval(*ins.expr);
        if (addr != 0 && !heap_.erase(addr)) throw RuntimeFault();
        break;
      }
      case Instr::Kind::Return:
        pop_frame(ins.expr ? std::optional<std::int64_t>(eval(*ins.expr)) : std::nullopt);
        return true;
      case Instr::Kind::Call: {
        std::vector<std::int64_t> args;
        for (const auto& a : ins.args) args.push_back(eval(*a));
        int callee = program_.index_of(ins.callee);
        if (callee >= 0) {
          if (frames_.size() > 100000) throw RuntimeFault();
          push_frame(callee, args, ins.lhs.get());
          return enter(cfgs_[static_cast<std::size_t>(callee)].entry);
        }
        if (ins.lhs) write(*ins.lhs, 0);
        break;
      }
    }
    ++fr.idx;
    return true;
  }
};

}  // namespace

ConcreteResult concrete_run(const Program& program, const std::string& entry,
                            const std::map<std::string, std::int64_t>& env, long budget) {
  return Machine(program).run(entry, env, budget);
}

}  // namespace diverge
