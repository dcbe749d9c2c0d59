// cfg.cpp - lowering of MiniC functions into control-flow graphs

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

#include "diverge/cfg.hpp"
#include "diverge/frontend.hpp"

namespace diverge {

namespace {

class Lowering {
 public:
  explicit Lowering(const FunctionDef& f) : fn_(f) {
    cfg_.function = f.name;
    scopes_.emplace_back();
    for (const auto& p : f.params) {
      scopes_.back()[p.name] = static_cast<int>(cfg_.vars.size());
      cfg_.vars.push_back({p.name, p.type, true, false});
    }
  }

  Cfg run() {
    cfg_.entry = new_block(fn_.loc);
    cur_ = cfg_.entry;
    lower_stmt(*fn_.body);
    if (cur_ >= 0) {
      Instr ret;
      ret.kind = Instr::Kind::Return;
      ret.loc = SourceLoc{fn_.loc.file, fn_.end_line, 1};
      emit(std::move(ret));
    }
    return std::move(cfg_);
  }

 private:
  const FunctionDef& fn_;
  Cfg cfg_;
  int cur_ = -1;
  std::vector<std::map<std::string, int>> scopes_;
  std::map<std::string, int> label_blocks_;
  struct LoopTargets {
    int continue_to;
    int break_to;
  };
  std::vector<LoopTargets> loops_;

  int new_block(SourceLoc loc) {
    BasicBlock b;
    b.id = static_cast<int>(cfg_.blocks.size());
    b.loc = loc;
    cfg_.blocks.push_back(std::move(b));
    return cfg_.blocks.back().id;
  }

  void add_edge(int src, int dst, GuardKind guard = GuardKind::Plain, bool from_goto = false) {
    Edge e;
    e.src = src;
    e.dst = dst;
    e.guard = guard;
    e.from_goto = from_goto;
    int id = static_cast<int>(cfg_.edges.size());
    cfg_.edges.push_back(e);
    cfg_.blocks[static_cast<size_t>(src)].succs.push_back(id);
    cfg_.blocks[static_cast<size_t>(dst)].preds.push_back(id);
  }

  void ensure_block(SourceLoc loc) {
    if (cur_ < 0) cur_ = new_block(loc);
  }

  void emit(Instr ins) {
    ensure_block(ins.loc);
    cfg_.blocks[static_cast<size_t>(cur_)].instrs.push_back(std::move(ins));
  }

  void jump(int dst, bool from_goto = false) {
    if (cur_ >= 0) add_edge(cur_, dst, GuardKind::Plain, from_goto);
    cur_ = -1;
  }

  int resolve(const std::string& name, SourceLoc loc) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    throw ParseError("undeclared variable '" + name + "'", loc);
  }

  int declare(const std::string& name, MiniType type, bool temp = false) {
    int id = static_cast<int>(cfg_.vars.size());
    cfg_.vars.push_back({name, type, false, temp});
    if (!temp) scopes_.back()[name] = id;
    return id;
  }

  ExprPtr temp_var(SourceLoc loc) {
    std::string name = "$t" + std::to_string(cfg_.vars.size());
    int id = declare(name, MiniType{}, true);
    return Expr::variable(name, loc, id);
  }

  int label_block(const std::string& label, SourceLoc loc) {
    auto it = label_blocks_.find(label);
    if (it != label_blocks_.end()) return it->second;
    int b = new_block(loc);
    label_blocks_[label] = b;
    return b;
  }

  // Emits the instruction for a call and returns it without a destination.
  bool lower_call_into(const Expr& call, ExprPtr dest) {
    std::vector<ExprPtr> args;
    for (const auto& a : call.kids) args.push_back(lower_value(*a));
    Instr ins;
    ins.loc = call.loc;
    ins.lhs = std::move(dest);
    if (call.name == "malloc") {
      ins.kind = Instr::Kind::Alloc;
      if (!args.empty()) ins.expr = args[0];
    } else if (call.name == "free") {
      if (args.size() != 1) throw ParseError("free expects one argument", call.loc);
      ins.kind = Instr::Kind::Free;
      ins.expr = args[0];
      if (ins.lhs) {
        Instr zero;
        zero.kind = Instr::Kind::Assign;
        zero.lhs = ins.lhs;
        zero.expr = Expr::int_lit(0, call.loc);
        zero.loc = call.loc;
        ins.lhs = nullptr;
        emit(std::move(ins));
        emit(std::move(zero));
        return true;
      }
    } else {
      ins.kind = Instr::Kind::Call;
      ins.callee = call.name;
      ins.args = std::move(args);
    }
    emit(std::move(ins));
    return true;
  }

  ExprPtr lower_lvalue(const Expr& e) {
    if (e.kind == Expr::Kind::Var) return Expr::variable(e.name, e.loc, resolve(e.name, e.loc));
    return Expr::unary(UnOp::Deref, lower_value(*e.kids[0]), e.loc);
  }

  // Lowers `e` to a pure expression, emitting hoisted calls and branches.
  ExprPtr lower_value(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        return Expr::int_lit(e.value, e.loc);
      case Expr::Kind::SizeOf:
        return Expr::int_lit(1, e.loc);
      case Expr::Kind::Var:
        return Expr::variable(e.name, e.loc, resolve(e.name, e.loc));
      case Expr::Kind::Call: {
        auto t = temp_var(e.loc);
        lower_call_into(e, t);
        return t;
      }
      case Expr::Kind::Unary:
        if (e.unop == UnOp::Not) return lower_boolean(e);
        if (e.unop == UnOp::AddrOf)
          return Expr::unary(UnOp::AddrOf, lower_value(*e.kids[0]), e.loc);
        return Expr::unary(e.unop, lower_value(*e.kids[0]), e.loc);
      case Expr::Kind::Binary:
        if (is_comparison(e.binop) || is_logical(e.binop)) return lower_boolean(e);
        {
          auto l = lower_value(*e.kids[0]);
          auto r = lower_value(*e.kids[1]);
          return Expr::binary(e.binop, l, r, e.loc);
        }
    }
    return Expr::int_lit(0, e.loc);
  }

  // A condition used as a value: branch into a 0/1 temporary.
  ExprPtr lower_boolean(const Expr& e) {
    auto t = temp_var(e.loc);
    int yes = new_block(e.loc), no = new_block(e.loc), join = new_block(e.loc);
    lower_cond(e, yes, no);
    for (auto [block, value] : {std::pair{yes, 1}, std::pair{no, 0}}) {
      cur_ = block;
      Instr set;
      set.kind = Instr::Kind::Assign;
      set.lhs = t;
      set.expr = Expr::int_lit(value, e.loc);
      set.loc = e.loc;
      emit(std::move(set));
      jump(join);
    }
    cur_ = join;
    return t;
  }

  void lower_cond(const Expr& e, int on_true, int on_false) {
    if (e.kind == Expr::Kind::Unary && e.unop == UnOp::Not) {
      lower_cond(*e.kids[0], on_false, on_true);
      return;
    }
    if (e.kind == Expr::Kind::Binary && is_logical(e.binop)) {
      int mid = new_block(e.kids[1]->loc);
      if (e.binop == BinOp::And)
        lower_cond(*e.kids[0], mid, on_false);
      else
        lower_cond(*e.kids[0], on_true, mid);
      cur_ = mid;
      lower_cond(*e.kids[1], on_true, on_false);
      return;
    }
    ExprPtr atom;
    if (e.kind == Expr::Kind::Binary && is_comparison(e.binop)) {
      auto l = lower_value(*e.kids[0]);
      auto r = lower_value(*e.kids[1]);
      atom = Expr::binary(e.binop, l, r, e.loc);
    } else {
      atom = Expr::binary(BinOp::Ne, lower_value(e), Expr::int_lit(0, e.loc), e.loc);
    }
    ensure_block(e.loc);
    int branch = cur_;
    for (bool polarity : {true, false}) {
      int a = new_block(e.loc);
      Instr assume;
      assume.kind = Instr::Kind::Assume;
      assume.expr = atom;
      assume.polarity = polarity;
      assume.loc = e.loc;
      cfg_.blocks[static_cast<size_t>(a)].instrs.push_back(std::move(assume));
      add_edge(branch, a, polarity ? GuardKind::True : GuardKind::False);
      add_edge(a, polarity ? on_true : on_false);
    }
    cur_ = -1;
  }

  void assign(ExprPtr lhs, const Expr& rhs, SourceLoc loc) {
    if (rhs.kind == Expr::Kind::Call) {
      lower_call_into(rhs, std::move(lhs));
      return;
    }
    Instr ins;
    ins.kind = Instr::Kind::Assign;
    ins.lhs = std::move(lhs);
    ins.expr = lower_value(rhs);
    ins.loc = loc;
    emit(std::move(ins));
  }

  void lower_stmt(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Block:
        scopes_.emplace_back();
        for (const auto& c : s.body) lower_stmt(*c);
        scopes_.pop_back();
        return;
      case Stmt::Kind::Decl:
        for (const auto& d : s.decls) {
          if (d.init) {
            // The initializer sees the enclosing binding of a shadowed name.
            if (d.init->kind == Expr::Kind::Call) {
              int id = declare(d.name, d.type);
              assign(Expr::variable(d.name, d.loc, id), *d.init, d.loc);
            } else {
              auto value = lower_value(*d.init);
              int id = declare(d.name, d.type);
              Instr ins;
              ins.kind = Instr::Kind::Assign;
              ins.lhs = Expr::variable(d.name, d.loc, id);
              ins.expr = value;
              ins.loc = d.loc;
              emit(std::move(ins));
            }
          } else {
            declare(d.name, d.type);
          }
        }
        return;
      case Stmt::Kind::Assign:
        assign(lower_lvalue(*s.lhs), *s.expr, s.loc);
        return;
      case Stmt::Kind::ExprStmt:
        if (s.expr->kind == Expr::Kind::Call)
          lower_call_into(*s.expr, nullptr);
        else
          lower_value(*s.expr);
        return;
      case Stmt::Kind::If: {
        int then_b = new_block(s.then_branch->loc);
        int join = new_block(s.loc);
        int else_b = s.else_branch ? new_block(s.else_branch->loc) : join;
        lower_cond(*s.expr, then_b, else_b);
        cur_ = then_b;
        lower_stmt(*s.then_branch);
        jump(join);
        if (s.else_branch) {
          cur_ = else_b;
          lower_stmt(*s.else_branch);
          jump(join);
        }
        cur_ = join;
        return;
      }
      case Stmt::Kind::While: {
        int head = new_block(s.loc);
        jump(head);
        int body = new_block(s.then_branch->loc);
        int exit = new_block(s.loc);
        int step = s.step ? new_block(s.step->loc) : head;
        cur_ = head;
        lower_cond(*s.expr, body, exit);
        loops_.push_back({step, exit});
        cur_ = body;
        lower_stmt(*s.then_branch);
        jump(step);
        loops_.pop_back();
        if (s.step) {
          cur_ = step;
          lower_stmt(*s.step);
          jump(head);
        }
        cur_ = exit;
        return;
      }
      case Stmt::Kind::Goto:
        ensure_block(s.loc);
        jump(label_block(s.label, s.loc), true);
        return;
      case Stmt::Kind::Label: {
        int b = label_block(s.label, s.loc);
        cfg_.blocks[static_cast<size_t>(b)].loc = s.loc;
        jump(b);
        cur_ = b;
        lower_stmt(*s.then_branch);
        return;
      }
      case Stmt::Kind::Break:
        ensure_block(s.loc);
        jump(loops_.back().break_to);
        return;
      case Stmt::Kind::Continue:
        ensure_block(s.loc);
        jump(loops_.back().continue_to);
        return;
      case Stmt::Kind::Return: {
        Instr ret;
        ret.kind = Instr::Kind::Return;
        ret.loc = s.loc;
        if (s.expr) ret.expr = lower_value(*s.expr);
        emit(std::move(ret));
        cur_ = -1;
        return;
      }
      case Stmt::Kind::Empty:
        return;
    }
  }
};

// Drops blocks unreachable from the entry and renumbers the rest in
// creation order.
Cfg prune(Cfg in) {
  std::vector<bool> seen(in.blocks.size(), false);
  std::vector<int> stack{in.entry};
  seen[static_cast<size_t>(in.entry)] = true;
  while (!stack.empty()) {
    int b = stack.back();
    stack.pop_back();
    for (int e : in.blocks[static_cast<size_t>(b)].succs) {
      int d = in.edges[static_cast<size_t>(e)].dst;
      if (!seen[static_cast<size_t>(d)]) {
        seen[static_cast<size_t>(d)] = true;
        stack.push_back(d);
      }
    }
  }
  std::vector<int> remap(in.blocks.size(), -1);
  Cfg out;
  out.function = in.function;
  out.vars = std::move(in.vars);
  for (size_t i = 0; i < in.blocks.size(); ++i) {
    if (!seen[i]) continue;
    remap[i] = static_cast<int>(out.blocks.size());
    BasicBlock b = std::move(in.blocks[i]);
    b.id = remap[i];
    b.succs.clear();
    b.preds.clear();
    out.blocks.push_back(std::move(b));
  }
  // Edges are re-added following each old block's successor order.
  std::vector<std::vector<int>> old_succs(in.blocks.size());
  for (size_t e = 0; e < in.edges.size(); ++e)
    old_succs[static_cast<size_t>(in.edges[e].src)].push_back(static_cast<int>(e));
  for (size_t i = 0; i < in.blocks.size(); ++i) {
    if (!seen[i]) continue;
    for (int e : old_succs[i]) {
      Edge edge = in.edges[static_cast<size_t>(e)];
      edge.src = remap[static_cast<size_t>(edge.src)];
      edge.dst = remap[static_cast<size_t>(edge.dst)];
      int id = static_cast<int>(out.edges.size());
      out.edges.push_back(edge);
      out.blocks[static_cast<size_t>(edge.src)].succs.push_back(id);
      out.blocks[static_cast<size_t>(edge.dst)].preds.push_back(id);
    }
  }
  out.entry = remap[static_cast<size_t>(in.entry)];
  return out;
}

void find_back_edges(Cfg& cfg) {
  enum : char { White, OnStack, Done };
  std::vector<char> color(cfg.blocks.size(), White);
  // Iterative DFS: (block, next successor index).
  std::vector<std::pair<int, size_t>> stack;
  stack.push_back({cfg.entry, 0});
  color[static_cast<size_t>(cfg.entry)] = OnStack;
  while (!stack.empty()) {
    auto& [b, next] = stack.back();
    const auto& succs = cfg.blocks[static_cast<size_t>(b)].succs;
    if (next == succs.size()) {
      color[static_cast<size_t>(b)] = Done;
      stack.pop_back();
      continue;
    }
    int e = succs[next++];
    int d = cfg.edges[static_cast<size_t>(e)].dst;
    if (color[static_cast<size_t>(d)] == OnStack) {
      cfg.edges[static_cast<size_t>(e)].back = true;
      cfg.back_edges.insert(e);
      cfg.loop_heads.insert(d);
    } else if (color[static_cast<size_t>(d)] == White) {
      color[static_cast<size_t>(d)] = OnStack;
      stack.push_back({d, 0});
    }
  }
}

// The Assume blocks a branch block leads to, in (true, false) order.
std::optional<std::pair<int, int>> branch_targets(const Cfg& cfg, const BasicBlock& b) {
  if (b.succs.size() != 2) return std::nullopt;
  const Edge& t = cfg.edges[static_cast<size_t>(b.succs[0])];
  const Edge& f = cfg.edges[static_cast<size_t>(b.succs[1])];
  if (t.guard != GuardKind::True || f.guard != GuardKind::False) return std::nullopt;
  return std::pair{t.dst, f.dst};
}

void mark_loop_guards(Cfg& cfg) {
  std::vector<std::pair<size_t, int>> by_size;
  for (int h : cfg.loop_heads) by_size.push_back({cfg.loop_body(h).size(), h});
  // Outer loops first so that inner loops win the guard_head assignment.
  std::sort(by_size.begin(), by_size.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (const auto& [size, h] : by_size) {
    auto body = cfg.loop_body(h);
    for (int bid : body) {
      auto targets = branch_targets(cfg, cfg.blocks[static_cast<size_t>(bid)]);
      if (!targets) continue;
      bool t_in = body.count(targets->first) > 0;
      bool f_in = body.count(targets->second) > 0;
      if (t_in == f_in) continue;
      for (int a : {targets->first, targets->second}) {
        auto& instr = cfg.blocks[static_cast<size_t>(a)].instrs.front();
        instr.is_loop_guard = true;
        instr.guard_head = h;
      }
    }
  }
}

}  // namespace

std::set<int> Cfg::loop_body(int head) const {
  std::set<int> body{head};
  std::vector<int> work;
  for (int e : blocks[static_cast<size_t>(head)].preds) {
    const Edge& edge = edges[static_cast<size_t>(e)];
    if (edge.back && body.insert(edge.src).second) work.push_back(edge.src);
  }
  while (!work.empty()) {
    int b = work.back();
    work.pop_back();
    for (int e : blocks[static_cast<size_t>(b)].preds) {
      int p = edges[static_cast<size_t>(e)].src;
      if (body.insert(p).second) work.push_back(p);
    }
  }
  return body;
}

std::vector<GuardAtom> Cfg::control_atoms(int head) const {
  std::vector<GuardAtom> out;
  for (int bid : loop_body(head)) {
    for (const auto& ins : blocks[static_cast<size_t>(bid)].instrs) {
      if (ins.kind != Instr::Kind::Assume) continue;
      bool dup = std::any_of(out.begin(), out.end(), [&](const GuardAtom& g) {
        return same_shape(*g.atom, *ins.expr) && g.loc == ins.loc;
      });
      if (!dup) out.push_back({ins.expr, true, ins.loc});
    }
  }
  return out;
}

namespace {

void slots_read(const Expr& e, std::set<int>& out) {
  if (e.kind == Expr::Kind::Var) out.insert(e.var);
  for (const auto& k : e.kids)
    if (k) slots_read(*k, out);
}

}  // namespace

std::vector<int> Cfg::loop_tracked_slots(int head) const {
  auto body = loop_body(head);
  std::set<int> tracked;
  std::vector<const Instr*> assigns;
  for (int bid : body) {
    for (const auto& ins : blocks[static_cast<size_t>(bid)].instrs) {
      bool local_assign = (ins.kind == Instr::Kind::Assign || ins.kind == Instr::Kind::Alloc) &&
                          ins.lhs && ins.lhs->kind == Expr::Kind::Var;
      if (local_assign) {
        assigns.push_back(&ins);
        continue;
      }
      if (ins.lhs && ins.lhs->kind != Expr::Kind::Var) slots_read(*ins.lhs, tracked);
      if (ins.kind == Instr::Kind::Assign || ins.kind == Instr::Kind::Assume ||
          ins.kind == Instr::Kind::Free)
        slots_read(*ins.expr, tracked);
      for (const auto& a : ins.args) slots_read(*a, tracked);
    }
  }
  bool grew = true;
  while (grew) {
    grew = false;
    for (const Instr* ins : assigns) {
      if (!tracked.count(ins->lhs->var) || !ins->expr) continue;
      std::set<int> read;
      slots_read(*ins->expr, read);
      for (int v : read) grew |= tracked.insert(v).second;
    }
  }
  return {tracked.begin(), tracked.end()};
}

int Cfg::param_count() const {
  int n = 0;
  for (const auto& v : vars) n += v.is_param;
  return n;
}

Cfg build_cfg(const FunctionDef& f) {
  Cfg cfg = prune(Lowering(f).run());
  find_back_edges(cfg);
  mark_loop_guards(cfg);
  return cfg;
}

std::vector<GuardAtom> loop_guard_atoms(const Cfg& cfg, int head) {
  std::vector<GuardAtom> out;
  auto body = cfg.loop_body(head);
  for (int bid : body) {
    const auto& block = cfg.blocks[static_cast<size_t>(bid)];
    auto targets = branch_targets(cfg, block);
    if (!targets) continue;
    bool t_in = body.count(targets->first) > 0;
    bool f_in = body.count(targets->second) > 0;
    if (t_in == f_in) continue;
    const Instr& stay = cfg.blocks[static_cast<size_t>(t_in ? targets->first : targets->second)]
                            .instrs.front();
    out.push_back({stay.expr, stay.polarity, stay.loc});
  }
  return out;
}

std::string print_cfg(const Cfg& cfg) {
  std::ostringstream os;
  os << "cfg " << cfg.function << " entry=" << cfg.entry << '\n';
  for (const auto& b : cfg.blocks) {
    os << "  B" << b.id << (cfg.loop_heads.count(b.id) ? " [head]" : "") << " line "
       << b.loc.line << '\n';
    for (const auto& ins : b.instrs) {
      os << "    ";
      switch (ins.kind) {
        case Instr::Kind::Assign:
          os << print_expr(*ins.lhs) << " := " << print_expr(*ins.expr);
          break;
        case Instr::Kind::Assume:
          os << "assume " << (ins.polarity ? "" : "!") << '(' << print_expr(*ins.expr) << ')'
             << (ins.is_loop_guard ? " [guard]" : "");
          break;
        case Instr::Kind::Call:
          if (ins.lhs) os << print_expr(*ins.lhs) << " := ";
          os << "call " << ins.callee << '(';
          for (size_t i = 0; i < ins.args.size(); ++i)
            os << (i ? ", " : "") << print_expr(*ins.args[i]);
          os << ')';
          break;
        case Instr::Kind::Alloc:
          os << (ins.lhs ? print_expr(*ins.lhs) + " := " : "") << "alloc";
          break;
        case Instr::Kind::Free:
          os << "free " << print_expr(*ins.expr);
          break;
        case Instr::Kind::Return:
          os << "return" << (ins.expr ? " " + print_expr(*ins.expr) : "");
          break;
      }
      os << '\n';
    }
    for (int e : b.succs) {
      const Edge& edge = cfg.edges[static_cast<size_t>(e)];
      os << "    -> B" << edge.dst << (edge.back ? " (back)" : "")
         << (edge.from_goto ? " (goto)" : "") << '\n';
    }
  }
  return os.str();
}

}  // namespace diverge
