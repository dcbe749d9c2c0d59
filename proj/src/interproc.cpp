// interproc.cpp - on-demand scheduling, summary database and recursion cycles

#include "diverge/interproc.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>
#include <thread>

#include "diverge/report.hpp"

namespace diverge {

// ---------------------------------------------------------------------------
// SummaryDb and ActiveSet

const Summary* SummaryDb::find(const std::string& name) const {
  auto it = summaries_.find(name);
  return it == summaries_.end() ? nullptr : &it->second;
}

const Summary* SummaryDb::put(Summary s) {
  std::string name = s.procedure;
  auto [it, inserted] = summaries_.emplace(std::move(name), std::move(s));
  (void)inserted;
  return &it->second;
}

void SummaryDb::merge(const SummaryDb& other) {
  for (const auto& [name, s] : other.summaries_) summaries_.emplace(name, s);
}

bool ActiveSet::contains(const std::string& name) const {
  return std::find(stack_.begin(), stack_.end(), name) != stack_.end();
}

void ActiveSet::push(const std::string& name) {
  if (!contains(name)) stack_.push_back(name);
}

void ActiveSet::pop(const std::string& name) {
  auto it = std::find(stack_.begin(), stack_.end(), name);
  if (it != stack_.end()) stack_.erase(it);
}

// ---------------------------------------------------------------------------
// Call graph

namespace {

void collect_calls(const Expr& e, std::vector<std::string>& out) {
  if (e.kind == Expr::Kind::Call) out.push_back(e.name);
  for (const auto& k : e.kids)
    if (k) collect_calls(*k, out);
}

void collect_calls(const Stmt& s, std::vector<std::string>& out) {
  for (const auto& b : s.body)
    if (b) collect_calls(*b, out);
  for (const auto& d : s.decls)
    if (d.init) collect_calls(*d.init, out);
  if (s.lhs) collect_calls(*s.lhs, out);
  if (s.expr) collect_calls(*s.expr, out);
  if (s.then_branch) collect_calls(*s.then_branch, out);
  if (s.else_branch) collect_calls(*s.else_branch, out);
  if (s.step) collect_calls(*s.step, out);
}

std::vector<std::string> calls_of(const FunctionDef& f) {
  std::vector<std::string> calls;
  if (f.body) collect_calls(*f.body, calls);
  return calls;
}

}  // namespace

std::map<std::string, std::vector<std::string>> call_graph(const Program& program) {
  std::map<std::string, std::vector<std::string>> g;
  for (const auto& f : program.functions) {
    std::vector<std::string> succ;
    for (auto& c : calls_of(f))
      if (program.find(c) && std::find(succ.begin(), succ.end(), c) == succ.end())
        succ.push_back(c);
    g[f.name] = std::move(succ);
  }
  return g;
}

namespace {

// Strongly connected components in reverse topological order (callees
// before callers), each listed in declaration order.
std::vector<std::vector<std::string>> sccs(const Program& program) {
  auto g = call_graph(program);
  std::map<std::string, int> index, low;
  std::set<std::string> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> out;
  int counter = 0;

  std::function<void(const std::string&)> visit = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const auto& w : g[v]) {
      if (!index.count(w)) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.count(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> comp;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end(), [&](const std::string& a, const std::string& b) {
        return program.index_of(a) < program.index_of(b);
      });
      out.push_back(std::move(comp));
    }
  };
  for (const auto& f : program.functions)
    if (!index.count(f.name)) visit(f.name);
  return out;
}

}  // namespace

std::vector<std::string> schedule_order(const Program& program) {
  std::vector<std::string> order;
  for (const auto& comp : sccs(program)) order.push_back(comp.front());
  // Members other than the entry are reached from it; list them afterwards
  // so that every procedure appears.
  for (const auto& comp : sccs(program))
    for (std::size_t i = 1; i < comp.size(); ++i) order.push_back(comp[i]);
  return order;
}

// ---------------------------------------------------------------------------
// Validation

void validate_calls(const Program& program, const ModelTable& models) {
  for (const auto& f : program.functions) {
    for (const auto& c : calls_of(f)) {
      if (is_builtin(c) || program.find(c) || models.kind_of(c)) continue;
      throw ValidationError("call to undefined function '" + c + "' in '" + f.name +
                            "' (define it or give it a model)");
    }
  }
}

// ---------------------------------------------------------------------------
// Scheduler

Scheduler::Scheduler(const Program& program, const AnalysisConfig& config, SummaryDb& db)
    : program_(program), config_(config), db_(db) {}

const Cfg& Scheduler::cfg_of(const std::string& name) {
  auto it = cfgs_.find(name);
  if (it != cfgs_.end()) return it->second;
  const FunctionDef* f = program_.find(name);
  return cfgs_.emplace(name, build_cfg(*f)).first->second;
}

SummaryResult Scheduler::request_summary(const std::string& name) {
  if (const Summary* s = db_.find(name)) return {SummaryResult::Kind::Found, s};
  const FunctionDef* f = program_.find(name);
  if (!f) return {SummaryResult::Kind::UnknownProcedure, nullptr};
  if (active_.contains(name)) return {SummaryResult::Kind::MutualRecursion, nullptr};
  active_.push(name);
  Summary s = analyze(*f);
  active_.pop(name);
  return {SummaryResult::Kind::Found, db_.put(std::move(s))};
}

Summary Scheduler::analyze(const FunctionDef& f) {
  ExecContext ctx;
  ctx.function = &f;
  ctx.cfg = &cfg_of(f.name);
  ctx.models = &config_.models;
  ctx.oracle = [this](const std::string& callee) { return request_summary(callee); };
  ctx.config = config_.widen;
  auto file = static_cast<std::size_t>(f.loc.file);
  ctx.file = file < program_.source_files.size() ? program_.source_files[file].path : "";
  Summary s = analyze_procedure(f, *ctx.cfg, ctx);
  s.procedure = f.name;
  s.k = config_.widen.k;
  return s;
}

SummaryResult request_summary(const std::string& name, Scheduler& scheduler) {
  return scheduler.request_summary(name);
}

// ---------------------------------------------------------------------------
// Recursion

AbstractState on_mutual_recursion(AbstractState st, const std::string& current,
                                  const std::string& callee, const std::vector<Term>& args,
                                  SourceLoc loc) {
  st.rec_calls.push_back(RecursiveCallRecord{callee, args, {current}, loc});
  return st;
}

namespace {

// Maps entry values of the current procedure to their values at the
// recursive call: parameters to the call's arguments, footprint contents
// to what the callee would read through the translated addresses.
class CycleMap {
 public:
  CycleMap(const AbstractState& st, AbstractState& scratch) : st_(st), scratch_(scratch) {}

  std::map<SymValue, Term> sigma;

  std::optional<Term> var(SymValue v, int depth = 0) {
    if (auto it = sigma.find(v); it != sigma.end()) return scratch_.pc.normalize(it->second);
    if (depth > 32) return std::nullopt;
    if (auto it = st_.pc.definitions().find(v); it != st_.pc.definitions().end())
      return term(it->second, depth + 1);
    if (auto def = st_.pc.opaque_definition(v)) {
      std::vector<Term> args;
      for (const auto& a : def->args) {
        auto t = term(st_.pc.normalize(a), depth + 1);
        if (!t) return std::nullopt;
        args.push_back(*t);
      }
      auto [r, pc] = scratch_.pc.intern(def->op, std::move(args), [&] { return scratch_.fresh(); });
      scratch_.pc = std::move(pc);
      return Term::var(r);
    }
    return std::nullopt;
  }

  std::optional<Term> term(const Term& t, int depth = 0) {
    Term out = Term::constant(t.constant_part());
    for (const auto& [v, c] : t.coeffs()) {
      auto tv = var(v, depth);
      if (!tv) return std::nullopt;
      out = out + tv->scaled(c);
    }
    return out;
  }

 private:
  const AbstractState& st_;
  AbstractState& scratch_;
};

}  // namespace

std::optional<Issue> close_cycle(const std::string& current_proc, const AbstractState& st,
                                 const RecursiveCallRecord& record, const ExecContext& ctx) {
  if (record.callee != current_proc) return std::nullopt;
  if (record.args.size() != st.params.size()) return std::nullopt;
  try {
    AbstractState scratch = st;
    CycleMap map(st, scratch);
    std::set<SymValue> pre(st.params.begin(), st.params.end());
    for (const auto& [a, c] : st.footprint) pre.insert(c);
    for (std::size_t i = 0; i < st.params.size(); ++i) map.sigma[st.params[i]] = record.args[i];

    // Footprint contents: read the translated address in the current heap.
    std::vector<std::pair<SymValue, SymValue>> pending(st.footprint.begin(), st.footprint.end());
    bool progress = true;
    while (!pending.empty() && progress) {
      progress = false;
      for (auto it = pending.begin(); it != pending.end();) {
        auto addr = map.var(it->first);
        if (!addr) {
          ++it;
          continue;
        }
        auto key = address_key(scratch, *addr);
        if (!key || scratch.heap.freed.count(*key)) return std::nullopt;
        auto [cell, next] = load(std::move(scratch), *key);
        scratch = std::move(next);
        map.sigma[it->second] = Term::var(cell);
        it = pending.erase(it);
        progress = true;
      }
    }
    if (!pending.empty()) return std::nullopt;

    bool changed = false;
    for (auto v : pre) {
      auto t = map.var(v);
      if (!t || *t != scratch.pc.normalize(v)) changed = true;
    }
    if (changed) {
      for (const auto& a : st.pc.constraints()) {
        bool touches_pre = false, touches_other = false;
        for (auto v : a.vars()) (pre.count(v) ? touches_pre : touches_other) = true;
        if (a.rel == Rel::Eq) {
          // Definitions of values computed inside the procedure say nothing
          // about its inputs.
          auto vs = a.vars();
          if (!vs.empty() && !pre.count(vs.back()) && st.pc.definitions().count(vs.back()))
            continue;
        }
        if (!touches_pre) continue;
        if (touches_other) return std::nullopt;
        auto translated = map.term(a.term);
        if (!translated) return std::nullopt;
        if (!entails(scratch.pc, Atom{a.rel, *translated})) return std::nullopt;
      }
    }

    Issue issue;
    issue.cycle.assign(record.chain.rbegin(), record.chain.rend());
    issue.type = issue.cycle.size() == 1 ? IssueType::InfiniteRecursion : IssueType::MutualRecursion;
    issue.procedure = current_proc;
    issue.file = ctx.file;
    issue.line = record.loc.line;
    std::vector<std::string> sorted = issue.cycle;
    std::sort(sorted.begin(), sorted.end());
    issue.origin = "rec:";
    for (std::size_t i = 0; i < sorted.size(); ++i) issue.origin += (i ? "," : "") + sorted[i];
    AbstractState closed = st;
    closed.trace = trace_push(st.trace, {record.loc.line,
                                         "recursive call to " + current_proc +
                                             " repeats the entry state",
                                         {}});
    fill_witness(issue, closed, ctx);
    std::set<std::string> calls(issue.cycle.begin(), issue.cycle.end());
    for (const auto& e : trace_entries(st.trace)) calls.insert(e.calls.begin(), e.calls.end());
    issue.trace_calls.assign(calls.begin(), calls.end());
    return issue;
  } catch (const InfeasibleState&) {
    return std::nullopt;
  } catch (const ArithmeticOverflow&) {
    return std::nullopt;
  } catch (const UseAfterFree&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Whole-program analysis

namespace {

std::vector<std::string> effective_order(const Program& program, const AnalysisConfig& config) {
  std::vector<std::string> order;
  for (const auto& n : config.order)
    if (program.find(n) && std::find(order.begin(), order.end(), n) == order.end())
      order.push_back(n);
  for (const auto& n : schedule_order(program))
    if (std::find(order.begin(), order.end(), n) == order.end()) order.push_back(n);
  return order;
}

// Weakly connected components of the call graph, as lists of procedures in
// scheduling order.
std::vector<std::vector<std::string>> components(const Program& program,
                                                 const std::vector<std::string>& order) {
  auto g = call_graph(program);
  std::map<std::string, std::string> parent;
  std::function<std::string(const std::string&)> root = [&](const std::string& x) {
    auto& p = parent[x];
    if (p.empty() || p == x) return p = x;
    return p = root(p);
  };
  for (const auto& [f, succ] : g) {
    root(f);
    for (const auto& s : succ) parent[root(s)] = root(f);
  }
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<std::string>> out;
  for (const auto& n : order) {
    auto r = root(n);
    auto [it, fresh] = index.emplace(r, out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(n);
  }
  return out;
}

void run_order(const Program& program, const AnalysisConfig& config, SummaryDb& db,
               const std::vector<std::string>& order) {
  Scheduler scheduler(program, config, db);
  for (const auto& name : order) scheduler.request_summary(name);
}

}  // namespace

AnalysisResult analyze_program(const Program& program, const AnalysisConfig& config,
                               const SummaryDb* warm) {
  AnalysisResult result;
  result.db.fingerprint = compute_fingerprint(program, config);
  if (warm && warm->fingerprint == result.db.fingerprint) result.db.merge(*warm);

  auto order = effective_order(program, config);
  if (config.jobs <= 1) {
    run_order(program, config, result.db, order);
  } else {
    auto comps = components(program, order);
    std::vector<SummaryDb> dbs(comps.size(), result.db);
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex m;
    int workers = std::min<int>(config.jobs, static_cast<int>(comps.size()));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lock(m);
            if (next >= comps.size()) return;
            i = next++;
          }
          run_order(program, config, dbs[i], comps[i]);
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& d : dbs) result.db.merge(d);
  }

  for (const auto& [name, s] : result.db.all())
    if (program.find(name))
      for (const auto& i : s.issues) result.issues.push_back(i);
  finalize_issues(result.issues, result.db, program, config);
  return result;
}

std::string compute_fingerprint(const Program& program, const AnalysisConfig& config) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  mix(kToolVersion);
  for (const auto& f : program.source_files) {
    mix(f.path);
    mix(f.text);
  }
  mix(std::to_string(config.widen.k));
  mix(std::to_string(config.widen.max_disjuncts));
  mix(std::to_string(config.widen.step_budget));
  mix(config.models.to_string());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace diverge
