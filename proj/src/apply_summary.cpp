// apply_summary.cpp - instantiating callee specs at call sites

#include <algorithm>

#include "diverge/exec.hpp"
#include "diverge/interproc.hpp"

namespace diverge {

namespace {

constexpr std::size_t kMaxChain = 16;

// Maps callee values into the caller state. Values not fixed by the
// parameters or the footprint are defined through the callee's equations
// and opaque applications, or become fresh caller values.
class Translator {
 public:
  Translator(const Spec& spec, AbstractState& caller) : spec_(spec), caller_(caller) {}

  std::map<SymValue, Term> sigma;

  bool bound(SymValue v) const { return sigma.count(v) != 0; }

  // Whether `v` is determined by values already bound.
  bool resolvable(SymValue v) const {
    if (bound(v)) return true;
    if (auto it = spec_.pc.definitions().find(v); it != spec_.pc.definitions().end()) {
      auto vs = it->second.vars();
      return std::all_of(vs.begin(), vs.end(), [&](SymValue w) { return resolvable(w); });
    }
    if (auto def = spec_.pc.opaque_definition(v)) {
      for (const auto& t : def->args)
        for (auto w : spec_.pc.normalize(t).vars())
          if (!resolvable(w)) return false;
      return true;
    }
    return false;
  }

  Term var(SymValue v) {
    if (auto it = sigma.find(v); it != sigma.end()) return caller_.pc.normalize(it->second);
    Term out;
    if (auto it = spec_.pc.definitions().find(v); it != spec_.pc.definitions().end()) {
      out = term(it->second);
    } else if (auto def = spec_.pc.opaque_definition(v)) {
      std::vector<Term> args;
      for (const auto& t : def->args) args.push_back(term(spec_.pc.normalize(t)));
      auto [r, pc] = caller_.pc.intern(def->op, std::move(args), [&] { return caller_.fresh(); });
      caller_.pc = std::move(pc);
      out = Term::var(r);
    } else {
      out = Term::var(caller_.fresh());
    }
    sigma[v] = out;
    return out;
  }

  Term term(const Term& t) {
    Term out = Term::constant(t.constant_part());
    for (const auto& [v, c] : t.coeffs()) out = out + var(v).scaled(c);
    return out;
  }

 private:
  const Spec& spec_;
  AbstractState& caller_;
};

bool assume_into(AbstractState& st, const Atom& a) {
  auto next = assume(std::move(st), a);
  if (!next) return false;
  st = std::move(*next);
  return true;
}

SymValue key_or_throw(AbstractState& st, const Term& t) {
  auto key = address_key(st, t);
  if (!key) throw InfeasibleState();
  return *key;
}

// Joins the callee precondition into `st`. Returns false when infeasible.
bool join_precondition(AbstractState& st, const Spec& spec, Translator& tr) {
  std::vector<Atom> extra;
  std::vector<std::pair<SymValue, SymValue>> pending(spec.footprint.begin(), spec.footprint.end());
  while (!pending.empty()) {
    auto ready = std::find_if(pending.begin(), pending.end(),
                              [&](const auto& cell) { return tr.resolvable(cell.first); });
    if (ready == pending.end()) ready = pending.begin();  // address unrelated to the inputs
    auto [addr, content] = *ready;
    pending.erase(ready);
    SymValue key = key_or_throw(st, tr.var(addr));
    if (st.heap.freed.count(key)) throw InfeasibleState();
    auto [cell, next] = load(std::move(st), key);
    st = std::move(next);
    if (tr.bound(content))
      extra.push_back(Atom{Rel::Eq, tr.var(content) - Term::var(cell)});
    else
      tr.sigma[content] = Term::var(cell);
  }
  for (const auto& [key, r] : spec.pc.opaque()) {
    if (!tr.bound(r)) continue;
    std::vector<Term> args;
    for (const auto& t : key.args) args.push_back(tr.term(spec.pc.normalize(t)));
    auto [v, pc] = st.pc.intern(key.op, std::move(args), [&] { return st.fresh(); });
    st.pc = std::move(pc);
    extra.push_back(Atom{Rel::Eq, tr.var(r) - Term::var(v)});
  }
  for (const auto& a : spec.pc.constraints()) extra.push_back(Atom{a.rel, tr.term(a.term)});
  for (const auto& a : extra)
    if (!assume_into(st, a)) return false;
  return true;
}

}  // namespace

std::vector<Outcome> apply_summary(const AbstractState& st, const Summary& callee,
                                   const std::vector<Term>& args, const ExprPtr& dest,
                                   const ExecContext& ctx, SourceLoc loc) {
  std::vector<Outcome> out;
  const std::string& current = ctx.function->name;
  for (const Spec& spec : callee.specs) {
    if (spec.kind == SpecKind::InfiniteProgram && (spec.widened || st.widened)) continue;
    AbstractState s = st;
    Translator tr(spec, s);
    for (std::size_t i = 0; i < spec.params.size() && i < args.size(); ++i)
      tr.sigma[spec.params[i]] = args[i];
    try {
      if (!join_precondition(s, spec, tr)) continue;
      std::vector<std::string> calls{callee.procedure};
      calls.insert(calls.end(), spec.external_calls.begin(), spec.external_calls.end());
      s.external_calls.insert(spec.external_calls.begin(), spec.external_calls.end());

      if (spec.kind == SpecKind::InfiniteProgram) {
        s.trace = trace_push(s.trace, {loc.line, "call to " + callee.procedure + " diverges", calls});
        out.push_back({Outcome::Kind::Diverged, std::move(s), spec.origin, {}});
        continue;
      }

      s.trace = trace_push(s.trace, {loc.line, "call to " + callee.procedure, calls});
      s.widened = s.widened || spec.widened;
      for (auto a : spec.allocated) {
        SymValue fresh = s.fresh();
        s.heap.allocated.insert(fresh);
        tr.sigma[a] = Term::var(fresh);
        if (auto pc = s.pc.assert_atom(Atom{Rel::Ne, Term::var(fresh)})) s.pc = std::move(*pc);
      }
      for (const auto& [addr, content] : spec.post_heap) {
        SymValue key = key_or_throw(s, tr.var(addr));
        SymValue value = bind_term(s, tr.var(content));
        s = store(std::move(s), key, value);
      }
      for (auto a : spec.freed) s = free_cell(std::move(s), key_or_throw(s, tr.var(a)));
      if (dest) assign_to(s, *dest, spec.ret ? tr.term(*spec.ret) : Term::var(s.fresh()));

      std::optional<Issue> closed;
      for (const auto& rec : spec.rec_calls) {
        if (rec.chain.size() + 1 > kMaxChain) continue;
        RecursiveCallRecord r = rec;
        for (auto& a : r.args) a = s.pc.normalize(tr.term(a));
        r.chain.push_back(current);
        r.loc = loc;
        if (r.callee == current) {
          if (!closed && !s.widened) closed = close_cycle(current, s, r, ctx);
        } else {
          s.rec_calls.push_back(std::move(r));
        }
      }
      if (closed) {
        std::string origin = closed->origin;
        out.push_back({Outcome::Kind::Diverged, std::move(s), origin, std::move(closed)});
        continue;
      }
      out.push_back({Outcome::Kind::Continue, std::move(s), {}, {}});
    } catch (const InfeasibleState&) {
    } catch (const ArithmeticOverflow&) {
    } catch (const UseAfterFree&) {
      out.push_back({Outcome::Kind::Error, st, {}, {}});
    }
  }
  return out;
}

}  // namespace diverge
