// serialize.cpp - JSON encoding of terms, path conditions, specs and summaries

#include "diverge/summary_db.hpp"

namespace diverge {

namespace {

json ids(const std::vector<SymValue>& vs) {
  json a = json::array();
  for (auto v : vs) a.push_back(v.id);
  return a;
}

json ids(const std::set<SymValue>& vs) { return ids(std::vector<SymValue>(vs.begin(), vs.end())); }

SymValue sym(const json& j) { return SymValue{j.get<std::uint32_t>()}; }

json cells(const std::map<SymValue, SymValue>& m) {
  json a = json::array();
  for (const auto& [k, v] : m) a.push_back(json::array({k.id, v.id}));
  return a;
}

std::map<SymValue, SymValue> cells_from(const json& j) {
  std::map<SymValue, SymValue> m;
  for (const auto& c : j) m.emplace(sym(c.at(0)), sym(c.at(1)));
  return m;
}

std::set<SymValue> id_set(const json& j) {
  std::set<SymValue> s;
  for (const auto& v : j) s.insert(sym(v));
  return s;
}

const char* rel_name(Rel r) {
  switch (r) {
    case Rel::Eq: return "eq";
    case Rel::Ne: return "ne";
    case Rel::Le: return "le";
  }
  return "eq";
}

Rel rel_from(const std::string& s) {
  if (s == "eq") return Rel::Eq;
  if (s == "ne") return Rel::Ne;
  if (s == "le") return Rel::Le;
  throw json::other_error::create(501, "unknown relation " + s, nullptr);
}

json loc_json(const SourceLoc& l) { return json::array({l.file, l.line, l.col}); }
SourceLoc loc_from(const json& j) {
  return SourceLoc{j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>()};
}

json opt_int(const std::optional<std::int64_t>& v) { return v ? json(*v) : json(nullptr); }
std::optional<std::int64_t> opt_int_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::int64_t>();
}

}  // namespace

json to_json(const Term& t) {
  json vars = json::array();
  for (const auto& [v, c] : t.coeffs()) vars.push_back(json::array({v.id, c}));
  return json{{"c", t.constant_part()}, {"v", vars}};
}

Term term_from_json(const json& j) {
  Term t = Term::constant(j.at("c").get<std::int64_t>());
  for (const auto& p : j.at("v")) t = t + Term::var(sym(p.at(0)), p.at(1).get<std::int64_t>());
  return t;
}

json to_json(const Atom& a) { return json{{"rel", rel_name(a.rel)}, {"t", to_json(a.term)}}; }

Atom atom_from_json(const json& j) {
  return Atom{rel_from(j.at("rel").get<std::string>()), term_from_json(j.at("t"))};
}

json to_json(const PathCondition& pc) {
  json defs = json::array(), bounds = json::array(), atoms = json::array(), opaque = json::array();
  for (const auto& [v, t] : pc.definitions()) defs.push_back(json::array({v.id, to_json(t)}));
  for (const auto& [v, iv] : pc.bounds())
    bounds.push_back(json::array({v.id, opt_int(iv.lo), opt_int(iv.hi)}));
  for (const auto& a : pc.atoms()) atoms.push_back(to_json(a));
  for (const auto& [k, r] : pc.opaque()) {
    json args = json::array();
    for (const auto& t : k.args) args.push_back(to_json(t));
    opaque.push_back(json::array({k.op, args, r.id}));
  }
  return json{{"defs", defs}, {"bounds", bounds}, {"atoms", atoms}, {"opaque", opaque}};
}

PathCondition pc_from_json(const json& j) {
  std::map<SymValue, Term> defs;
  std::map<SymValue, Interval> bounds;
  std::set<Atom> atoms;
  std::map<OpaqueKey, SymValue> opaque;
  for (const auto& d : j.at("defs")) defs.emplace(sym(d.at(0)), term_from_json(d.at(1)));
  for (const auto& b : j.at("bounds"))
    bounds.emplace(sym(b.at(0)), Interval{opt_int_from(b.at(1)), opt_int_from(b.at(2))});
  for (const auto& a : j.at("atoms")) atoms.insert(atom_from_json(a));
  for (const auto& o : j.at("opaque")) {
    OpaqueKey k{o.at(0).get<std::string>(), {}};
    for (const auto& t : o.at(1)) k.args.push_back(term_from_json(t));
    opaque.emplace(std::move(k), sym(o.at(2)));
  }
  return PathCondition::from_parts(std::move(defs), std::move(bounds), std::move(atoms),
                                   std::move(opaque));
}

json to_json(const Spec& s) {
  json recs = json::array();
  for (const auto& r : s.rec_calls) {
    json args = json::array();
    for (const auto& a : r.args) args.push_back(to_json(a));
    recs.push_back(json{{"callee", r.callee}, {"args", args}, {"chain", r.chain},
                        {"loc", loc_json(r.loc)}});
  }
  json j;
  j["kind"] = to_string(s.kind);
  j["params"] = ids(s.params);
  j["footprint"] = cells(s.footprint);
  j["pc"] = to_json(s.pc);
  j["post_heap"] = cells(s.post_heap);
  j["allocated"] = ids(s.allocated);
  j["freed"] = ids(s.freed);
  j["ret"] = s.ret ? to_json(*s.ret) : json(nullptr);
  j["rec_calls"] = recs;
  j["origin"] = s.origin;
  j["external_calls"] = s.external_calls;
  j["widened"] = s.widened;
  j["next_id"] = s.next_id;
  return j;
}

Spec spec_from_json(const json& j) {
  Spec s;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == to_string(SpecKind::Ok)) s.kind = SpecKind::Ok;
  else if (kind == to_string(SpecKind::InfiniteProgram)) s.kind = SpecKind::InfiniteProgram;
  else if (kind == to_string(SpecKind::RecursivePending)) s.kind = SpecKind::RecursivePending;
  else throw json::other_error::create(501, "unknown spec kind " + kind, nullptr);
  for (const auto& v : j.at("params")) s.params.push_back(sym(v));
  s.footprint = cells_from(j.at("footprint"));
  s.pc = pc_from_json(j.at("pc"));
  s.post_heap = cells_from(j.at("post_heap"));
  s.allocated = id_set(j.at("allocated"));
  s.freed = id_set(j.at("freed"));
  if (!j.at("ret").is_null()) s.ret = term_from_json(j.at("ret"));
  for (const auto& r : j.at("rec_calls")) {
    RecursiveCallRecord rec;
    rec.callee = r.at("callee").get<std::string>();
    for (const auto& a : r.at("args")) rec.args.push_back(term_from_json(a));
    rec.chain = r.at("chain").get<std::vector<std::string>>();
    rec.loc = loc_from(r.at("loc"));
    s.rec_calls.push_back(std::move(rec));
  }
  s.origin = j.at("origin").get<std::string>();
  s.external_calls = j.at("external_calls").get<std::set<std::string>>();
  s.widened = j.at("widened").get<bool>();
  s.next_id = j.at("next_id").get<std::uint32_t>();
  return s;
}

json to_json(const Issue& i) {
  json trace = json::array();
  for (const auto& t : i.trace) trace.push_back(json::array({t.file, t.line, t.description}));
  json vars = json::array();
  for (const auto& [n, v] : i.witness_vars) vars.push_back(json::array({n, v.id}));
  json j;
  j["type"] = to_string(i.type);
  j["procedure"] = i.procedure;
  j["file"] = i.file;
  j["line"] = i.line;
  j["trace"] = trace;
  j["witness_precondition"] = i.witness_precondition;
  j["reachable_from_entry"] = i.reachable_from_entry;
  j["intended"] = i.intended;
  j["cycle"] = i.cycle;
  j["k_used"] = i.k_used;
  j["origin"] = i.origin;
  j["trace_calls"] = i.trace_calls;
  j["witness_pc"] = to_json(i.witness_pc);
  j["witness_vars"] = vars;
  return j;
}

Issue issue_from_json(const json& j) {
  Issue i;
  auto type = issue_type_from_string(j.at("type").get<std::string>());
  if (!type) throw json::other_error::create(501, "unknown issue type", nullptr);
  i.type = *type;
  i.procedure = j.at("procedure").get<std::string>();
  i.file = j.at("file").get<std::string>();
  i.line = j.at("line").get<int>();
  for (const auto& t : j.at("trace"))
    i.trace.push_back({t.at(0).get<std::string>(), t.at(1).get<int>(), t.at(2).get<std::string>()});
  i.witness_precondition = j.at("witness_precondition").get<std::string>();
  i.reachable_from_entry = j.at("reachable_from_entry").get<bool>();
  i.intended = j.at("intended").get<bool>();
  i.cycle = j.at("cycle").get<std::vector<std::string>>();
  i.k_used = j.at("k_used").get<int>();
  i.origin = j.at("origin").get<std::string>();
  i.trace_calls = j.at("trace_calls").get<std::vector<std::string>>();
  i.witness_pc = pc_from_json(j.at("witness_pc"));
  for (const auto& v : j.at("witness_vars"))
    i.witness_vars.emplace(v.at(0).get<std::string>(), sym(v.at(1)));
  return i;
}

json to_json(const Summary& s) {
  json specs = json::array(), issues = json::array();
  for (const auto& sp : s.specs) specs.push_back(to_json(sp));
  for (const auto& i : s.issues) issues.push_back(to_json(i));
  return json{{"procedure", s.procedure}, {"k", s.k},
              {"truncated", s.truncated}, {"incomplete", s.incomplete},
              {"dropped_records", s.dropped_records}, {"specs", specs},
              {"issues", issues}};
}

Summary summary_from_json(const json& j) {
  Summary s;
  s.procedure = j.at("procedure").get<std::string>();
  s.k = j.at("k").get<int>();
  s.truncated = j.at("truncated").get<bool>();
  s.incomplete = j.at("incomplete").get<bool>();
  s.dropped_records = j.at("dropped_records").get<bool>();
  for (const auto& sp : j.at("specs")) s.specs.push_back(spec_from_json(sp));
  for (const auto& i : j.at("issues")) s.issues.push_back(issue_from_json(i));
  return s;
}

}  // namespace diverge
