// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "diverge/cfg.hpp"
#include "diverge/cli.hpp"
#include "diverge/frontend.hpp"
#include "diverge/interp.hpp"
#include "diverge/interproc.hpp"
#include "diverge/report.hpp"

using namespace diverge;
namespace fs = std::filesystem;

namespace {

const std::string kCorpus = DIVERGE_CORPUS_DIR;
const std::string kBin = DIVERGE_BIN;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ModelTable corpus_models() { return ModelTable::load(kCorpus + "/models.txt"); }

struct Analysis {
  Program program;
  std::vector<Issue> issues;
  double seconds = 0;
};

Analysis analyze_file(const std::string& path, int k = 3) {
  auto start = std::chrono::steady_clock::now();
  Analysis a;
  a.program = parse_files({SourceFile{path, slurp(path), 0}});
  AnalysisConfig c;
  c.widen.k = k;
  c.models = corpus_models();
  validate_calls(a.program, c.models);
  a.issues = analyze_program(a.program, c).issues;
  a.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return a;
}

std::vector<std::string> corpus_files() {
  auto files = mc_files_in(kCorpus);
  for (const auto& f : mc_files_in(kCorpus + "/ksens")) files.push_back(f);
  return files;
}

/// Runs the command-line binary and returns its standard output.
std::string run_bin(const std::string& args, int* status = nullptr) {
  std::string cmd = "\"" + kBin + "\" " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return "";
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  int st = pclose(pipe);
  if (status) *status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return out;
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;
  void fail(const std::string& why) {
    pass = false;
    notes.push_back(why);
  }
};

int failures = 0;

void report(int n, const std::string& title, const Verdict& v) {
  std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << n << ": " << title << "\n";
  for (const auto& note : v.notes) std::cout << "        " << note << "\n";
  if (!v.pass) ++failures;
}

std::set<std::string> cycle_set(const Issue& i) { return {i.cycle.begin(), i.cycle.end()}; }

bool witness_entails(const Issue& i, const std::string& lhs, CmpOp op, const std::string& rhs) {
  auto l = i.witness_vars.find(lhs), r = i.witness_vars.find(rhs);
  if (l == i.witness_vars.end()) return false;
  Term rt = r == i.witness_vars.end() ? Term::constant(std::stoll(rhs)) : Term::var(r->second);
  return entails(i.witness_pc, make_atom(Term::var(l->second), op, rt));
}

// 1 ---------------------------------------------------------------------

Verdict basic_verdicts() {
  Verdict v;
  struct Row {
    std::string file;
    std::optional<IssueType> type;
  };
  std::vector<Row> rows{{"t1a_goto_previous.mc", IssueType::InfiniteGoto},
                        {"t1b_while_x.mc", IssueType::InfiniteLoop},
                        {"t1c_recurse_up.mc", IssueType::InfiniteRecursion},
                        {"t1d_goto_forward.mc", std::nullopt},
                        {"t1e_bounded_while.mc", std::nullopt},
                        {"t1f_bounded_recursion.mc", std::nullopt}};
  for (const auto& r : rows) {
    Analysis a = analyze_file(kCorpus + "/" + r.file);
    std::size_t want = r.type ? 1 : 0;
    if (a.issues.size() != want)
      v.fail(r.file + ": " + std::to_string(a.issues.size()) + " issues, expected " +
             std::to_string(want));
    else if (r.type && a.issues[0].type != *r.type)
      v.fail(r.file + ": got " + to_string(a.issues[0].type));
    if (a.seconds >= 1.0) v.fail(r.file + ": took " + std::to_string(a.seconds) + " s");
  }
  return v;
}

// 2 ---------------------------------------------------------------------

Verdict loop_verdicts() {
  Verdict v;
  for (const auto* name : {"optim", "non_optim", "loop_cond_nonterm", "loop_pointer_nonterm"}) {
    std::string file = std::string("fig3_") + name + ".mc";
    Analysis a = analyze_file(kCorpus + "/" + file);
    const Issue* loop = nullptr;
    for (const auto& i : a.issues)
      if (i.type == IssueType::InfiniteLoop && i.procedure == name) loop = &i;
    if (!loop) {
      v.fail(file + ": no infinite_loop issue");
      continue;
    }
    if (std::string(name) == "non_optim" && !witness_entails(*loop, "i", CmpOp::Lt, "20"))
      v.fail("non_optim: witness '" + loop->witness_precondition + "' does not entail i < 20");
    if (std::string(name) == "loop_pointer_nonterm") {
      // The verdict must depend on z aliasing y: once x is kept away from
      // &y the decrement no longer cancels the increment.
      std::string src = slurp(kCorpus + "/" + file);
      auto at = src.find("x == &y");
      if (at == std::string::npos) {
        v.fail("loop_pointer_nonterm: aliasing guard not found");
        continue;
      }
      src.replace(at, 7, "x != &y");
      Program mutant = parse(src, "mutant.mc");
      if (!analyze_program(mutant, AnalysisConfig{}).issues.empty())
        v.fail("loop_pointer_nonterm: still reported without the alias");
    }
  }
  return v;
}

// 3 ---------------------------------------------------------------------

Verdict cycle_verdicts() {
  Verdict v;
  Analysis t = analyze_file(kCorpus + "/fig4_trivial.mc");
  if (t.issues.size() != 1 || t.issues[0].type != IssueType::InfiniteRecursion ||
      t.issues[0].cycle != std::vector<std::string>{"trivial"})
    v.fail("trivial: expected one infinite_recursion with cycle [trivial]");
  Analysis f = analyze_file(kCorpus + "/fig4_fgh.mc");
  if (f.issues.size() != 1) {
    v.fail("fgh: " + std::to_string(f.issues.size()) + " issues, expected 1");
    return v;
  }
  const Issue& i = f.issues[0];
  if (i.type != IssueType::MutualRecursion) v.fail("fgh: type " + to_string(i.type));
  if (cycle_set(i) != std::set<std::string>{"f", "g", "h"}) v.fail("fgh: cycle is not {f, g, h}");
  if (!witness_entails(i, "*x", CmpOp::Gt, "*y"))
    v.fail("fgh: witness '" + i.witness_precondition + "' does not entail *x > *y");
  return v;
}

// 4 ---------------------------------------------------------------------

Verdict ported_bugs() {
  Verdict v;
  std::vector<std::pair<std::string, IssueType>> rows{
      {"fig2_mp4box_svg_dump_path.mc", IssueType::InfiniteLoop},
      {"fig2_ftdi_read_config.mc", IssueType::InfiniteGoto},
      {"fig2_libpng_read_byte.mc", IssueType::InfiniteRecursion}};
  for (const auto& [file, type] : rows) {
    Analysis a = analyze_file(kCorpus + "/" + file);
    bool found = false;
    for (const auto& i : a.issues) found |= i.type == type;
    if (!found) v.fail(file + ": no " + to_string(type) + " issue");
  }
  return v;
}

// 5 ---------------------------------------------------------------------

bool pointer_free_and_deterministic(const Program& p) {
  for (const auto& f : p.functions) {
    if (f.return_type.depth > 0) return false;
    Cfg cfg = build_cfg(f);
    for (const auto& var : cfg.vars)
      if (var.type.depth > 0) return false;
    for (const auto& b : cfg.blocks)
      for (const auto& in : b.instrs) {
        if (in.kind == Instr::Kind::Alloc || in.kind == Instr::Kind::Free) return false;
        if (in.kind == Instr::Kind::Call && !p.find(in.callee)) return false;
      }
  }
  return true;
}

/// Models of the witness: the solver's own plus random points that satisfy it.
std::vector<std::map<std::string, std::int64_t>> witness_models(const Issue& i, std::mt19937& rng) {
  std::vector<std::map<std::string, std::int64_t>> out;
  std::vector<SymValue> vars;
  for (const auto& [n, s] : i.witness_vars) vars.push_back(s);
  auto to_env = [&](const std::map<SymValue, std::int64_t>& m) {
    std::map<std::string, std::int64_t> env;
    for (const auto& [n, s] : i.witness_vars) {
      Term t = i.witness_pc.normalize(s);
      std::int64_t val = t.constant_part();
      for (const auto& [x, c] : t.coeffs()) {
        auto it = m.find(x);
        val += c * (it == m.end() ? 0 : it->second);
      }
      env[n] = val;
    }
    return env;
  };
  for (std::int64_t bound : {4, 32, 1000})
    if (auto m = find_model(i.witness_pc, vars, bound)) out.push_back(to_env(*m));
  std::uniform_int_distribution<std::int64_t> pick(-50, 50);
  for (int tries = 0; tries < 200 && out.size() < 12; ++tries) {
    PathCondition pc = i.witness_pc;
    std::map<SymValue, std::int64_t> m;
    bool ok = true;
    for (auto s : i.witness_pc.free_vars()) {
      std::int64_t val = pick(rng);
      auto next = pc.assume(Atom{Rel::Eq, Term::var(s) - Term::constant(val)});
      if (!next) {
        ok = false;
        break;
      }
      pc = *next;
      m[s] = val;
    }
    if (ok && is_sat(pc)) out.push_back(to_env(m));
  }
  return out;
}

Verdict witness_soundness() {
  Verdict v;
  std::mt19937 rng(5);
  int runs = 0, programs = 0;
  for (const auto& path : corpus_files()) {
    Analysis a = analyze_file(path);
    if (!pointer_free_and_deterministic(a.program)) continue;
    bool counted = false;
    for (const auto& i : a.issues) {
      if (i.type != IssueType::InfiniteLoop && i.type != IssueType::InfiniteGoto) continue;
      if (!counted) ++programs, counted = true;
      auto models = witness_models(i, rng);
      if (models.empty()) v.fail(fs::path(path).filename().string() + ": witness has no model");
      for (const auto& env : models) {
        ++runs;
        auto r = concrete_run(a.program, i.procedure, env, 100000);
        if (r.kind != ConcreteResult::Kind::RepeatedState) {
          std::string e;
          for (const auto& [n, x] : env) e += " " + n + "=" + std::to_string(x);
          v.fail(fs::path(path).filename().string() + " " + i.procedure + ":" + e + " -> " +
                 to_string(r.kind));
        }
      }
    }
  }
  v.notes.insert(v.notes.begin(), std::to_string(runs) + " concrete runs over " +
                                      std::to_string(programs) + " programs");
  if (runs == 0) v.fail("no issues were checked");
  return v;
}

// 6 ---------------------------------------------------------------------

Verdict k_monotonicity() {
  Verdict v;
  using Key = std::tuple<std::string, int, std::string, std::string>;
  std::array<std::size_t, 3> totals{};
  const std::array<int, 3> ks{3, 5, 10};
  for (const auto& path : corpus_files()) {
    std::array<std::set<Key>, 3> sets;
    for (std::size_t j = 0; j < ks.size(); ++j) {
      for (const auto& i : analyze_file(path, ks[j]).issues)
        sets[j].insert({to_string(i.type), i.line, i.procedure, i.file});
      totals[j] += sets[j].size();
    }
    std::string name = fs::path(path).filename().string();
    if (sets[0].size() > sets[1].size() || sets[1].size() > sets[2].size())
      v.fail(name + ": count not monotone");
    for (const auto& key : sets[0])
      if (!sets[2].count(key)) v.fail(name + ": issue at k=3 missing at k=10");
  }
  v.notes.push_back("alerts: k=3 " + std::to_string(totals[0]) + ", k=5 " +
                    std::to_string(totals[1]) + ", k=10 " + std::to_string(totals[2]));
  return v;
}

// 7 ---------------------------------------------------------------------

Verdict solver_oracle() {
  Verdict v;
  std::mt19937 rng(424242);
  std::uniform_int_distribution<int> coeff(-3, 3), cst(-6, 6), rel(0, 5), natoms(1, 4),
      nvars(1, 3);
  static const CmpOp ops[] = {CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge};
  int violations = 0;
  for (int round = 0; round < 10000; ++round) {
    int nv = nvars(rng);
    std::vector<Atom> atoms;
    int na = natoms(rng);
    for (int a = 0; a < na; ++a) {
      Term t = Term::constant(cst(rng));
      for (int x = 1; x <= nv; ++x)
        t = t + Term::var(SymValue{static_cast<std::uint32_t>(x)}, coeff(rng));
      atoms.push_back(make_atom(t, ops[rel(rng)], Term::constant(0)));
    }
    bool ours = true;
    PathCondition pc;
    for (const auto& a : atoms) {
      auto next = pc.assume(a);
      if (!next) {
        ours = false;
        break;
      }
      pc = *next;
    }
    ours = ours && is_sat(pc);
    if (!ours && oracle_sat(atoms, 4).sat) ++violations;
  }
  v.notes.push_back("10000 conjunctions, " + std::to_string(violations) + " violations");
  if (violations) v.fail("is_sat refuted a satisfiable conjunction");
  return v;
}

// 8 ---------------------------------------------------------------------

std::string corpus_json(const std::string& extra) {
  std::string all;
  for (const auto& path : corpus_files())
    all += run_bin("--format json --models \"" + kCorpus + "/models.txt\" " + extra + " \"" + path + "\"");
  return all;
}

Verdict determinism() {
  Verdict v;
  std::string a = corpus_json(""), b = corpus_json(""), c = corpus_json("--jobs 4");
  if (a.empty()) v.fail("no output from " + kBin);
  if (a != b) v.fail("two cold runs differ");
  if (a != c) v.fail("--jobs 4 differs from --jobs 1");
  return v;
}

// 9 ---------------------------------------------------------------------

/// A synthetic program: layered call chains with branches, bounded loops,
/// occasional divergent loops and recursion.
std::string generate_program(int functions, std::mt19937& rng) {
  std::ostringstream s;
  std::uniform_int_distribution<int> pick(0, 5), bound(2, 9);
  for (int n = 0; n < functions; ++n) {
    s << "int f" << n << "(int a, int b) {\n";
    s << "  int s = 0;\n  int i = 0;\n  int t = a;\n";
    if (n % 17 == 5) s << "  while (a == 42) {\n    s = s + 1;\n  }\n";
    if (n % 23 == 7) s << "  if (b == 3) {\n    s = s + f" << n << "(a, b);\n  }\n";
    for (int block = 0; block < 9; ++block) {
      switch (pick(rng)) {
        case 0:
          s << "  i = 0;\n  while (i < " << bound(rng) << ") {\n    s = s + i;\n    i++;\n  }\n";
          break;
        case 1:
          s << "  if (a > " << bound(rng) << ") {\n    s = s + 2;\n    t = t - 1;\n  } else {\n"
            << "    s = s - 1;\n  }\n";
          break;
        case 2:
          if (n > 0) {
            s << "  if (b != " << bound(rng) << ") {\n    s = s + f" << std::max(0, n - 1 - n % 3)
              << "(t, b - 1);\n  }\n";
          } else {
            s << "  s = s + 1;\n";
          }
          break;
        case 3:
          s << "  while (t > 0) {\n    t = t - " << bound(rng) << ";\n    s++;\n  }\n";
          break;
        case 4:
          s << "  if (s == " << bound(rng) << ") {\n    s = 0;\n  }\n  b = b + s;\n";
          break;
        default:
          s << "  i = a;\n  while (i != 0 && i < 100) {\n    i = i + 1;\n    s = s + 1;\n  }\n";
          break;
      }
    }
    s << "  return s;\n}\n\n";
  }
  s << "int main() {\n  return f" << functions - 1 << "(1, 2);\n}\n";
  return s.str();
}

Verdict performance() {
  Verdict v;
  std::mt19937 rng(2024);
  std::string text = generate_program(200, rng);
  int lines = static_cast<int>(std::count(text.begin(), text.end(), '\n'));
  auto path = (fs::temp_directory_path() / "diverge_perf.mc").string();
  std::ofstream(path) << text;
  auto start = std::chrono::steady_clock::now();
  int status = -1;
  std::string out = run_bin("\"" + path + "\"", &status);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fs::remove(path);
  std::ostringstream note;
  note << "200 functions, " << lines << " lines, " << secs << " s";
  v.notes.push_back(note.str());
  std::size_t found = 0;
  for (auto at = out.find(": infinite_"); at != std::string::npos; at = out.find(": infinite_", at + 1))
    ++found;
  note << ", " << found << " issues";
  v.notes.back() = note.str();
  if (status != 1) v.fail("analysis exited with " + std::to_string(status));
  if (found < 12) v.fail("planted divergences were not found");
  if (secs >= 60) v.fail("over 60 s");
  if (lines < 9000) v.fail("generated program too small");
  return v;
}

// 10 --------------------------------------------------------------------

Verdict db_round_trip() {
  Verdict v;
  auto db = (fs::temp_directory_path() / "diverge_acceptance.db").string();
  for (const auto& path : corpus_files()) {
    fs::remove(db);
    std::string args = "--format json --models \"" + kCorpus + "/models.txt\" --db \"" + db +
                       "\" \"" + path + "\"";
    std::string cold = run_bin(args);
    std::string warm = run_bin(args);
    if (cold.empty() || cold != warm)
      v.fail(fs::path(path).filename().string() + ": warm run differs from cold run");
  }
  fs::remove(db);
  return v;
}

}  // namespace

int main() {
  report(1, "basic verdicts", basic_verdicts());
  report(2, "loop verdicts and witnesses", loop_verdicts());
  report(3, "recursion cycle verdicts", cycle_verdicts());
  report(4, "ported real-world bugs", ported_bugs());
  report(5, "witness soundness", witness_soundness());
  report(6, "k-monotonicity", k_monotonicity());
  report(7, "solver oracle equivalence", solver_oracle());
  report(8, "determinism", determinism());
  report(9, "performance sanity", performance());
  report(10, "summary db round trip", db_round_trip());
  return failures == 0 ? 0 : 1;
}
