// cli.cpp - command-line driver and corpus runner

#include "diverge/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"

#include "diverge/frontend.hpp"
#include "diverge/report.hpp"
#include "diverge/summary_db.hpp"

namespace fs = std::filesystem;

namespace diverge {

namespace {

struct Options {
  std::vector<std::string> inputs;
  int k = 3;
  int max_disjuncts = 32;
  long step_budget = 10000;
  std::vector<std::string> entries;
  std::string models;
  std::string db;
  std::string format = "text";
  int jobs = 1;
  std::string output;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<SourceFile> load_sources(const std::vector<std::string>& inputs) {
  std::vector<std::string> paths;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      auto files = mc_files_in(in);
      paths.insert(paths.end(), files.begin(), files.end());
    } else {
      paths.push_back(in);
    }
  }
  if (paths.empty()) throw UsageError("no input files");
  std::vector<SourceFile> files;
  for (const auto& p : paths) files.push_back(SourceFile{p, read_file(p), 0});
  return files;
}

AnalysisConfig make_config(const Options& o, ModelTable models) {
  if (o.k < 1) throw UsageError("--k must be at least 1");
  if (o.max_disjuncts < 1) throw UsageError("--max-disjuncts must be at least 1");
  if (o.step_budget < 1) throw UsageError("--step-budget must be at least 1");
  if (o.jobs < 1) throw UsageError("--jobs must be at least 1");
  AnalysisConfig c;
  c.widen.k = o.k;
  c.widen.max_disjuncts = o.max_disjuncts;
  c.widen.step_budget = o.step_budget;
  c.entries = o.entries;
  c.jobs = o.jobs;
  c.models = std::move(models);
  return c;
}

std::string parse_error_message(const ParseError& e, const std::vector<SourceFile>& files) {
  auto idx = static_cast<std::size_t>(e.loc().file);
  std::string path = idx < files.size() ? files[idx].path : "<input>";
  return path + ":" + std::to_string(e.loc().line) + ":" + std::to_string(e.loc().col) +
         ": error: " + e.message();
}

void add_common(CLI::App& app, Options& o) {
  app.add_option("--k", o.k, "Loop unrolling bound (default 3)");
  app.add_option("--max-disjuncts", o.max_disjuncts, "Specs kept per procedure (default 32)");
  app.add_option("--step-budget", o.step_budget, "Instructions per path (default 10000)");
  app.add_option("--entry", o.entries, "Entry procedure (repeatable; default main)");
  app.add_option("--models", o.models, "Models file for functions without code");
  app.add_option("--jobs", o.jobs, "Worker threads (default 1)");
}

int analyze_command(const Options& o, std::ostream& out, std::ostream& err) {
  auto files = load_sources(o.inputs);
  ModelTable models = o.models.empty() ? ModelTable{} : ModelTable::load(o.models);
  AnalysisConfig config = make_config(o, std::move(models));
  Program program;
  try {
    program = parse_files(files);
  } catch (const ParseError& e) {
    err << parse_error_message(e, files) << "\n";
    return 2;
  }
  for (const auto& e : config.entries)
    if (!program.find(e)) throw UsageError("entry procedure '" + e + "' is not defined");
  validate_calls(program, config.models);

  std::optional<SummaryDb> warm;
  if (!o.db.empty() && fs::exists(o.db)) {
    try {
      warm = load_db(o.db);
      if (warm->fingerprint != compute_fingerprint(program, config)) {
        err << "note: summary db " << o.db << " is stale; analyzing from scratch\n";
        warm.reset();
      }
    } catch (const VersionMismatch& e) {
      err << "note: " << e.what() << "; analyzing from scratch\n";
    } catch (const CorruptDb& e) {
      err << "warning: " << e.what() << "; analyzing from scratch\n";
    }
  }
  AnalysisResult result = analyze_program(program, config, warm ? &*warm : nullptr);
  if (!o.db.empty()) save_db(result.db, o.db);

  Format format = o.format == "json" ? Format::Json : Format::Text;
  std::string report = emit(result.issues, format, ReportHeader{kToolVersion, config.widen.k});
  if (o.output.empty()) {
    out << report;
  } else {
    std::ofstream f(o.output, std::ios::binary | std::ios::trunc);
    if (!f) throw UsageError("cannot write " + o.output);
    f << report;
  }
  return exit_code_for(result.issues);
}

int corpus_command(const std::string& dir, const Options& o, std::ostream& out,
                   std::ostream& err) {
  if (!fs::is_directory(dir)) throw UsageError(dir + " is not a directory");
  ModelTable models;
  std::string models_path = o.models.empty() ? (fs::path(dir) / "models.txt").string() : o.models;
  if (fs::exists(models_path)) models = ModelTable::load(models_path);
  AnalysisConfig config = make_config(o, std::move(models));

  std::vector<CorpusFileResult> results;
  for (const auto& path : mc_files_in(dir)) {
    CorpusFileResult r;
    r.file = fs::path(path).filename().string();
    std::vector<SourceFile> files{SourceFile{path, read_file(path), 0}};
    try {
      Program program = parse_files(files);
      FileExpectations exp = parse_expectations(program);
      if (!exp.annotated) {
        err << "warning: " << path << " has no expect annotation; skipped\n";
        r.skipped = true;
        results.push_back(r);
        continue;
      }
      validate_calls(program, config.models);
      AnalysisResult res = analyze_program(program, config);
      r = check_expectations(r.file, exp, res.issues);
    } catch (const ParseError& e) {
      r.error = true;
      r.message = parse_error_message(e, files);
    } catch (const std::exception& e) {
      r.error = true;
      r.message = e.what();
    }
    results.push_back(r);
  }

  std::size_t width = 4;
  for (const auto& r : results) width = std::max(width, r.file.size());
  out << std::left << std::setw(static_cast<int>(width)) << "file"
      << "  result  expected  found  fp  fn\n";
  int passed = 0, failed = 0, skipped = 0;
  for (const auto& r : results) {
    std::string status = r.skipped ? "skip" : r.pass() ? "pass" : r.error ? "error" : "FAIL";
    out << std::left << std::setw(static_cast<int>(width)) << r.file << "  " << std::setw(6)
        << status << "  " << std::right << std::setw(8) << r.expected << "  " << std::setw(5)
        << r.found << "  " << std::setw(2) << r.false_positives << "  " << std::setw(2)
        << r.false_negatives << "\n";
    if (!r.message.empty()) out << "    " << r.message << "\n";
    if (r.skipped) ++skipped;
    else if (r.pass()) ++passed;
    else ++failed;
  }
  out << passed << " passed, " << failed << " failed, " << skipped << " skipped\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

std::vector<std::string> mc_files_in(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".mc") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  return files;
}

FileExpectations parse_expectations(const Program& program) {
  FileExpectations fe;
  for (const auto& a : program.annotations) {
    if (a.text.rfind("expect:", 0) != 0) continue;
    fe.annotated = true;
    std::istringstream words(a.text.substr(7));
    std::string w;
    if (!(words >> w) || w == "clean" || w == "none") continue;
    auto fail = [&](const std::string& why) {
      return std::runtime_error("line " + std::to_string(a.line) + ": " + why);
    };
    auto type = issue_type_from_string(w);
    if (!type) throw fail("unknown issue type '" + w + "' in expect annotation");
    Expectation e;
    e.type = *type;
    e.line = a.line;
    while (words >> w) {
      if (w == "@") {
        if (!(words >> e.issue_line) || e.issue_line < 1) throw fail("expected a line after '@'");
      } else if (w.rfind("proc=", 0) == 0) {
        e.procedure = w.substr(5);
      } else if (w == "intended") {
        e.intended = true;
      } else {
        throw fail("unknown expect option '" + w + "'");
      }
    }
    fe.expected.push_back(e);
  }
  return fe;
}

CorpusFileResult check_expectations(const std::string& file, const FileExpectations& exp,
                                    const std::vector<Issue>& issues) {
  CorpusFileResult r;
  r.file = file;
  r.expected = static_cast<int>(exp.expected.size());
  r.found = static_cast<int>(issues.size());
  std::vector<bool> used(issues.size(), false);
  for (const auto& e : exp.expected) {
    bool matched = false;
    for (std::size_t i = 0; i < issues.size() && !matched; ++i) {
      if (used[i] || issues[i].type != e.type) continue;
      if (e.issue_line && issues[i].line != e.issue_line) continue;
      if (!e.procedure.empty() && issues[i].procedure != e.procedure) continue;
      if (issues[i].intended != e.intended) continue;
      used[i] = matched = true;
    }
    if (!matched) ++r.false_negatives;
  }
  r.false_positives = static_cast<int>(std::count(used.begin(), used.end(), false));
  return r;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"diverge: proves that MiniC programs can run forever"};
  app.set_version_flag("--version", kToolVersion);
  Options o;
  add_common(app, o);
  app.add_option("--db", o.db, "Summary database to reuse and update");
  app.add_option("--format", o.format, "Report format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("-o,--output", o.output, "Write the report to a file");
  app.add_option("inputs", o.inputs, "MiniC files or directories");

  Options co;
  std::string corpus_dir;
  CLI::App* corpus = app.add_subcommand("corpus", "Check a directory against //@ expect: lines");
  add_common(*corpus, co);
  corpus->add_option("dir", corpus_dir, "Corpus directory")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*corpus) return corpus_command(corpus_dir, co, out, err);
    return analyze_command(o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 2;
}

}  // namespace diverge
