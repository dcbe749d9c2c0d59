// Command-line behavior, exit codes and the corpus runner.

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "diverge/cli.hpp"
#include "diverge/frontend.hpp"

using namespace diverge;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string write(const std::string& name, const std::string& text) const {
    auto p = (path_ / name).string();
    std::ofstream(p) << text;
    return p;
  }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

const std::string kCorpus = DIVERGE_CORPUS_DIR;

}  // namespace

TEST_CASE("programs with bugs exit 1, clean programs exit 0") {
  CHECK(cli({kCorpus + "/t1a_goto_previous.mc"}).code == 1);
  CHECK(cli({kCorpus + "/t1b_while_x.mc"}).code == 1);
  CHECK(cli({kCorpus + "/t1c_recurse_up.mc"}).code == 1);
  CHECK(cli({kCorpus + "/t1d_goto_forward.mc", kCorpus + "/t1e_bounded_while.mc",
             kCorpus + "/t1f_bounded_recursion.mc"}).code == 0);
}

TEST_CASE("invalid configuration and input exit 2") {
  Run r = cli({"--k", "0", kCorpus + "/t1a_goto_previous.mc"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--k") != std::string::npos);
  CHECK(cli({"--jobs", "0", kCorpus + "/t1a_goto_previous.mc"}).code == 2);
  CHECK(cli({"/nonexistent/file.mc"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"--format", "xml", kCorpus + "/t1a_goto_previous.mc"}).code == 2);
  CHECK(cli({"--entry", "nope", kCorpus + "/t1a_goto_previous.mc"}).code == 2);
}

TEST_CASE("parse errors are reported with file and line") {
  TempDir d("diverge_cli_parse");
  auto f = d.write("bad.mc", "int f() {\n  return ;;\n  x = = 1;\n}\n");
  Run r = cli({f});
  CHECK(r.code == 2);
  CHECK(r.err.find("bad.mc:3:") != std::string::npos);
  CHECK(r.err.find("error: 3:") == std::string::npos);
}

TEST_CASE("undefined calls need a models file") {
  TempDir d("diverge_cli_models");
  auto f = d.write("m.mc", "void f() {\n  while (1) {\n    tick();\n  }\n}\n");
  CHECK(cli({f}).code == 2);
  auto m = d.write("models.txt", "tick blocking\n");
  CHECK(cli({"--models", m, f}).code == 0);
}

TEST_CASE("version flag") {
  Run r = cli({"--version"});
  CHECK(r.code == 0);
  CHECK(r.out.find("diverge 1.0.0") != std::string::npos);
}

TEST_CASE("json output can go to a file") {
  TempDir d("diverge_cli_out");
  auto out = d.str() + "/report.json";
  Run r = cli({"--format", "json", "-o", out, kCorpus + "/t1b_while_x.mc"});
  CHECK(r.code == 1);
  CHECK(r.out.empty());
  std::ifstream in(out);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.rfind(R"({"version":1,"tool":"diverge 1.0.0","k":3,"issues":[{"issue_type":"infinite_loop")", 0) == 0);
}

TEST_CASE("the main corpus passes") {
  Run r = cli({"corpus", kCorpus});
  CHECK(r.code == 0);
  CHECK(r.out.find(" 0 failed, 0 skipped") != std::string::npos);
}

TEST_CASE("a wrong annotation is reported as a mismatch") {
  TempDir d("diverge_cli_wrong");
  d.write("wrong.mc", "//@ expect: infinite_loop @ 3\nint e() {\n  int x = 0;\n  while (x < 10) x++;\n  return x;\n}\n");
  d.write("right.mc", "//@ expect: clean\nint e() {\n  return 0;\n}\n");
  d.write("none.mc", "int e() {\n  return 0;\n}\n");
  Run r = cli({"corpus", d.str()});
  CHECK(r.code == 1);
  CHECK(r.out.find("1 passed, 1 failed, 1 skipped") != std::string::npos);
  CHECK(r.err.find("none.mc has no expect annotation") != std::string::npos);
}

TEST_CASE("the limits corpus documents known misses") {
  Run r = cli({"corpus", kCorpus + "/limits"});
  CHECK(r.code == 1);
  CHECK(r.out.find("\n0 passed, 5 failed") != std::string::npos);
}

TEST_CASE("expectation parsing") {
  Program p = parse(
      "//@ expect: mutual_recursion @ 6 proc=f\n"
      "//@ expect: infinite_loop @ 9 intended\n"
      "void f() {}\n");
  auto e = parse_expectations(p);
  CHECK(e.annotated);
  REQUIRE(e.expected.size() == 2);
  CHECK(e.expected[0].type == IssueType::MutualRecursion);
  CHECK(e.expected[0].issue_line == 6);
  CHECK(e.expected[0].procedure == "f");
  CHECK(e.expected[1].intended);
  CHECK_THROWS(parse_expectations(parse("//@ expect: endless_loop\nvoid f() {}\n")));
  CHECK_THROWS(parse_expectations(parse("//@ expect: infinite_loop @ x\nvoid f() {}\n")));
}

TEST_CASE("warm db runs match cold runs and stale dbs are ignored") {
  TempDir d("diverge_cli_db");
  auto db = d.str() + "/s.db";
  std::string f = kCorpus + "/fig4_fgh.mc";
  Run cold = cli({"--format", "json", "--db", db, f});
  CHECK(fs::exists(db));
  Run warm = cli({"--format", "json", "--db", db, f});
  CHECK(warm.out == cold.out);
  CHECK(warm.err.empty());
  Run k5 = cli({"--format", "json", "--k", "5", "--db", db, f});
  CHECK(k5.err.find("stale") != std::string::npos);
  std::ofstream(db) << "rubbish";
  Run bad = cli({"--format", "json", "--db", db, f});
  CHECK(bad.err.find("analyzing from scratch") != std::string::npos);
  CHECK(bad.code == cold.code);
}

TEST_CASE("a whole directory is one program") {
  Run r = cli({kCorpus});
  CHECK(r.code == 2);
  CHECK(r.err.find("duplicate function") != std::string::npos);
}

TEST_CASE("jobs do not change the output") {
  std::string models = kCorpus + "/models.txt";
  int compared = 0;
  for (const auto& f : mc_files_in(kCorpus)) {
    CAPTURE(f);
    Run one = cli({"--format", "json", "--models", models, f});
    Run four = cli({"--format", "json", "--jobs", "4", "--models", models, f});
    REQUIRE(one.code != 2);
    CHECK(one.out == four.out);
    CHECK(one.code == four.code);
    ++compared;
  }
  CHECK(compared >= 29);
}
