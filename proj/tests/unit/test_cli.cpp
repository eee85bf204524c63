#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "riskcb/cli.hpp"
#include "riskcb/harness.hpp"

using namespace rcb;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) out.push_back(c);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("rcb_cli_" + std::to_string(::getpid()) + "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path root_;
};

}  // namespace

TEST_F(CliTest, ConfigErrorsExitTwoAndNameTheConstraint) {
  const auto r = invoke({"run", "--seed", "1", "--out", root_.string(), "q=1.5"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("q must lie in (0,1)"), std::string::npos) << r.err;
  EXPECT_EQ(invoke({"verify", "--suite", "nonexistent"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"run", "--out", root_.string(), "env.rows=10"}).code, cli::kExitUsage);  // no seed
}

TEST_F(CliTest, ReportOnAMissingRunIsARuntimeFailure) {
  fs::create_directories(root_ / "empty");
  EXPECT_EQ(invoke({"report", (root_ / "empty").string(), "--out", (root_ / "r").string()}).code, cli::kExitRuntime);
  EXPECT_EQ(invoke({"report", (root_ / "absent").string(), "--out", (root_ / "r").string()}).code, cli::kExitRuntime);
}

TEST_F(CliTest, RunWritesArtifactsAndIsReproducible) {
  const std::vector<std::string> args = {"run",           "--seed", "3", "--out", root_.string(), "--id", "a",
                                         "env.kind=pricing_continuous", "env.rows=1000"};
  const auto start = std::chrono::steady_clock::now();
  const auto r = invoke(args);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_LT(secs, 10.0);
  const auto dir = root_ / "runs" / "a";
  for (const char* f : {"rounds.jsonl", "report.json", "manifest.json"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(lines(slurp(dir / "rounds.jsonl")).size(), 1000u);
  const std::string first = slurp(dir / "report.json");

  auto again = args;
  again[6] = "b";
  ASSERT_EQ(invoke(again).code, cli::kExitOk);
  EXPECT_EQ(slurp(root_ / "runs" / "b" / "report.json"), first);

  // Rerunning from the manifest reproduces the report as well.
  ASSERT_EQ(invoke({"run", "--manifest", (dir / "manifest.json").string(), "--out", root_.string(), "--id", "c"}).code,
            cli::kExitOk);
  EXPECT_EQ(slurp(root_ / "runs" / "c" / "report.json"), first);
}

TEST_F(CliTest, OutputRootComesFromTheEnvironment) {
  ::setenv(cli::kOutputRootVar, root_.c_str(), 1);
  const auto r = invoke({"run", "--seed", "1", "--id", "env", "env.rows=50"});
  ::unsetenv(cli::kOutputRootVar);
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(root_ / "runs" / "env" / "report.json"));
}

TEST_F(CliTest, VerifySuitesPassAndMetaTestsFail) {
  for (const auto& s : cli::suite_names()) {
    const auto r = invoke({"verify", "--suite", s});
    EXPECT_EQ(r.code, cli::kExitOk) << s << ": " << r.out;
    EXPECT_EQ(r.out.rfind("PASS", 0), 0u) << r.out;
  }
  const auto bad = invoke({"verify", "--suite", "indifference", "--corrupt"});
  EXPECT_EQ(bad.code, cli::kExitRuntime);
  EXPECT_EQ(bad.out.rfind("FAIL", 0), 0u) << bad.out;
}

TEST_F(CliTest, ReportOnOneRunHasOneRowWithIntervals) {
  ASSERT_EQ(invoke({"run", "--seed", "2", "--out", root_.string(), "--id", "one", "env.kind=inventory", "env.rows=400"}).code,
            cli::kExitOk);
  const auto out = root_ / "rep";
  const auto r = invoke({"report", (root_ / "runs" / "one").string(), "--out", out.string(), "--q-eval", "0.1,0.5"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto table = lines(slurp(out / "metrics.csv"));
  ASSERT_EQ(table.size(), 2u);
  const auto header = split(table[0]), row = split(table[1]);
  ASSERT_EQ(header.size(), row.size());
  for (const char* col : {"sold_out", "sold_out_lo", "sold_out_hi", "profit_lo", "profit_hi"}) {
    EXPECT_NE(std::find(header.begin(), header.end(), col), header.end()) << col;
  }
  EXPECT_EQ(row[0], "one");
  const auto curves = lines(slurp(out / "expectile_curves.csv"));
  EXPECT_EQ(curves.size(), 3u);
  EXPECT_FALSE(fs::exists(out / "pareto.csv"));
  EXPECT_EQ(invoke({"report", (root_ / "runs" / "one").string(), "--out", out.string(), "--q-eval", "0.1,1.2"}).code,
            cli::kExitUsage);
}

TEST_F(CliTest, QuerySweepReportHasAnUndominatedFront) {
  std::vector<std::string> dirs = {"report"};
  for (const char* q : {"0.5", "0.2", "0.05"}) {
    const std::string id = std::string("q") + q;
    ASSERT_EQ(invoke({"run", "--seed", "1", "--out", root_.string(), "--id", id, "env.kind=query_opt", "env.rows=1500",
                   std::string("q=") + q, "gamma.mode=fixed", "gamma.value=300"})
                  .code,
              cli::kExitOk);
    dirs.push_back((root_ / "runs" / id).string());
  }
  dirs.push_back("--out");
  dirs.push_back((root_ / "rep").string());
  ASSERT_EQ(invoke(dirs).code, cli::kExitOk);

  const auto all = lines(slurp(root_ / "rep" / "pareto.csv"));
  ASSERT_EQ(all.size(), 4u);
  struct P {
    double lift, reg;
    bool front;
  };
  std::vector<P> pts;
  for (std::size_t i = 1; i < all.size(); ++i) {
    const auto c = split(all[i]);
    pts.push_back({std::stod(c[2]), std::stod(c[3]), c[5] == "1"});
  }
  std::size_t on_front = 0;
  for (const auto& p : pts) {
    bool dominated = false;
    for (const auto& o : pts) {
      dominated |= o.lift >= p.lift && o.reg <= p.reg && (o.lift > p.lift || o.reg < p.reg);
    }
    EXPECT_EQ(p.front, !dominated);
    on_front += p.front ? 1 : 0;
  }
  EXPECT_GE(on_front, 1u);
  EXPECT_EQ(lines(slurp(root_ / "rep" / "pareto_front.csv")).size(), on_front + 1);
}

TEST_F(CliTest, SweepWritesALeaderboard) {
  const auto r = invoke({"sweep", "--seed", "5", "--out", root_.string(), "--id", "s", "env.rows=200", "sweep.trials=3",
                      "-j", "2"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(lines(slurp(root_ / "runs" / "s" / "leaderboard.jsonl")).size(), 3u);
  EXPECT_TRUE(fs::exists(root_ / "runs" / "s" / "report.json"));
}

TEST_F(CliTest, SynthThenIngestCheck) {
  const auto csv = root_ / "p.csv";
  ASSERT_EQ(invoke({"synth", "--kind", "pricing_continuous", "--rows", "120", "--seed", "4", "--out", csv.string()}).code,
            cli::kExitOk);
  ASSERT_TRUE(fs::exists(csv));
  const auto jl = root_ / "q.jsonl";
  ASSERT_EQ(invoke({"synth", "--kind", "query_opt", "--rows", "30", "--seed", "4", "--out", jl.string()}).code, cli::kExitOk);
  const auto r = invoke({"ingest-check", "--schema", "query_opt", jl.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("rows 30"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("sha256 "), std::string::npos);

  // A file with the wrong columns is a runtime failure, not a crash.
  std::ofstream(root_ / "bad.csv") << "a,b\n1,2\n";
  const auto bad = invoke({"ingest-check", "--schema", "king_county", (root_ / "bad.csv").string()});
  EXPECT_EQ(bad.code, cli::kExitRuntime);
  EXPECT_FALSE(bad.err.empty());
}
