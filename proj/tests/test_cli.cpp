#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "delvar/cli.hpp"
#include "support.hpp"

using namespace delvar;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string sample(const std::string& name) { return std::string(SAMPLES_DIR) + "/" + name; }

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("delvar-cli-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

/// JSON object that follows the CSV when a summary is requested.
io::json trailing_json(const std::string& text) { return io::parse_json(text.substr(text.find('{'))); }

}  // namespace

TEST(Cli, List) {
  const CliRun r = run({"list"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("example1,variational"), std::string::npos);
  EXPECT_NE(r.out.find("autonomous-lq,control"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"residuals", "--grid", "abc", "--example", "example1"}).code, 2);
  EXPECT_EQ(run({"residuals", "--example", "example1", "--problem", "x.json"}).code, 2);
  const CliRun help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("residuals"), std::string::npos);
}

TEST(Cli, ResidualsExample1) {
  TempDir dir;
  const std::string path = dir.file("r.csv");
  const CliRun r = run({"residuals", "--example", "example1", "--grid", "200", "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(slurp(path));
  ASSERT_EQ(rows.size(), 201u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "regime", "el_0", "dr_quantity", "dr_residual", "cdur"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 6u);
    EXPECT_LE(std::abs(std::stod(rows[i][2])), 1e-7);
    const double t = std::stod(rows[i][0]);
    EXPECT_EQ(rows[i][1], t < 1.0 ? "first" : "second");
    EXPECT_EQ(rows[i][5].empty(), t > 1.0);
  }
  const io::json summary = io::parse_json(r.out);
  EXPECT_LE(summary.at("el_sup").get<double>(), 1e-7);
  EXPECT_TRUE(summary.at("hypothesis_violated").get<bool>());

  const CliRun again = run({"residuals", "--example", "example1", "--grid", "200"});
  EXPECT_EQ(again.out, slurp(path));
}

TEST(Cli, ResidualsBadInput) {
  EXPECT_EQ(run({"residuals", "--problem", "/nonexistent/p.json"}).code, 2);
  const CliRun zero = run({"residuals", "--example", "example1", "--grid", "0"});
  EXPECT_EQ(zero.code, 2);
  EXPECT_NE(zero.err.find("EmptyGrid"), std::string::npos);
  EXPECT_EQ(run({"residuals", "--example", "autonomous-lq"}).code, 2);
  EXPECT_EQ(run({"residuals", "--example", "example1", "--lambda", "1,2"}).code, 2);
  EXPECT_EQ(run({"residuals"}).code, 2);
}

TEST(Cli, ConservedExample1) {
  const CliRun r = run({"conserved", "--example", "example1", "--eta", "1", "--xi", "0", "--grid", "200", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out.substr(0, r.out.find('{')));
  ASSERT_EQ(rows[0], (std::vector<std::string>{"t", "regime", "C"}));
  int second = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][1] != "second") continue;
    const double t = std::stod(rows[i][0]);
    EXPECT_NEAR(std::stod(rows[i][2]), -384 * t * t * t + 864 * t * t - 576 * t + 144, 1e-8);
    ++second;
  }
  EXPECT_EQ(second, 100);
  const io::json s = trailing_json(r.out);
  EXPECT_TRUE(s.at("hypothesis_violated").get<bool>());
  EXPECT_GT(s.at("second").at("max_deviation").get<double>(), 10.0);
}

TEST(Cli, ConservedClassicalAndTrivial) {
  const CliRun r = run({"conserved", "--example", "classical-isoperimetric", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const io::json s = trailing_json(r.out);
  EXPECT_LE(s.at("first").at("max_deviation").get<double>(), 1e-6);
  EXPECT_LE(s.at("second").at("max_deviation").get<double>(), 1e-6);
  EXPECT_NEAR(s.at("first").at("mean").get<double>(), -1.0, 1e-10);
  EXPECT_FALSE(s.at("hypothesis_violated").get<bool>());

  const CliRun zero = run({"conserved", "--example", "example1", "--eta", "0", "--xi", "0"});
  ASSERT_EQ(zero.code, 0);
  const auto rows = csv_rows(zero.out);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(std::stod(rows[i][2]), 0.0);

  EXPECT_EQ(run({"conserved", "--example", "example1", "--eta", "1 +"}).code, 2);
  EXPECT_EQ(run({"conserved", "--example", "example1", "--xi", "p"}).code, 2);
}

TEST(Cli, Invariance) {
  const CliRun r = run({"invariance", "--example", "example1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const io::json j = io::parse_json(r.out);
  EXPECT_NEAR(j.at("invariance_defect").get<double>(), 0.0, 1e-6);
  EXPECT_NEAR(j.at("necessary_condition").at("first").get<double>(), 0.0, 1e-5);

  const CliRun part = run({"invariance", "--example", "example1", "--from", "0.5", "--to", "1.5"});
  EXPECT_EQ(part.code, 0);
  EXPECT_EQ(run({"invariance", "--example", "example1", "--from", "1.5", "--to", "0.5"}).code, 2);
}

TEST(Cli, Solve) {
  TempDir dir;
  const CliRun r = run({"solve", "--problem", sample("classical_isoperimetric.json"), "--nodes", "64"});
  ASSERT_EQ(r.code, 0) << r.err;
  const io::json j = io::parse_json(r.out);
  EXPECT_NEAR(j.at("lambda")[0].get<double>(), 4.0, 1e-5);
  EXPECT_EQ(j.at("report").at("outcome"), "converged");
  const Trajectory q = io::trajectory_from_json(j.at("trajectory"));
  EXPECT_NEAR(q.eval(0.5, 0)[0], 0.25, 1e-8);

  const CliRun stuck = run({"solve", "--problem", sample("classical_isoperimetric.json"), "--maxiter", "0"});
  EXPECT_EQ(stuck.code, 3);
  EXPECT_EQ(io::parse_json(stuck.out).at("report").at("outcome"), "non_convergence");

  const std::string bad = dir.file("bad.json");
  std::ofstream(bad) << "{\"type\": \"variational\", ";
  EXPECT_EQ(run({"solve", "--problem", bad}).code, 2);

  const std::string out = dir.file("pmp.json");
  const CliRun pmp = run({"solve", "--example", "delayed-lq-fixed", "--out", out});
  ASSERT_EQ(pmp.code, 0) << pmp.err;
  const io::json pj = io::parse_json(slurp(out));
  const Trajectory p = io::trajectory_from_json(pj.at("p"));
  EXPECT_NEAR(p.eval(0.8, 0)[0], support::LqOracle().p(0.8), 1e-8);
}

TEST(Cli, Verify) {
  const CliRun ex = run({"verify", "example1"});
  EXPECT_EQ(ex.code, 0) << ex.out;
  EXPECT_NE(ex.out.find("result,pass"), std::string::npos);
  EXPECT_NE(ex.out.find("hypothesis"), std::string::npos);

  for (const char* name : {"classical-isoperimetric", "autonomous-lq", "delayed-lq-fixed"}) {
    const CliRun r = run({"verify", name});
    EXPECT_EQ(r.code, 0) << name << "\n" << r.out << r.err;
  }

  const io::json ej = io::parse_json(run({"verify", "example1", "--json"}).out);
  EXPECT_TRUE(ej.at("hypothesis_violated").get<bool>());
  EXPECT_FALSE(io::parse_json(run({"verify", "classical-isoperimetric", "--json"}).out).at("hypothesis_violated").get<bool>());

  const CliRun js = run({"verify", "autonomous-lq", "--json"});
  const io::json j = io::parse_json(js.out);
  EXPECT_TRUE(j.at("pass").get<bool>());
  bool saw_h = false;
  for (const auto& c : j.at("checks")) {
    if (c.at("check").get<std::string>().find("hamiltonian") != std::string::npos) {
      saw_h = true;
      EXPECT_TRUE(c.at("gated").get<bool>());
      EXPECT_LE(c.at("value").get<double>(), 1e-5);
    }
  }
  EXPECT_TRUE(saw_h);

  EXPECT_EQ(run({"verify", "nonesuch"}).code, 2);
  EXPECT_EQ(run({"verify"}).code, 2);
}

TEST(Cli, VerifyGatesFailures) {
  const CliRun r = run({"verify", "example1", "--tol", "1e-30"});
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find("result,FAIL"), std::string::npos);
}
