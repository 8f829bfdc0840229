#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("anticorr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = std::string(ANTICORR_CLI) + " " + args + " > " + (dir_ / "stdout").string() +
                            " 2> " + (dir_ / "stderr").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path write_config(const std::string& yaml) {
    const auto p = dir_ / "config.yaml";
    std::ofstream(p) << yaml;
    return p;
  }

  fs::path dir_;
};

TEST_F(CliTest, run_writes_stream_and_report) {
  const auto config = write_config("source: {run_duration: 5}\n");
  EXPECT_EQ(run("run --config " + config.string() + " --out " + (dir_ / "out").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "run.ctag"));
  const auto report = nlohmann::json::parse(read(dir_ / "out" / "report.json"));
  EXPECT_EQ(report["report"]["verdict"], "copenhagen_consistent");
}

TEST_F(CliTest, simulate_then_analyze_matches_run) {
  const auto config = write_config("model: planck\nsource: {run_duration: 5}\n");
  const auto out = (dir_ / "out").string();
  ASSERT_EQ(run("run --config " + config.string() + " --out " + out), 0);
  const auto from_run = nlohmann::json::parse(read(dir_ / "out" / "report.json"));
  ASSERT_EQ(run("analyze " + out + "/run.ctag"), 0);
  const auto from_analyze = nlohmann::json::parse(read(dir_ / "stdout"));
  EXPECT_EQ(from_run, from_analyze);
}

TEST_F(CliTest, csv_report_format) {
  const auto config = write_config("source: {run_duration: 2}\noutput: {format: csv}\n");
  ASSERT_EQ(run("run --config " + config.string() + " --out " + (dir_ / "out").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "report.csv"));
}

TEST_F(CliTest, bad_config_exits_one) {
  const auto config = write_config("source: {emission_rate: -3}\n");
  EXPECT_EQ(run("run --config " + config.string() + " --out " + (dir_ / "out").string()), 1);
  EXPECT_NE(read(dir_ / "stderr").find("source.emission_rate"), std::string::npos);
  EXPECT_EQ(run("bogus-command"), 1);
  EXPECT_EQ(run("bell-check 0.5 0.5 0.5 0.5 0.5 1.5"), 1);
  EXPECT_EQ(run("poisson-check --replications 10"), 1);
}

TEST_F(CliTest, inconclusive_exits_two_when_asked) {
  // Very bright source: p0 exceeds p1 p2.
  const auto config = write_config("source: {emission_rate: 1.0e8, run_duration: 1.0e-3}\n");
  const auto args = "run --config " + config.string() + " --out " + (dir_ / "out").string();
  EXPECT_EQ(run(args), 0);
  EXPECT_EQ(run(args + " --fail-inconclusive"), 2);
}

TEST_F(CliTest, unreadable_or_corrupt_stream_exits_three) {
  EXPECT_EQ(run("analyze " + (dir_ / "missing.ctag").string()), 3);
  std::ofstream(dir_ / "bad.ctag") << "NOPE and more bytes";
  EXPECT_EQ(run("analyze " + (dir_ / "bad.ctag").string()), 3);
}

TEST_F(CliTest, bell_check_prints_certificate) {
  ASSERT_EQ(run("bell-check 0.5 0.5 0.5 0.25 0.25 0.25"), 0);
  const auto j = nlohmann::json::parse(read(dir_ / "stdout"));
  EXPECT_FALSE(j["feasible"].get<bool>());
  EXPECT_TRUE(j.contains("certificate"));
}

TEST_F(CliTest, poisson_check_writes_json) {
  ASSERT_EQ(run("poisson-check --lambda 1 --replications 2000 --out " + (dir_ / "p").string()), 0);
  const auto j = nlohmann::json::parse(read(dir_ / "p" / "poisson_check.json"));
  EXPECT_NEAR(j["lambda"].get<double>(), 1.0, 1e-12);
}

TEST_F(CliTest, scan_shape_writes_csv_and_summary) {
  const auto config = write_config(
      "source: {run_duration: 20}\napparatus: {transmittance: 1}\nwindow: {alpha: 2.0e-10}\n");
  ASSERT_EQ(run("scan-shape --config " + config.string() + " --out " + (dir_ / "s").string() +
                " --from -6e-9 --to 6e-9 --step 5e-10"),
            0);
  const auto csv = read(dir_ / "s" / "shape_scan.csv");
  EXPECT_EQ(csv.rfind("s,p,ci_lower,ci_upper,hits\n", 0), 0u);
  EXPECT_TRUE(fs::exists(dir_ / "s" / "shape_summary.txt"));
  EXPECT_EQ(run("scan-shape --config " + write_config("apparatus: {transmittance: 0.5}\n").string()), 1);
}

}  // namespace
