#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "infolearn/config.hpp"
#include "infolearn/digest.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(INFOLEARN_CLI) + " " + args + " 2>&1";
  Result r{-1, {}};
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("infolearn_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

nlohmann::json manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  return nlohmann::json::parse(in);
}

std::string first_data_line(const std::string& text, int skip) {
  std::size_t pos = 0;
  for (int i = 0; i < skip; ++i) pos = text.find('\n', pos) + 1;
  return text.substr(pos, text.find('\n', pos) - pos);
}

}  // namespace

TEST(Cli, ClassifyVerdicts) {
  const auto dir = scratch("classify");
  auto r = run("classify --sigma 1 --tau 2 --out " + dir.string());
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "Fatter");
  r = run("classify --sigma 1 --tau 1 --out " + dir.string());
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "Neither");
  r = run("classify --mixture 0.5 --sigma 1 --out " + dir.string());
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "Fatter");
  EXPECT_TRUE(fs::exists(dir / "classify.csv"));
  EXPECT_NE(r.out.find("x,log_L_good,log_L_bad,log_R_good,log_R_bad"), std::string::npos);
}

TEST(Cli, ClassifyUndeterminedExitCode) {
  const auto dir = scratch("undetermined");
  // Over [1, 1.01] the mixture ratios show no tail trend either way.
  const auto r = run("classify --mixture 0.5 --sigma 1 --x-max 1.01 --grid 16 --out " + dir.string());
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "Undetermined");
  EXPECT_EQ(r.status, 2);
}

TEST(Cli, UsageErrors) {
  const auto dir = scratch("usage");
  auto r = run("classify --tau 2 --out " + dir.string());
  EXPECT_EQ(r.status, 64);
  EXPECT_NE(r.out.find("--sigma"), std::string::npos);
  EXPECT_NE(r.out.find("Usage"), std::string::npos);
  r = run("simulate --out " + dir.string());
  EXPECT_EQ(r.status, 64);
  r = run("no-such-command");
  EXPECT_EQ(r.status, 64);
  r = run("");
  EXPECT_EQ(r.status, 64);
  r = run("classify --sigma abc --out " + dir.string());
  EXPECT_EQ(r.status, 64);
  r = run("simulate --sigma 1 --omega 7 --out " + dir.string());
  EXPECT_EQ(r.status, 64);
}

TEST(Cli, PathRows) {
  const auto dir = scratch("path");
  const auto r = run("path --sigma 1 --horizon 3 --out " + dir.string());
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("t,r\n1,0\n2,1.6682"), std::string::npos) << r.out;
}

TEST(Cli, AgreeProbDiverged) {
  const auto dir = scratch("agree");
  const auto r = run("agree-prob --regime f_b --sigma 1 --out " + dir.string());
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("diverged: true"), std::string::npos);
  std::ifstream in(dir / "agree_prob.csv");
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "# diverged: true");
}

TEST(Cli, ObserverReplay) {
  const auto dir = scratch("replay");
  {
    std::ofstream f(dir / "actions.txt");
    f << "G\nG\n";
  }
  const auto r = run("observer-replay --sigma 1 --tau 2 --gamma 0.5 --actions " +
                     (dir / "actions.txt").string() + " --out " + dir.string());
  ASSERT_EQ(r.status, 0);
  const auto last = first_data_line(r.out, 3);
  ASSERT_EQ(last.substr(0, 2), "3,");
  const double q = std::stod(last.substr(2, last.find(',', 2) - 2));
  EXPECT_NEAR(q, 0.571, 5e-4);
}

TEST(Cli, SimulateWritesManifest) {
  const auto dir = scratch("simulate");
  const auto r = run("simulate --sigma 1 --tau 2 --omega 1 --theta g -T 200 -N 50 --seed 9 "
                     "--record-q-trace true --out " + dir.string());
  ASSERT_EQ(r.status, 0) << r.out;
  const auto m = manifest(dir);
  EXPECT_EQ(m["master_seed"], 9);
  EXPECT_EQ(m["command"], "simulate");
  for (const auto& o : m["outputs"])
    EXPECT_EQ(o["sha256"], infolearn::sha256_file(dir / o["file"].get<std::string>()));
  EXPECT_EQ(m["outputs"].size(), 2u + 50u);

  std::ifstream in(dir / "aggregates.json");
  const auto agg = nlohmann::json::parse(in);
  EXPECT_TRUE(agg["herd_correctness_rate"].is_number());
  EXPECT_TRUE(fs::exists(dir / "q_traces" / "trajectory_000049.csv"));

  // The echoed config re-parses to the configuration that was run.
  const auto echoed = infolearn::Config::parse(m["config"].get<std::string>());
  EXPECT_EQ(echoed.get_double("model.sigma"), 1.0);
  EXPECT_EQ(echoed.get_uint("experiment.trajectories"), 50u);
  EXPECT_EQ(echoed.get_uint("run.seed"), 9u);
  EXPECT_EQ(infolearn::Config::parse(echoed.serialize()), echoed);

  // Re-running from the echoed config reproduces the digests.
  const auto dir2 = scratch("simulate_rerun");
  {
    std::ofstream f(dir2 / "echo.ini");
    f << m["config"].get<std::string>();
  }
  const auto r2 = run("simulate --config " + (dir2 / "echo.ini").string() + " --out " + dir2.string());
  ASSERT_EQ(r2.status, 0) << r2.out;
  EXPECT_EQ(manifest(dir2)["outputs"], m["outputs"]);
}

TEST(Cli, FlagsOverrideConfig) {
  const auto dir = scratch("override");
  {
    std::ofstream f(dir / "run.ini");
    f << "[model]\nsigma = 1\ntau = 0.5\n";
  }
  auto r = run("classify --config " + (dir / "run.ini").string() + " --out " + dir.string());
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "Thinner");
  r = run("classify --config " + (dir / "run.ini").string() + " --tau 3 --out " + dir.string());
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "Fatter");
}

TEST(Cli, OutputDirFromEnvironment) {
  const auto dir = scratch("env");
  const std::string cmd = "INFOLEARN_OUT=" + dir.string() + " " + INFOLEARN_CLI + " path --sigma 1 -T 4 > /dev/null";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "path.csv"));
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
}
