#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun Exec(const std::string& args) {
  const std::string cmd = std::string(RTM_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rtm_cli_test_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string Read(const std::string& name) {
    std::ifstream in(dir_ / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  std::string Path(const std::string& name) { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(Exec("").code, 1);
  EXPECT_EQ(Exec("frobnicate").code, 1);
  EXPECT_EQ(Exec("solve").code, 1);
  EXPECT_EQ(Exec("--help").code, 0);
}

TEST_F(CliTest, GenerateSolveEvaluate) {
  const std::string gen = Write(
      "gen.json",
      R"({"num_demands": 3, "num_supplies": 6, "theta": 2,
          "prob": {"model": "uniform", "lo": 0.7, "hi": 0.9}, "seed": 4})");
  ASSERT_EQ(Exec("generate --config " + gen + " --out " + Path("inst.json")).code, 0);

  const CliRun solved = Exec("solve --instance " + Path("inst.json") +
                          " --method surrogate --out " + Path("rep.json"));
  ASSERT_EQ(solved.code, 0);
  const json rep = json::parse(Read("rep.json"));
  EXPECT_EQ(rep["method"], "surrogate");

  const CliRun eval = Exec("evaluate --instance " + Path("inst.json") + " --rec " +
                        Path("rep.json") + " --samples 20000");
  ASSERT_EQ(eval.code, 0);
  const json ev = json::parse(eval.out);
  EXPECT_NEAR(ev["exact"]["total"].get<double>(),
              rep["exact_value"].get<double>(), 1e-12);
  EXPECT_NEAR(ev["monte_carlo"]["total"].get<double>(),
              rep["exact_value"].get<double>(),
              5 * ev["monte_carlo"]["std_error"].get<double>() + 1e-12);
}

TEST_F(CliTest, ConfigErrorsExitOne) {
  const std::string gen = Write(
      "gen.json", R"({"num_demands": 2, "num_supplies": 3, "theta": 2,
                      "prob": {"model": "homogeneous", "p": 0.5}})");
  ASSERT_EQ(Exec("generate --config " + gen + " --out " + Path("inst.json")).code, 0);
  EXPECT_EQ(Exec("solve --instance " + Path("inst.json") + " --method nope").code, 1);
  EXPECT_EQ(Exec("solve --instance " + Path("inst.json") + " --tau -1").code, 1);
  EXPECT_EQ(Exec("solve --instance " + Path("inst.json") + " --method npp").code, 1);
  const std::string bad_rec = Write("rec.json", R"({"lists": [[0, 0], []]})");
  EXPECT_EQ(Exec("evaluate --instance " + Path("inst.json") + " --rec " + bad_rec).code, 1);
  const std::string broken = Write("broken.json", "{\"num_demands\": ");
  EXPECT_EQ(Exec("generate --config " + broken).code, 1);
  const std::string unknown = Write("unknown.json", R"({"num_demands": 2, "x": 1})");
  EXPECT_EQ(Exec("generate --config " + unknown).code, 1);
}

TEST_F(CliTest, MissingFileIsRuntimeError) {
  EXPECT_EQ(Exec("solve --instance " + Path("absent.json")).code, 2);
}

TEST_F(CliTest, BenchWritesReports) {
  const std::string cfg = Write(
      "bench.json", R"({"seed": 1, "replications": 1, "methods": ["dap", "surrogate"],
          "grid": [{"num_demands": 3, "num_supplies": 6, "theta": 2}],
          "output_dir": ")" + Path("out") + R"("})");
  const CliRun run = Exec("bench --config " + cfg);
  ASSERT_EQ(run.code, 0);
  EXPECT_NE(run.out.find("surrogate"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "results.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "timing.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "summary.json"));

  ASSERT_EQ(Exec("bench --config " + cfg + " --methods dap --out " + Path("o2")).code, 0);
  const std::string csv = Read("o2/results.csv");
  EXPECT_EQ(csv.find("surrogate"), std::string::npos);
  EXPECT_EQ(Exec("bench --config " + cfg + " --methods cplex").code, 1);
}

TEST_F(CliTest, SweepAndOos) {
  const std::string sweep = Write(
      "sweep.json", R"({"replications": 2, "methods": ["dap", "surrogate"],
          "grid": [{"num_demands": 3, "num_supplies": 6, "theta": 2}],
          "sweep": {"axis": "p", "values": [0.5, 0.9]},
          "output_dir": ")" + Path("s") + R"("})");
  const CliRun s = Exec("sweep --config " + sweep);
  ASSERT_EQ(s.code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "s" / "sweep.csv"));
  const std::string oos = Write(
      "oos.json", R"({"replications": 1, "methods": ["dap", "surrogate"],
          "grid": [{"num_demands": 3, "num_supplies": 6, "theta": 2}],
          "perturbations": [{"kind": "OutL"}, {"kind": "OutNL", "width": 0.2}],
          "mc_eval_samples": 2000,
          "output_dir": ")" + Path("o") + R"("})");
  ASSERT_EQ(Exec("oos --config " + oos).code, 0);
  const std::string csv = Read("o/results.csv");
  EXPECT_NE(csv.find("OutL"), std::string::npos);
  EXPECT_NE(csv.find("monte_carlo"), std::string::npos);
}

TEST_F(CliTest, Bounds) {
  const std::string in = Write(
      "b.json", R"({"theta": 4, "tau": 0.01, "num_demands": 5, "num_supplies": 20,
                    "a": 5, "b": 10, "p_lo": 0.8, "p_hi": 0.8})");
  const CliRun r = Exec("bounds --config " + in);
  ASSERT_EQ(r.code, 0);
  const json doc = json::parse(r.out);
  EXPECT_NEAR(doc["theorem1"]["gap_bound"].get<double>(), 0.1151, 1e-4);
  const std::string bad = Write("bad.json", R"({"theta": 4, "p_lo": 0})");
  EXPECT_EQ(Exec("bounds --config " + bad).code, 1);
  EXPECT_EQ(Exec("bounds").code, 1);
}

TEST_F(CliTest, BoundsObserved) {
  const std::string gen = Write(
      "gen.json", R"({"num_demands": 2, "num_supplies": 4, "theta": 2,
                      "prob": {"model": "uniform", "lo": 0.7, "hi": 0.9}, "seed": 9})");
  ASSERT_EQ(Exec("generate --config " + gen + " --out " + Path("inst.json")).code, 0);
  const CliRun r = Exec("bounds --instance " + Path("inst.json") + " --observed");
  ASSERT_EQ(r.code, 0);
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["observed"]["reference_method"], "brute_force");
  EXPECT_LE(doc["observed"]["surrogate_gap"].get<double>(),
            doc["theorem2"]["gap_bound"].get<double>());
}

}  // namespace
