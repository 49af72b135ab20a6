#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "robofruit/cli.hpp"
#include "robofruit/error.hpp"

using namespace robofruit;
using namespace robofruit::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("robofruit_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Cli, SeedLists) {
  EXPECT_EQ(parse_seed_list({"7"}), (std::vector<std::uint64_t>{7}));
  EXPECT_EQ(parse_seed_list({"3-5,1", "4"}), (std::vector<std::uint64_t>{1, 3, 4, 5}));
  EXPECT_EQ(parse_seed_list({"1-100"}).size(), 100u);
  EXPECT_THROW(parse_seed_list({"5-3"}), Error);
  EXPECT_THROW(parse_seed_list({"x"}), Error);
  EXPECT_THROW(parse_seed_list({""}), Error);
}

TEST(Cli, WorkerCountFromEnvironment) {
  setenv("ROBOFRUIT_SIM_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  setenv("ROBOFRUIT_SIM_THREADS", "zero", 1);
  EXPECT_GE(worker_count(), 1u);
  unsetenv("ROBOFRUIT_SIM_THREADS");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, kUsage);
  EXPECT_EQ(run({"fly"}).code, kUsage);
  EXPECT_EQ(run({"run", "--format", "xml"}).code, kUsage);
  EXPECT_EQ(run({"run", "--policy", "random"}).code, kUsage);
  EXPECT_EQ(run({"run", "--config", "/nonexistent/cfg.json"}).code, kUsage);
  EXPECT_EQ(run({"run", "--seed", "1", "--seeds", "1-3"}).code, kUsage);
  EXPECT_EQ(run({"--help"}).code, kOk);
}

TEST(Cli, PrintDefaultConfig) {
  const auto r = run({"--print-default-config"});
  ASSERT_EQ(r.code, kOk);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["profile"], "default");
  EXPECT_TRUE(j.contains("scene"));
  EXPECT_TRUE(j.contains("trial"));
}

TEST(Cli, Replay) {
  auto r = run({"replay"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("S_r 82.8%"), std::string::npos);
  EXPECT_NE(r.out.find("SD_r 87.1%"), std::string::npos);
  r = run({"replay", "--format", "json"});
  ASSERT_EQ(r.code, kOk);
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(r.out)["S_r"].get<double>(), 82.8);
  EXPECT_EQ(run({"replay", "/nonexistent/table.csv"}).code, kDataError);
  const auto bad = fs::temp_directory_path() / "robofruit_cli_bad_table.csv";
  std::ofstream(bad) << "trial_no,total_fruit\n1,2\n";
  EXPECT_EQ(run({"replay", bad.string()}).code, kDataError);
  fs::remove(bad);
}

TEST(Cli, TimestampsOnlyWhenAsked) {
  const auto plain = run({"replay", "--format", "json"});
  EXPECT_FALSE(nlohmann::json::parse(plain.out).contains("generated_at"));
  EXPECT_EQ(run({"replay", "--format", "json"}).out, plain.out);
  const auto stamped = run({"replay", "--format", "json", "--timestamps"});
  ASSERT_EQ(stamped.code, kOk);
  const auto j = nlohmann::json::parse(stamped.out);
  EXPECT_TRUE(j["generated_at"].is_string());
  EXPECT_DOUBLE_EQ(j["S_r"].get<double>(), 82.8);
  const auto csv = run({"replay", "--format", "csv"});
  EXPECT_EQ(run({"replay", "--format", "csv", "--timestamps"}).out, csv.out);
}

TEST(Cli, GenerateScene) {
  const auto r = run({"generate", "--seed", "4"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["berries"].size(), 25u);
  EXPECT_EQ(j["rng_seed"], 4);
  EXPECT_EQ(run({"generate", "--seed", "4"}).out, r.out);
}

TEST(Cli, RunGoldenWritesOutputs) {
  const auto dir = fresh_dir("golden");
  const auto r = run({"run", "--profile", "golden", "--seeds", "1-3", "--out", dir.string(),
                      "--format", "json", "--format", "csv", "--format", "text"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("S_r 100.0%"), std::string::npos);
  for (const char* f : {"trial_logs.jsonl", "attempts.csv", "report.json", "report.csv", "report.txt"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  std::ifstream logs(dir / "trial_logs.jsonl");
  std::string line;
  int n = 0;
  while (std::getline(logs, line)) {
    EXPECT_EQ(nlohmann::json::parse(line)["seed"], ++n);
  }
  EXPECT_EQ(n, 3);
  fs::remove_all(dir);
}

TEST(Cli, RunIsIndependentOfThreadCount) {
  setenv("ROBOFRUIT_SIM_THREADS", "1", 1);
  const auto one = run({"run", "--profile", "golden", "--seeds", "1-6", "--format", "json"});
  setenv("ROBOFRUIT_SIM_THREADS", "4", 1);
  const auto four = run({"run", "--profile", "golden", "--seeds", "1-6", "--format", "json"});
  unsetenv("ROBOFRUIT_SIM_THREADS");
  ASSERT_EQ(one.code, kOk);
  EXPECT_EQ(one.out, four.out);
}

TEST(Cli, BadGprModelIsAConfigError) {
  const auto r = run({"run", "--profile", "calibrated", "--gpr-model", "/nonexistent/model.json"});
  EXPECT_EQ(r.code, kConfigError);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, ConfigFileAndProfileConflict) {
  const auto path = fs::temp_directory_path() / "robofruit_cli_cfg.json";
  std::ofstream(path) << R"({"profile": "golden", "scene": {"berry_count": 8}})";
  auto r = run({"run", "--config", path.string(), "--format", "json"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["N_a"], 8);
  EXPECT_EQ(run({"run", "--config", path.string(), "--profile", "calibrated"}).code, kUsage);
  std::ofstream(path) << R"({"scene": {"berries": 8}})";
  EXPECT_EQ(run({"run", "--config", path.string()}).code, kConfigError);
  fs::remove(path);
}

TEST(Cli, TeachThenRunWithModel) {
  const auto dir = fresh_dir("teach");
  fs::create_directories(dir);
  const auto model = (dir / "model.json").string();
  auto r = run({"teach", "--profile", "calibrated", "--samples", "40", "--out", model});
  ASSERT_EQ(r.code, kOk) << r.err;
  r = run({"run", "--profile", "calibrated", "--seed", "2", "--gpr-model", model, "--format", "json"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["trials"], 1);
  const auto csv = (dir / "samples.csv").string();
  EXPECT_EQ(run({"teach", "--samples", "10", "--out", csv}).code, kOk);
  EXPECT_TRUE(fs::exists(csv));
  fs::remove_all(dir);
}
