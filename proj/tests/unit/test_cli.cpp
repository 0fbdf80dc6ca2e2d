#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" DEFLAB_BIN "\" " + args + " 2>/dev/null";
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("deflab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string scenario(const std::string& name) {
    const Outcome r = run("scenario " + name + " --dir " + dir_.string());
    EXPECT_EQ(r.code, 0) << r.out;
    return (dir_ / name).string();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, CheckVerdictsAndEnvelope) {
  const std::string bin = scenario("binomial");
  const Outcome ok = run("check --tree " + bin + "/tree.json");
  ASSERT_EQ(ok.code, 0) << ok.out;
  const json j = json::parse(ok.out);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["tool"], "deflab");
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_EQ(j["provenance"]["module"], "arbitrage");
  EXPECT_EQ(j["provenance"]["operation"], "check_na/check_na1");
  EXPECT_TRUE(j.contains("timing"));

  const std::string drift = scenario("deterministic-drift");
  const Outcome bad = run("check --tree " + drift + "/tree.json");
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(json::parse(bad.out)["verdict"], "fail");
}

TEST_F(Cli, ReportFileMatchesStdout) {
  const std::string bin = scenario("two-step-binomial");
  const std::string report = (dir_ / "r.json").string();
  const Outcome r = run("check --tree " + bin + "/tree.json --report " + report);
  ASSERT_EQ(r.code, 0);
  ASSERT_TRUE(fs::exists(report));
  std::ifstream in(report);
  const json j = json::parse(in);
  EXPECT_EQ(j["verdict"], "pass");
}

TEST_F(Cli, DeflateThenVerify) {
  const std::string bin = scenario("binomial");
  const std::string out = (dir_ / "z.json").string();
  ASSERT_EQ(run("deflate --tree " + bin + "/tree.json --out " + out + " --normalize").code, 0);
  ASSERT_TRUE(fs::exists(out));
  EXPECT_EQ(run("ky-verify --tree " + out).code, 0);
  EXPECT_EQ(run("foellmer --tree " + out + " --out " + (dir_ / "q.json").string()).code, 0);
}

TEST_F(Cli, UsageAndIoErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("check").code, 2);
  EXPECT_EQ(run("check --tree " + (dir_ / "missing.json").string()).code, 2);
  EXPECT_EQ(run("scenario no-such-scenario --dir " + dir_.string()).code, 2);
  EXPECT_EQ(run("simulate --scenario nope").code, 2);
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("--version").code, 0);
}

TEST_F(Cli, SeedFromEnvironment) {
  const Outcome flag = run("simulate --scenario levy --paths 200 --steps 8 --seed 11");
  const Outcome env = run("simulate --scenario levy --paths 200 --steps 8", "DEFLATOR_LAB_SEED=11");
  const json a = json::parse(flag.out);
  const json b = json::parse(env.out);
  EXPECT_EQ(a["config"]["seed"], 11);
  EXPECT_EQ(a["config"]["seed_source"], "flag");
  EXPECT_EQ(b["config"]["seed"], 11);
  EXPECT_EQ(b["config"]["seed_source"], "DEFLATOR_LAB_SEED");
  EXPECT_EQ(a["result"], b["result"]);
}

TEST_F(Cli, SmallSimulationIsInsufficient) {
  const Outcome r = run("simulate --scenario diffusion --paths 50 --steps 8");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("insufficient-sample"), std::string::npos);
}

TEST_F(Cli, EnlargementCommands) {
  const std::string dir = scenario("insider-binomial");
  const std::string tree = " --tree " + dir + "/tree.json --label-map " + dir + "/labels-terminal.json";
  EXPECT_EQ(run("enlarge jacod" + tree).code, 0);
  EXPECT_EQ(run("enlarge universal-z" + tree).code, 0);
  EXPECT_EQ(run("enlarge insider" + tree + " --event up").code, 0);
  EXPECT_EQ(run("enlarge logutility" + tree).code, 0);
  EXPECT_EQ(run("enlarge insider --tree " + dir + "/tree.json --event up").code, 2);
}
