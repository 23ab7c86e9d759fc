#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sys/wait.h>

#include "support.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const auto dir = edgewear::support::scratch_dir(std::string("cli_out_") + info->name());
  const std::string cmd =
      std::string(EDGEWEAR_CLI_PATH) + " --out-dir " + dir.string() + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  while (auto n = fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string data(const std::string& rel) { return (edgewear::support::data_dir() / rel).string(); }

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("kws").code, 2);
  EXPECT_EQ(run("--format xml power-report").code, 2);
  const auto r = run("dataset summarize /no/such/corpus");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("no such file"), std::string::npos) << r.out;
}

TEST(Cli, PowerReport) {
  const auto r = run("power-report");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("2.22 h"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("28.2 min"), std::string::npos) << r.out;
}

TEST(Cli, CodecRoundTrip) {
  const auto dir = edgewear::support::scratch_dir("cli_codec");
  const auto ima = (dir / "x.ima").string();
  auto r = run("codec encode " + data("fixtures/query_300.wav") + " " + ima);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("ratio"), std::string::npos);
  r = run("codec decode " + ima + " " + (dir / "x.wav").string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "x.wav"));
}

TEST(Cli, IntentClassify) {
  const auto r = run("intent classify --model " + data("models/intent.json") + " \"take a photo\"");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("device_control"), std::string::npos) << r.out;
}

TEST(Cli, BadScenarioExitsTwo) {
  const auto dir = edgewear::support::scratch_dir("cli_scn");
  std::ofstream(dir / "s.json") << R"({"name": "x", "kind": "session", "bogus": 1})";
  const auto r = run("simulate " + (dir / "s.json").string());
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("bogus"), std::string::npos) << r.out;
}
