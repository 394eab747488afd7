// Runs the trunk executable end to end through its public file formats.

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "test_util.h"
#include "trunk/io.h"
#include "trunk/losses.h"

namespace trunk {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult RunCli(const std::string& args) {
  const std::string cmd = std::string(TRUNK_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof(buf), pipe)) > 0;) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Q(const fs::path& p) { return "'" + p.string() + "'"; }

int CountLines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n' ? 1 : 0;
  return n;
}

class CliPipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = TempDir("pipeline");
    const RunResult r = RunCli("--format csv synth --seed 5 --count 4 --out-dir " + Q(dir_ / "scenes"));
    ASSERT_EQ(r.code, 0) << r.out;
    synth_out_ = r.out;
  }

  fs::path dir_;
  std::string synth_out_;
};

TEST_F(CliPipeline, SynthWritesScenes) {
  EXPECT_EQ(CountLines(synth_out_), 5);
  for (const char* name : {"annotations.jsonl", "curves.jsonl", "oracle.csv", "errors.txt",
                           "scene_0000.pfm", "scene_0003.intrinsics.txt"}) {
    EXPECT_TRUE(fs::exists(dir_ / "scenes" / name)) << name;
  }
  EXPECT_EQ(ParseAnnotations(dir_ / "scenes" / "annotations.jsonl").size(), 4u);
  EXPECT_EQ(ParseErrors(dir_ / "scenes" / "errors.txt").size(), 4u);

  // Same seed, same bytes.
  const RunResult again = RunCli("--format csv synth --seed 5 --count 4 --out-dir " + Q(dir_ / "again"));
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(again.out, synth_out_);
  EXPECT_EQ(ReadFileBytes(dir_ / "again" / "scene_0002.pfm"),
            ReadFileBytes(dir_ / "scenes" / "scene_0002.pfm"));
}

TEST_F(CliPipeline, FitLossEvalRoundTrip) {
  const fs::path s = dir_ / "scenes";
  RunResult r = RunCli("fit-gt --annotations " + Q(s / "annotations.jsonl") + " --out " + Q(dir_ / "gt.jsonl"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto gt = ParseCurves(dir_ / "gt.jsonl");
  ASSERT_EQ(gt.size(), 4u);
  EXPECT_TRUE(gt[0].residual_rms && *gt[0].residual_rms < 1e-6);
  EXPECT_EQ(gt[0].parameterization, "uniform");

  r = RunCli("--format csv loss --pred " + Q(s / "curves.jsonl") + " --gt " + Q(dir_ / "gt.jsonl"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "image_id,det,tsl,epl,total");
  EXPECT_EQ(CountLines(r.out), 5);

  r = RunCli("--format csv eval --pred " + Q(s / "curves.jsonl") + " --gt " + Q(dir_ / "gt.jsonl"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("mAP50,1\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("mAP50-95,1\n"), std::string::npos) << r.out;
}

TEST_F(CliPipeline, MeasureScene) {
  const fs::path s = dir_ / "scenes";
  const auto curves = ParseCurves(s / "curves.jsonl");
  WriteCurves({curves[1]}, dir_ / "one.jsonl");
  const RunResult r = RunCli("--format csv measure --pred " + Q(dir_ / "one.jsonl") + " --depth " +
                          Q(s / "scene_0001.pfm") + " --intrinsics " + Q(s / "scene_0001.intrinsics.txt"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "image_id,length_cm,quality,valid_fraction,repaired");
  EXPECT_NE(r.out.find("scene_0001,"), std::string::npos);
}

TEST_F(CliPipeline, ReportFromSynthErrors) {
  const RunResult r = RunCli("report --errors " + Q(dir_ / "scenes" / "errors.txt") + " --out " + Q(dir_ / "rep"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "rep" / "error_report.svg"));
  EXPECT_TRUE(fs::exists(dir_ / "rep" / "error_stats.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "rep" / "error_cumulative.csv"));
}

TEST(Cli, OptimizeWritesCurves) {
  const auto dir = TempDir("opt");
  Eigen::Matrix2Xd cps(2, 5);
  cps << 10, 60, 120, 180, 250, 40, 100, 20, 90, 60;
  WriteCurves({{"x", Eigen::AlignedBox2d(Eigen::Vector2d(0, 0), Eigen::Vector2d(300, 300)), cps,
                std::nullopt, std::nullopt, std::nullopt}},
              dir / "target.jsonl");
  const RunResult r = RunCli("optimize --target " + Q(dir / "target.jsonl") +
                          " --max-iters 1500 --out " + Q(dir / "fit.jsonl") +
                          " --trace-out " + Q(dir / "trace.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto fit = ParseCurves(dir / "fit.jsonl");
  ASSERT_EQ(fit.size(), 1u);
  EXPECT_LT(SamplingLoss(fit[0].curve(), Curve2d(cps), Params::Uniform(50)), 0.5);
  EXPECT_GT(CountLines(ReadFileBytes(dir / "trace.csv")), 2);
}

TEST(Cli, ExitCodes) {
  const auto dir = TempDir("codes");
  EXPECT_EQ(RunCli("--help").code, 0);
  EXPECT_EQ(RunCli("").code, 1);
  EXPECT_EQ(RunCli("frobnicate").code, 1);
  EXPECT_EQ(RunCli("--format xml eval --pred a --gt b").code, 1);

  WriteFileBytes(dir / "bad.jsonl",
                 R"({"image_id":"a","bbox":[5,0,1,1],"keypoints":[[0,0],[1,1]]})" "\n");
  EXPECT_EQ(RunCli("fit-gt --annotations " + Q(dir / "bad.jsonl") + " --out " + Q(dir / "o.jsonl")).code, 1);
  EXPECT_EQ(RunCli("fit-gt --annotations " + Q(dir / "missing.jsonl") + " --out " + Q(dir / "o.jsonl")).code, 1);

  // A curve over a depth map that is mostly holes is rejected.
  DepthMap holes(64, 48, std::nanf(""));
  for (int x = 0; x < 10; ++x) holes.set(x, 20, 1.0f);
  WritePfm(holes, dir / "holes.pfm");
  WriteIntrinsics(CameraIntrinsics{50, 50, 32, 24, 64, 48}, dir / "k.txt");
  WriteCurves({{"c", Eigen::AlignedBox2d(Eigen::Vector2d(0, 0), Eigen::Vector2d(64, 48)),
                Curve2d::Line({2, 20}, {60, 20}).control_points(), 0.9, std::nullopt, std::nullopt}},
              dir / "c.jsonl");
  const RunResult r = RunCli("measure --pred " + Q(dir / "c.jsonl") + " --depth " + Q(dir / "holes.pfm") +
                          " --intrinsics " + Q(dir / "k.txt"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("rejected"), std::string::npos);

  // Intrinsics that disagree with the raster size are a validation error.
  WriteIntrinsics(CameraIntrinsics{50, 50, 32, 24, 640, 480}, dir / "k2.txt");
  EXPECT_EQ(RunCli("measure --pred " + Q(dir / "c.jsonl") + " --depth " + Q(dir / "holes.pfm") +
                " --intrinsics " + Q(dir / "k2.txt"))
                .code,
            1);
}

}  // namespace
}  // namespace trunk
