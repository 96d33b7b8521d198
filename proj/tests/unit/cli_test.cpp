// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli/cli.hpp"
#include "dfl/trace.hpp"

namespace dfl::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dfl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run_cli(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run(std::move(args), out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  static std::vector<std::string> lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
  }

  void write_config(const std::string& name, const std::string& json) {
    std::ofstream(path(name)) << json;
  }

  std::string write_positions() {
    std::ofstream(path("positions.txt")) << "2.1 1.8\n";
    return path("positions.txt");
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, MakeScene) {
  ASSERT_EQ(run_cli({"--out-dir", path("s"), "make-scene"}), kExitOk) << err_.str();
  const auto scene = load_scene(path("s/scene.scene"));
  EXPECT_EQ(scene.sensor_count(), 16u);
  ASSERT_EQ(run_cli({"--out-dir", path("s"), "make-scene", "--layout", "perimeter", "--sensors", "8", "--name",
                     "p.scene"}),
            kExitOk);
  EXPECT_EQ(load_scene(path("s/p.scene")).sensor_count(), 8u);
  EXPECT_TRUE(fs::exists(path("s/make-scene.manifest.json")));
  EXPECT_EQ(run_cli({"--out-dir", path("s"), "make-scene", "--layout", "hexagon"}), kExitConfig);
}

TEST_F(CliTest, ParseErrorsAreConfigErrors) {
  EXPECT_EQ(run_cli({}), kExitConfig);
  EXPECT_EQ(run_cli({"frobnicate"}), kExitConfig);
  EXPECT_EQ(run_cli({"simulate", "--grid"}), kExitConfig);
  EXPECT_EQ(run_cli({"--version"}), kExitOk);
  EXPECT_FALSE(out_.str().empty());
}

TEST_F(CliTest, SimulateLocalizeEvaluate) {
  write_config("fast.json", R"({"channels": 8, "samples": 10, "noise_sigma_db": 0.5})");
  ASSERT_EQ(run_cli({"--seed", "3", "--config", path("fast.json"), "--out-dir", path("run"), "--quiet", "simulate",
                     "--grid", "1.2"}),
            kExitOk)
      << err_.str();
  EXPECT_TRUE(fs::exists(path("run/scene.scene")));
  EXPECT_TRUE(fs::exists(path("run/calibration.trace")));
  std::vector<std::string> traces;
  for (const auto& e : fs::directory_iterator(path("run"))) {
    const auto name = e.path().filename().string();
    if (name.starts_with("obs_")) traces.push_back(e.path().string());
  }
  std::sort(traces.begin(), traces.end());
  ASSERT_EQ(traces.size(), 6u);  // 3 x 2 interior grid points
  const auto cal = read_trace(fs::path(path("run/calibration.trace")));
  EXPECT_EQ(cal.header.role, TraceRole::calibration);
  EXPECT_EQ(cal.tensor.channels(), 8u);

  std::vector<std::string> args{"--out-dir", path("loc"), "--quiet", "localize", "--calibration",
                                path("run/calibration.trace"), "--no-spatial-filter", "--trace"};
  args.insert(args.end(), traces.begin(), traces.end());
  const int rc = run_cli(args);
  EXPECT_TRUE(rc == kExitOk || rc == kExitGeometry) << err_.str();
  const auto est = lines(path("loc/estimates.csv"));
  ASSERT_EQ(est.size(), 7u);
  EXPECT_EQ(est[0],
            "position_id,true_x,true_y,x,y,coarse_x,coarse_y,status,detected,filtered,wls_x,wls_y,wls_status");
  EXPECT_EQ(lines(path("loc/votes.csv"))[0], "position_id,cell,column,row,x,y,votes");

  ASSERT_EQ(run_cli({"--out-dir", path("ev"), "evaluate", "--estimates", path("loc/estimates.csv")}), kExitOk)
      << err_.str();
  const auto metrics = lines(path("ev/metrics.csv"));
  ASSERT_EQ(metrics.size(), 3u);
  EXPECT_EQ(metrics[0],
            "variant,positions,failures,RMSE,mean_error,q1,median,q3,lower_whisker,upper_whisker,outlier_count");
  EXPECT_TRUE(metrics[1].starts_with("rwls,"));
  EXPECT_TRUE(metrics[2].starts_with("wls,"));
  EXPECT_EQ(lines(path("ev/cdf.csv"))[0], "variant,error,fraction");

  std::vector<std::string> sweep{"--out-dir", path("sw"), "evaluate", "--sweep", "gamma-th", "2:4:1",
                                 "--calibration", path("run/calibration.trace"), "--trace"};
  sweep.insert(sweep.end(), traces.begin(), traces.end());
  ASSERT_EQ(run_cli(sweep), kExitOk) << err_.str();
  EXPECT_EQ(lines(path("sw/sweep_gamma_th.csv")).size(), 1u + 3u * 4u);
}

TEST_F(CliTest, SimulatedChannelSweep) {
  write_config("fast.json", R"({"channels": 4, "samples": 10})");
  ASSERT_EQ(run_cli({"--config", path("fast.json"), "--out-dir", path("sw"), "evaluate", "--sweep", "channels",
                     "2:4", "--positions-grid", "1.2", "--channel-subset", "14,13,12,11"}),
            kExitOk)
      << err_.str();
  EXPECT_EQ(lines(path("sw/sweep_channels.csv")).size(), 1u + 3u * 2u);
}

TEST_F(CliTest, FramesRoundTripThroughDecode) {
  write_config("fast.json", R"({"channels": 3, "samples": 4})");
  ASSERT_EQ(run_cli({"--config", path("fast.json"), "--out-dir", path("run"), "--quiet", "simulate", "--random",
                     "1", "--emit-frames"}),
            kExitOk)
      << err_.str();
  ASSERT_TRUE(fs::exists(path("run/obs_0001.frames")));
  ASSERT_EQ(run_cli({"--out-dir", path("dec"), "decode-frames", "--input", path("run/obs_0001.frames"),
                     "--sensors", "16", "--channel-count", "3", "--scene", path("run/scene.scene"), "--to-trace",
                     path("dec/obs.trace"), "--position-id", "1"}),
            kExitOk)
      << err_.str();
  const auto original = read_trace(fs::path(path("run/obs_0001.trace")));
  const auto decoded = read_trace(fs::path(path("dec/obs.trace")));
  EXPECT_EQ(decoded.tensor, original.tensor);
  EXPECT_EQ(lines(path("dec/frames.csv")).size(), 1u + 3u * 2u * 16u + 2u);
}

TEST_F(CliTest, ExitCodesForBadData) {
  EXPECT_EQ(run_cli({"--out-dir", path("x"), "localize", "--calibration", path("missing.trace"), "--trace",
                     path("missing2.trace")}),
            kExitData);
  EXPECT_NE(err_.str().find("error:"), std::string::npos);
  std::ofstream(path("junk.frames"), std::ios::binary) << std::string("\x02\x0b\x01", 3);
  EXPECT_EQ(run_cli({"--out-dir", path("x"), "decode-frames", "--input", path("junk.frames"), "--sensors", "16"}),
            kExitData);
  write_config("bad.json", R"({"samples": -3})");
  EXPECT_EQ(run_cli({"--config", path("bad.json"), "--out-dir", path("x"), "simulate"}), kExitConfig);
}

TEST_F(CliTest, ManifestReplayIsByteIdentical) {
  write_config("fast.json", R"({"channels": 2, "samples": 4, "noise_sigma_db": 0.5})");
  ASSERT_EQ(run_cli({"--seed", "9", "--config", path("fast.json"), "--out-dir", path("a"), "--quiet", "simulate",
                     "--random", "3"}),
            kExitOk);
  const auto manifest = nlohmann::json::parse(slurp(path("a/simulate.manifest.json")));
  EXPECT_EQ(manifest.at("subcommand"), "simulate");
  EXPECT_EQ(manifest.at("seed"), 9);
  ASSERT_EQ(run_cli({"--manifest", path("a/simulate.manifest.json"), "--out-dir", path("b")}), kExitOk)
      << err_.str();
  for (const auto& name : {"calibration.trace", "obs_0001.trace", "obs_0003.trace", "scene.scene"}) {
    EXPECT_EQ(slurp(path(std::string("a/") + name)), slurp(path(std::string("b/") + name))) << name;
  }
}

TEST_F(CliTest, ShippedDataFilesLoad) {
  const fs::path data = DFL_DATA_DIR;
  for (const char* config : {"default.json", "realism.json", "rich_multipath.json", "confounders.json"}) {
    EXPECT_EQ(run_cli({"--config", (data / config).string(), "--out-dir", path(config), "--quiet", "simulate",
                       "--scene", (data / "paper_layout.scene").string(), "--positions",
                       write_positions()}),
              kExitOk)
        << config << ": " << err_.str();
  }
}

}  // namespace
}  // namespace dfl::cli
