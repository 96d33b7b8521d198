// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dfl::cli {

struct Context {
  std::uint64_t seed = 1;
  std::string config;  // simulation config (JSON)
  std::filesystem::path out_dir = ".";
  bool quiet = false;
  std::vector<std::string> argv;  // as invoked, recorded in the manifest
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  void info(std::string_view message) const;
  void warn(std::string_view message) const;
};

struct LocalizerFlags {
  double gamma_th = 4.0;
  double r_th = 0.5;
  double grid = 0.1;
  double vote_radius = 0.3;
  std::string estimator = "variance";
  bool segment_distance = false;
};

struct SimulateOptions {
  std::string scene;           // empty: built-in paper layout
  double grid = 0.6;           // test-grid spacing
  std::string positions_file;  // overrides the grid
  std::size_t random = 0;      // overrides the grid: N uniform positions
  bool emit_frames = false;
};

struct LocalizeOptions {
  std::string scene;
  std::string calibration;
  std::vector<std::string> traces;
  LocalizerFlags localizer;
  bool no_spatial_filter = false;  // add plain-WLS columns for A/B
};

struct EvaluateOptions {
  std::string estimates;
  std::string truth;
  std::vector<std::string> sweep;  // {kind, range}
  std::string scene;
  std::string calibration;
  std::vector<std::string> traces;
  LocalizerFlags localizer;
  double truth_radius = 0.3;
  int single_channel = 0;  // 802.15.4 channel; 0 = first in the plan
  std::vector<int> channel_subset;  // channel order for the channels sweep
  double grid_spacing = 0.6;
};

struct DecodeOptions {
  std::string input;
  std::size_t sensors = 0;
  std::string scene;
  std::vector<int> channels;
  std::size_t channel_count = 16;
  std::string to_trace;
  std::string role = "observation";
  int position_id = 0;
};

struct MakeSceneOptions {
  std::string layout = "paper";
  std::size_t sensors = 16;
  double width = 4.2;
  double height = 3.6;
  std::string name = "scene.scene";
};

int cmd_simulate(const Context& ctx, const SimulateOptions& opts);
int cmd_localize(const Context& ctx, const LocalizeOptions& opts);
int cmd_evaluate(const Context& ctx, const EvaluateOptions& opts);
int cmd_decode_frames(const Context& ctx, const DecodeOptions& opts);
int cmd_make_scene(const Context& ctx, const MakeSceneOptions& opts);

}  // namespace dfl::cli
