// SPDX-License-Identifier: Apache-2.0
#include "cli/cli.hpp"

#include <algorithm>
#include <ostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/manifest.hpp"
#include "dfl/error.hpp"
#include "dfl/version.hpp"

namespace dfl::cli {

namespace {

int exit_code_for(const Error& e) {
  switch (category_of(e.code())) {
    case ErrorCategory::config: return kExitConfig;
    case ErrorCategory::geometry: return kExitGeometry;
    case ErrorCategory::data: return kExitData;
  }
  return kExitData;
}

void add_localizer_flags(CLI::App* cmd, LocalizerFlags& f) {
  cmd->add_option("--gamma-th", f.gamma_th, "Detection threshold in dB")->capture_default_str();
  cmd->add_option("--r-th", f.r_th, "Spatial-filter radius in m")->capture_default_str();
  cmd->add_option("--grid", f.grid, "Coarse grid cell size in m")->capture_default_str();
  cmd->add_option("--vote-radius", f.vote_radius, "Coarse vote radius in m")->capture_default_str();
  cmd->add_option("--estimator", f.estimator, "variance | mean | single:<channel>")->capture_default_str();
  cmd->add_flag("--segment-distance", f.segment_distance, "Measure distances to link segments, not lines");
}

// Replaces `--manifest <file>` with the recorded argv. A later --out-dir
// overrides the recorded one so a replay can be diffed against the original.
std::vector<std::string> expand_manifest(std::vector<std::string> args) {
  const auto it = std::find(args.begin(), args.end(), "--manifest");
  if (it == args.end()) return args;
  if (it + 1 == args.end()) throw ConfigError("<args>", 0, "--manifest needs a file");
  const auto manifest = read_manifest(*(it + 1));
  std::vector<std::string> rest(args.begin(), it);
  rest.insert(rest.end(), it + 2, args.end());
  std::vector<std::string> out = manifest.argv;
  const auto od = std::find(rest.begin(), rest.end(), "--out-dir");
  if (od != rest.end() && od + 1 != rest.end()) {
    const auto recorded = std::find(out.begin(), out.end(), "--out-dir");
    if (recorded != out.end() && recorded + 1 != out.end()) {
      *(recorded + 1) = *(od + 1);
    } else {
      out.insert(out.begin(), {"--out-dir", *(od + 1)});
    }
  }
  return out;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  try {
    args = expand_manifest(std::move(args));
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  ctx.argv = args;

  CLI::App app{"Multichannel device-free localization toolkit", "dfl"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", ctx.seed, "Master seed for every random stream")->capture_default_str();
  app.add_option("--config", ctx.config, "Simulation config (JSON)");
  app.add_option("--out-dir", ctx.out_dir, "Directory for outputs and the run manifest")->capture_default_str();
  app.add_flag("--quiet", ctx.quiet, "Suppress progress and warnings");
  std::string manifest_unused;
  app.add_option("--manifest", manifest_unused, "Replay the run recorded in a manifest");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Write a calibration trace and one trace per target position");
  simulate->add_option("--scene", sim.scene, "Scene file (default: built-in 16-sensor layout)");
  simulate->add_option("--grid", sim.grid, "Test-grid spacing in m")->capture_default_str();
  simulate->add_option("--positions", sim.positions_file, "Target positions, one '<x> <y>' per line");
  simulate->add_option("--random", sim.random, "Draw N uniform target positions instead of a grid");
  simulate->add_flag("--emit-frames", sim.emit_frames, "Also write each trace as a protocol frame capture");

  LocalizeOptions loc;
  auto* localize = app.add_subcommand("localize", "Estimate target positions from traces");
  localize->add_option("--scene", loc.scene, "Scene file (default: from the calibration trace)");
  localize->add_option("--calibration", loc.calibration, "Target-free calibration trace");
  localize->add_option("--trace", loc.traces, "Observation trace(s)")->expected(1, -1);
  add_localizer_flags(localize, loc.localizer);
  localize->add_flag("--no-spatial-filter", loc.no_spatial_filter, "Add plain WLS columns next to RWLS");

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Metrics tables from estimates or parameter sweeps");
  evaluate->add_option("--estimates", ev.estimates, "estimates.csv from localize");
  evaluate->add_option("--truth", ev.truth, "Ground truth CSV: position_id,x,y");
  evaluate->add_option("--sweep", ev.sweep, "gamma-th <lo:hi:step> | channels <lo:hi>")->expected(2);
  evaluate->add_option("--scene", ev.scene, "Scene file");
  evaluate->add_option("--calibration", ev.calibration, "Calibration trace (sweeps over recorded data)");
  evaluate->add_option("--trace", ev.traces, "Observation trace(s)")->expected(1, -1);
  evaluate->add_option("--truth-radius", ev.truth_radius, "Body radius labelling obstructed links")
      ->capture_default_str();
  evaluate->add_option("--single-channel", ev.single_channel, "Baseline channel (default: first)");
  evaluate->add_option("--channel-subset", ev.channel_subset, "Channel order for the channels sweep")
      ->delimiter(',');
  evaluate->add_option("--positions-grid", ev.grid_spacing, "Grid spacing for simulated sweeps")
      ->capture_default_str();
  add_localizer_flags(evaluate, ev.localizer);

  DecodeOptions dec;
  auto* decode = app.add_subcommand("decode-frames", "Decode a protocol frame capture");
  decode->add_option("--input", dec.input, "Binary capture");
  decode->add_option("--sensors", dec.sensors, "Sensor count K");
  decode->add_option("--scene", dec.scene, "Scene file (required for --to-trace)");
  decode->add_option("--channels", dec.channels, "Channel numbers in the capture")->delimiter(',');
  decode->add_option("--channel-count", dec.channel_count, "First N channels from 11")->capture_default_str();
  decode->add_option("--to-trace", dec.to_trace, "Assemble the capture into this trace file");
  decode->add_option("--role", dec.role, "calibration | observation")->capture_default_str();
  decode->add_option("--position-id", dec.position_id, "Position id recorded in the trace");

  MakeSceneOptions ms;
  auto* make_scene = app.add_subcommand("make-scene", "Write a scene file");
  make_scene->add_option("--layout", ms.layout, "paper | perimeter")->capture_default_str();
  make_scene->add_option("--sensors", ms.sensors, "Sensor count (perimeter)")->capture_default_str();
  make_scene->add_option("--width", ms.width, "Area width in m (perimeter)")->capture_default_str();
  make_scene->add_option("--height", ms.height, "Area height in m (perimeter)")->capture_default_str();
  make_scene->add_option("--name", ms.name, "Output file name")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(ctx, sim);
    if (localize->parsed()) return cmd_localize(ctx, loc);
    if (evaluate->parsed()) return cmd_evaluate(ctx, ev);
    if (decode->parsed()) return cmd_decode_frames(ctx, dec);
    if (make_scene->parsed()) return cmd_make_scene(ctx, ms);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace dfl::cli
