// SPDX-License-Identifier: Apache-2.0
#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cli/cli.hpp"
#include "cli/manifest.hpp"
#include "dfl/channel_sim.hpp"
#include "dfl/detection.hpp"
#include "dfl/error.hpp"
#include "dfl/eval.hpp"
#include "dfl/frame.hpp"
#include "dfl/localization.hpp"
#include "dfl/scene.hpp"
#include "dfl/sim_config.hpp"
#include "dfl/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dfl::cli {

void Context::info(std::string_view message) const {
  if (!quiet && out != nullptr) *out << message << '\n';
}

void Context::warn(std::string_view message) const {
  if (!quiet && err != nullptr) *err << "warning: " << message << '\n';
}

namespace {

constexpr std::string_view kBuiltinScene = "paper_layout";
constexpr std::uint64_t kPositionTag = 0x706f73;

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, fmt::format("cannot write {}", path.string()));
  return out;
}

void prepare_out_dir(const Context& ctx) {
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) throw Error(ErrorCode::io, fmt::format("cannot create {}: {}", ctx.out_dir.string(), ec.message()));
}

RunManifest start_manifest(const Context& ctx, std::string subcommand) {
  RunManifest m;
  m.subcommand = std::move(subcommand);
  m.argv = ctx.argv;
  m.seed = ctx.seed;
  m.config = json::object();
  return m;
}

void finish_manifest(const Context& ctx, const RunManifest& m) {
  const auto name = m.subcommand + ".manifest.json";
  write_manifest(ctx.out_dir / name, m);
  ctx.info(fmt::format("wrote {} output(s) and {}", m.outputs.size(), name));
}

SimulationSetup resolve_setup(const Context& ctx) {
  return ctx.config.empty() ? SimulationSetup{} : load_setup(ctx.config);
}

Scene load_scene_arg(const std::string& arg) {
  if (arg.empty() || arg == kBuiltinScene || arg == "paper") return paper_layout();
  return load_scene(arg);
}

/// Explicit --scene wins; otherwise the calibration header's reference,
/// looked up next to the trace first.
Scene resolve_scene(const std::string& scene_arg, const TraceFile& calibration, const fs::path& cal_path,
                    RunManifest& manifest) {
  if (!scene_arg.empty()) {
    if (scene_arg != kBuiltinScene && scene_arg != "paper") manifest.inputs.push_back(describe_file(scene_arg));
    return load_scene_arg(scene_arg);
  }
  const auto& ref = calibration.header.scene_ref;
  if (ref.empty()) {
    throw ConfigError(cal_path.string(), 0, "trace names no scene; pass --scene");
  }
  if (ref == kBuiltinScene) return paper_layout();
  fs::path candidate = cal_path.parent_path() / ref;
  if (!fs::exists(candidate)) candidate = ref;
  manifest.inputs.push_back(describe_file(candidate));
  return load_scene(candidate);
}

std::vector<Point> read_positions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open positions file");
  std::vector<Point> points;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    Point p;
    if (!(ss >> p.x)) continue;
    std::string extra;
    if (!(ss >> p.y) || (ss >> extra) || !std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ConfigError(path.string(), n, "expected '<x> <y>'");
    }
    points.push_back(p);
  }
  if (points.empty()) throw ConfigError(path.string(), 0, "no positions");
  return points;
}

// Uniform positions from raw 64-bit draws so the sequence does not depend on
// the standard library's distribution implementations.
std::vector<Point> random_positions(const MonitoredArea& area, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, kPositionTag));
  const auto u = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Point> points(n);
  for (auto& p : points) {
    p.x = area.x_min + u() * area.width();
    p.y = area.y_min + u() * area.height();
  }
  return points;
}

std::string link_list(std::span<const int> ids) {
  return fmt::format("{}", fmt::join(ids, " "));
}

LocalizerConfig make_localizer(const LocalizerFlags& flags, std::span<const int> channel_numbers) {
  LocalizerConfig cfg;
  DetectorConfig base;
  base.gamma_th_db = flags.gamma_th;
  cfg.detector = parse_estimator(flags.estimator, channel_numbers, base);
  cfg.grid_cell = flags.grid;
  cfg.vote_radius = flags.vote_radius;
  cfg.r_th = flags.r_th;
  cfg.distance_mode = flags.segment_distance ? DistanceMode::segment : DistanceMode::infinite_line;
  cfg.validate();
  return cfg;
}

json localizer_json(const LocalizerConfig& cfg) {
  return {{"gamma_th_db", cfg.detector.gamma_th_db},
          {"estimator", std::string(to_string(cfg.detector.estimator))},
          {"single_channel_index", cfg.detector.single_channel_index},
          {"grid_cell", cfg.grid_cell},
          {"vote_radius", cfg.vote_radius},
          {"r_th", cfg.r_th},
          {"spatial_filter", cfg.spatial_filter},
          {"distance_mode", cfg.distance_mode == DistanceMode::segment ? "segment" : "infinite_line"}};
}

struct LoadedTraces {
  fs::path calibration_path;
  TraceFile calibration;
  std::vector<fs::path> paths;
  std::vector<TraceFile> observations;
};

LoadedTraces load_traces(const std::string& calibration, const std::vector<std::string>& traces,
                         RunManifest& manifest) {
  if (calibration.empty()) throw ConfigError("<args>", 0, "--calibration is required");
  if (traces.empty()) throw ConfigError("<args>", 0, "at least one --trace is required");
  LoadedTraces t;
  t.calibration_path = calibration;
  t.calibration = read_trace(t.calibration_path);
  manifest.inputs.push_back(describe_file(calibration));
  if (t.calibration.header.role != TraceRole::calibration) {
    throw Error(ErrorCode::trace_format, fmt::format("{} is not a calibration trace", calibration));
  }
  for (const auto& p : traces) {
    auto obs = read_trace(fs::path(p));
    manifest.inputs.push_back(describe_file(p));
    if (!obs.tensor.same_shape(t.calibration.tensor) || obs.tensor.quantization() != t.calibration.tensor.quantization()) {
      throw Error(ErrorCode::shape_mismatch, fmt::format("{} does not match the calibration trace", p));
    }
    t.paths.emplace_back(p);
    t.observations.push_back(std::move(obs));
  }
  return t;
}

std::map<int, Point> read_truth_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open truth file {}", path.string()));
  std::map<int, Point> truth;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (line.empty() || line[0] == '#' || line.rfind("position_id", 0) == 0) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    int id = 0;
    Point p;
    if (!(ss >> id >> p.x >> p.y)) {
      throw Error(ErrorCode::trace_format, fmt::format("{}:{}: expected 'position_id,x,y'", path.string(), n));
    }
    truth[id] = p;
  }
  return truth;
}

}  // namespace

int cmd_make_scene(const Context& ctx, const MakeSceneOptions& opts) {
  std::optional<Scene> scene;
  std::string comment;
  if (opts.layout == "paper") {
    scene = paper_layout();
    comment = "16-sensor 4.2 m x 3.6 m deployment (approximate coordinates)";
  } else if (opts.layout == "perimeter") {
    if (opts.sensors < 3) throw ConfigError("<args>", 0, "--sensors must be at least 3");
    if (!(opts.width > 0.0) || !(opts.height > 0.0)) throw ConfigError("<args>", 0, "--width/--height must be positive");
    scene = perimeter_layout(opts.sensors, {0.0, opts.width, 0.0, opts.height});
    comment = fmt::format("{} sensors evenly spaced on a {} m x {} m perimeter", opts.sensors, opts.width,
                          opts.height);
  } else {
    throw ConfigError("<args>", 0, fmt::format("unknown layout '{}' (paper|perimeter)", opts.layout));
  }
  prepare_out_dir(ctx);
  auto manifest = start_manifest(ctx, "make-scene");
  manifest.config = {{"layout", opts.layout}, {"sensors", scene->sensor_count()},
                     {"width", scene->area().width()}, {"height", scene->area().height()}};
  auto out = open_output(ctx.out_dir / opts.name);
  write_scene(out, *scene, comment);
  out.close();
  manifest.outputs.push_back(opts.name);
  finish_manifest(ctx, manifest);
  return kExitOk;
}

int cmd_simulate(const Context& ctx, const SimulateOptions& opts) {
  auto manifest = start_manifest(ctx, "simulate");
  const auto setup = resolve_setup(ctx);
  if (!ctx.config.empty()) manifest.inputs.push_back(describe_file(ctx.config));
  const Scene scene = load_scene_arg(opts.scene);
  if (!opts.scene.empty() && opts.scene != kBuiltinScene && opts.scene != "paper") {
    manifest.inputs.push_back(describe_file(opts.scene));
  }

  std::vector<Point> positions;
  if (!opts.positions_file.empty()) {
    positions = read_positions(opts.positions_file);
    manifest.inputs.push_back(describe_file(opts.positions_file));
  } else if (opts.random > 0) {
    positions = random_positions(scene.area(), opts.random, ctx.seed);
  } else {
    if (!(opts.grid > 0.0)) throw ConfigError("<args>", 0, "--grid must be positive");
    positions = test_grid(scene.area(), opts.grid);
  }
  if (positions.empty()) throw ConfigError("<args>", 0, "no target positions");
  if (opts.emit_frames && setup.sim.samples % 2 != 0) {
    throw ConfigError(ctx.config.empty() ? "<config>" : ctx.config, 0,
                      "--emit-frames needs an even sample count (two directions per round)");
  }

  prepare_out_dir(ctx);
  const std::string scene_name = "scene.scene";
  {
    auto out = open_output(ctx.out_dir / scene_name);
    write_scene(out, scene);
  }
  manifest.outputs.push_back(scene_name);

  const auto env = Environment::generate(scene, setup.plan, setup.sim, ctx.seed);
  const WarningSink warn = [&ctx](std::string_view msg) { ctx.warn(msg); };
  const auto emit = [&](const std::string& stem, const TraceFile& trace) {
    write_trace(ctx.out_dir / (stem + ".trace"), trace);
    manifest.outputs.push_back(stem + ".trace");
    if (opts.emit_frames) {
      const auto bytes = encode_stream(tensor_to_frames(trace.tensor, scene));
      auto out = open_output(ctx.out_dir / (stem + ".frames"));
      out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      manifest.outputs.push_back(stem + ".frames");
    }
  };

  emit("calibration",
       {make_header(scene, TraceRole::calibration, 0, std::nullopt, scene_name),
        simulate(env, scene, setup.obstruction, std::nullopt, setup.sim, ctx.seed, 0, warn)});
  json pos = json::array();
  for (std::size_t t = 0; t < positions.size(); ++t) {
    const int id = static_cast<int>(t + 1);
    emit(fmt::format("obs_{:04d}", id),
         {make_header(scene, TraceRole::observation, id, positions[t], scene_name),
          simulate(env, scene, setup.obstruction, positions[t], setup.sim, ctx.seed, t + 1, warn)});
    pos.push_back({positions[t].x, positions[t].y});
  }
  manifest.config = {{"simulation", to_json(setup)},
                     {"scene", opts.scene.empty() ? std::string(kBuiltinScene) : opts.scene},
                     {"positions", pos}};
  finish_manifest(ctx, manifest);
  return kExitOk;
}

int cmd_localize(const Context& ctx, const LocalizeOptions& opts) {
  auto manifest = start_manifest(ctx, "localize");
  const auto traces = load_traces(opts.calibration, opts.traces, manifest);
  const Scene scene = resolve_scene(opts.scene, traces.calibration, traces.calibration_path, manifest);
  check_trace_matches(traces.calibration, scene);

  auto cfg = make_localizer(opts.localizer, traces.calibration.tensor.channel_numbers());
  auto plain = cfg;
  plain.spatial_filter = false;
  manifest.config = {{"localizer", localizer_json(cfg)}, {"wls_columns", opts.no_spatial_filter}};

  prepare_out_dir(ctx);
  auto est = open_output(ctx.out_dir / "estimates.csv");
  auto votes = open_output(ctx.out_dir / "votes.csv");
  fmt::print(est, "position_id,true_x,true_y,x,y,coarse_x,coarse_y,status,detected,filtered");
  if (opts.no_spatial_filter) fmt::print(est, ",wls_x,wls_y,wls_status");
  fmt::print(est, "\n");
  fmt::print(votes, "position_id,cell,column,row,x,y,votes\n");

  const auto cal = traces.calibration.tensor.channel_means_mw();
  std::size_t failures = 0;
  for (std::size_t t = 0; t < traces.observations.size(); ++t) {
    const auto& obs = traces.observations[t];
    check_trace_matches(obs, scene);
    const auto& h = obs.header;
    const std::string truth = h.target ? fmt::format("{},{}", h.target->x, h.target->y) : "NA,NA";
    const auto detection = detect_links(cal, obs.tensor.channel_means_mw(), cfg.detector);
    if (detection.obstructed.empty()) {
      ++failures;
      ctx.warn(fmt::format("{}: no link crossed the threshold; no estimate", traces.paths[t].string()));
      fmt::print(est, "{},{},NA,NA,NA,NA,no_detection,,", h.position_id, truth);
      if (opts.no_spatial_filter) fmt::print(est, ",NA,NA,no_detection");
      fmt::print(est, "\n");
      continue;
    }
    const auto r = localize_detection(scene, detection, cfg);
    fmt::print(est, "{},{},{},{},{},{},{},{},{}", h.position_id, truth, r.refined.x, r.refined.y, r.coarse.x,
               r.coarse.y, to_string(r.status), link_list(r.detection.obstructed), link_list(r.filtered));
    if (opts.no_spatial_filter) {
      const auto w = localize_detection(scene, detection, plain);
      fmt::print(est, ",{},{},{}", w.refined.x, w.refined.y, to_string(w.status));
    }
    fmt::print(est, "\n");

    const CoarseGrid grid{scene.area(), cfg.grid_cell, cfg.vote_radius, cfg.distance_mode};
    for (std::size_t n = 0; n < r.grid.votes.size(); ++n) {
      const auto c = grid.center(n);
      fmt::print(votes, "{},{},{},{},{},{},{}\n", h.position_id, n, n % r.grid.columns, n / r.grid.columns, c.x,
                 c.y, r.grid.votes[n]);
    }
  }
  manifest.outputs = {"estimates.csv", "votes.csv"};
  est.close();
  votes.close();
  finish_manifest(ctx, manifest);
  if (failures > 0) {
    ctx.warn(fmt::format("{} of {} position(s) had no detected link", failures, traces.observations.size()));
    return kExitGeometry;
  }
  return kExitOk;
}

namespace {

struct EstimateRow {
  int position_id = 0;
  std::optional<Point> truth;
  std::optional<Point> rwls;
  std::optional<Point> wls;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::vector<EstimateRow> read_estimates(const fs::path& path, bool& has_wls) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open estimates {}", path.string()));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::trace_format, fmt::format("{}: empty file", path.string()));
  const auto header = split_csv(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"position_id", "true_x", "true_y", "x", "y"}) {
    if (!col.contains(need)) {
      throw Error(ErrorCode::trace_format, fmt::format("{}: missing column '{}'", path.string(), need));
    }
  }
  has_wls = col.contains("wls_x") && col.contains("wls_y");
  std::vector<EstimateRow> rows;
  for (int n = 2; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::trace_format,
                  fmt::format("{}:{}: {} cells, header has {}", path.string(), n, cells.size(), header.size()));
    }
    const auto number = [&](const std::string& name) -> std::optional<double> {
      const auto& s = cells[col.at(name)];
      if (s == "NA" || s.empty()) return std::nullopt;
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      } catch (const std::exception&) {
        throw Error(ErrorCode::trace_format, fmt::format("{}:{}: bad number '{}'", path.string(), n, s));
      }
    };
    const auto point = [&](const char* x, const char* y) -> std::optional<Point> {
      const auto px = number(x);
      const auto py = number(y);
      if (px && py) return Point{*px, *py};
      return std::nullopt;
    };
    EstimateRow row;
    row.position_id = static_cast<int>(number("position_id").value_or(0));
    row.truth = point("true_x", "true_y");
    row.rwls = point("x", "y");
    if (has_wls) row.wls = point("wls_x", "wls_y");
    rows.push_back(row);
  }
  return rows;
}

void write_localization_tables(const Context& ctx, const std::vector<std::pair<std::string, LocalizationMetrics>>& tables,
                               const std::vector<std::size_t>& failures, RunManifest& manifest) {
  auto metrics = open_output(ctx.out_dir / "metrics.csv");
  auto cdf = open_output(ctx.out_dir / "cdf.csv");
  fmt::print(metrics, "variant,positions,failures,RMSE,mean_error,q1,median,q3,lower_whisker,upper_whisker,outlier_count\n");
  fmt::print(cdf, "variant,error,fraction\n");
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto& [variant, m] = tables[i];
    if (m.errors.empty()) {
      fmt::print(metrics, "{},0,{},NA,NA,NA,NA,NA,NA,NA,NA\n", variant, failures[i]);
      continue;
    }
    fmt::print(metrics, "{},{},{},{},{},{},{},{},{},{},{}\n", variant, m.errors.size(), failures[i], m.rmse,
               m.mean_error, m.box.q1, m.box.median, m.box.q3, m.box.lower_whisker, m.box.upper_whisker,
               m.box.outliers);
    for (const auto& p : m.cdf) fmt::print(cdf, "{},{},{}\n", variant, p.error, p.fraction);
  }
  manifest.outputs = {"metrics.csv", "cdf.csv"};
}

std::size_t channel_column(int channel, std::span<const int> numbers) {
  if (channel == 0) return 0;
  const auto it = std::find(numbers.begin(), numbers.end(), channel);
  if (it == numbers.end()) {
    throw ConfigError("<args>", 0, fmt::format("channel {} is not in the data", channel));
  }
  return static_cast<std::size_t>(it - numbers.begin());
}

}  // namespace

int cmd_evaluate(const Context& ctx, const EvaluateOptions& opts) {
  auto manifest = start_manifest(ctx, "evaluate");
  prepare_out_dir(ctx);

  if (opts.sweep.empty()) {
    if (opts.estimates.empty()) throw ConfigError("<args>", 0, "pass --estimates or --sweep");
    bool has_wls = false;
    auto rows = read_estimates(opts.estimates, has_wls);
    manifest.inputs.push_back(describe_file(opts.estimates));
    if (!opts.truth.empty()) {
      const auto truth = read_truth_file(opts.truth);
      manifest.inputs.push_back(describe_file(opts.truth));
      for (auto& r : rows) {
        if (const auto it = truth.find(r.position_id); it != truth.end()) r.truth = it->second;
      }
    }
    std::vector<std::pair<std::string, LocalizationMetrics>> tables;
    std::vector<std::size_t> failures;
    const auto tabulate = [&](const std::string& variant, auto pick) {
      std::vector<Point> truth, est;
      std::size_t failed = 0;
      for (const auto& r : rows) {
        if (!r.truth) throw Error(ErrorCode::trace_format, fmt::format("position {} has no ground truth", r.position_id));
        const auto& e = pick(r);
        if (!e) {
          ++failed;
          continue;
        }
        truth.push_back(*r.truth);
        est.push_back(*e);
      }
      tables.emplace_back(variant, truth.empty() ? LocalizationMetrics{} : localization_metrics(truth, est));
      failures.push_back(failed);
    };
    tabulate("rwls", [](const EstimateRow& r) -> const std::optional<Point>& { return r.rwls; });
    if (has_wls) tabulate("wls", [](const EstimateRow& r) -> const std::optional<Point>& { return r.wls; });
    manifest.config = {{"mode", "estimates"}};
    write_localization_tables(ctx, tables, failures, manifest);
    finish_manifest(ctx, manifest);
    return kExitOk;
  }

  if (opts.sweep.size() != 2) throw ConfigError("<args>", 0, "--sweep takes <gamma-th|channels> <lo:hi[:step]>");
  const auto& kind = opts.sweep[0];
  if (kind != "gamma-th" && kind != "channels") {
    throw ConfigError("<args>", 0, fmt::format("unknown sweep '{}' (gamma-th|channels)", kind));
  }
  std::vector<double> values;
  try {
    values = parse_range(opts.sweep[1]);
  } catch (const Error& e) {
    throw ConfigError("<args>", 0, e.what());
  }

  // Dataset: recorded traces when given, otherwise simulated from --config.
  std::optional<EvalDataset> data;
  if (!opts.calibration.empty()) {
    auto traces = load_traces(opts.calibration, opts.traces, manifest);
    Scene scene = resolve_scene(opts.scene, traces.calibration, traces.calibration_path, manifest);
    check_trace_matches(traces.calibration, scene);
    std::map<int, Point> truth;
    if (!opts.truth.empty()) {
      truth = read_truth_file(opts.truth);
      manifest.inputs.push_back(describe_file(opts.truth));
    }
    data.emplace(EvalDataset{std::move(scene), std::move(traces.calibration.tensor), {}, opts.truth_radius});
    for (std::size_t t = 0; t < traces.observations.size(); ++t) {
      auto& obs = traces.observations[t];
      std::optional<Point> p = obs.header.target;
      if (const auto it = truth.find(obs.header.position_id); it != truth.end()) p = it->second;
      if (!p) {
        throw Error(ErrorCode::trace_format,
                    fmt::format("{}: no ground truth (header target or --truth)", traces.paths[t].string()));
      }
      data->observations.push_back({obs.header.position_id, *p, std::move(obs.tensor)});
    }
    manifest.config["dataset"] = "traces";
  } else {
    const auto setup = resolve_setup(ctx);
    if (!ctx.config.empty()) manifest.inputs.push_back(describe_file(ctx.config));
    const Scene scene = load_scene_arg(opts.scene);
    if (!opts.scene.empty() && opts.scene != kBuiltinScene && opts.scene != "paper") {
      manifest.inputs.push_back(describe_file(opts.scene));
    }
    if (!(opts.grid_spacing > 0.0)) throw ConfigError("<args>", 0, "--positions-grid must be positive");
    const auto positions = test_grid(scene.area(), opts.grid_spacing);
    data.emplace(simulate_dataset(scene, setup, positions, ctx.seed));
    data->truth_radius = opts.truth_radius;
    manifest.config["dataset"] = {{"simulation", to_json(setup)}, {"positions_grid", opts.grid_spacing}};
  }

  SweepOptions sweep;
  sweep.localizer = make_localizer(opts.localizer, data->calibration.channel_numbers());
  sweep.single_channel_index = channel_column(opts.single_channel, data->calibration.channel_numbers());
  for (const int ch : opts.channel_subset) {
    if (ch == 0) throw ConfigError("<args>", 0, "channel 0 is not valid in --channel-subset");
    sweep.channel_order.push_back(channel_column(ch, data->calibration.channel_numbers()));
  }
  manifest.config["localizer"] = localizer_json(sweep.localizer);
  manifest.config["truth_radius"] = opts.truth_radius;
  manifest.config["channel_order"] = sweep.channel_order;
  manifest.config["sweep"] = {kind, opts.sweep[1]};

  std::vector<SweepRow> rows;
  std::string name;
  if (kind == "gamma-th") {
    rows = sweep_threshold(*data, values, sweep);
    name = "sweep_gamma_th.csv";
  } else {
    std::vector<std::size_t> counts;
    for (const double v : values) {
      if (v < 1.0 || v != std::floor(v) || v > static_cast<double>(data->calibration.channels())) {
        throw ConfigError("<args>", 0,
                          fmt::format("channel count {} outside 1..{}", v, data->calibration.channels()));
      }
      counts.push_back(static_cast<std::size_t>(v));
    }
    rows = sweep_channels(*data, counts, sweep);
    name = "sweep_channels.csv";
  }
  auto out = open_output(ctx.out_dir / name);
  write_sweep_csv(out, rows);
  out.close();
  manifest.outputs = {name};
  finish_manifest(ctx, manifest);
  return kExitOk;
}

int cmd_decode_frames(const Context& ctx, const DecodeOptions& opts) {
  auto manifest = start_manifest(ctx, "decode-frames");
  if (opts.input.empty()) throw ConfigError("<args>", 0, "--input is required");
  std::optional<Scene> scene;
  if (!opts.scene.empty()) {
    scene = load_scene_arg(opts.scene);
    if (opts.scene != kBuiltinScene && opts.scene != "paper") manifest.inputs.push_back(describe_file(opts.scene));
  }
  const std::size_t k = scene ? scene->sensor_count() : opts.sensors;
  if (k == 0) throw ConfigError("<args>", 0, "pass --sensors or --scene");
  if (scene && opts.sensors != 0 && opts.sensors != k) {
    throw ConfigError("<args>", 0, fmt::format("--sensors {} disagrees with the scene's {}", opts.sensors, k));
  }

  std::ifstream in(opts.input, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {}", opts.input));
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  manifest.inputs.push_back(describe_file(opts.input));
  const auto frames = decode_stream(bytes, k);

  prepare_out_dir(ctx);
  {
    auto out = open_output(ctx.out_dir / "frames.csv");
    fmt::print(out, "index,flag,cid,nid,data_bytes\n");
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const auto& f = frames[i];
      fmt::print(out, "{},{},{},{},{}\n", i, f.flag == FrameFlag::data ? "data" : "command", f.cid, f.nid,
                 f.data.size());
    }
  }
  manifest.outputs.push_back("frames.csv");
  manifest.config = {{"sensors", k}};

  if (!opts.to_trace.empty()) {
    if (!scene) throw ConfigError("<args>", 0, "--to-trace needs --scene");
    TraceRole role;
    if (opts.role == "calibration") {
      role = TraceRole::calibration;
    } else if (opts.role == "observation") {
      role = TraceRole::observation;
    } else {
      throw ConfigError("<args>", 0, fmt::format("unknown role '{}'", opts.role));
    }
    const auto plan = opts.channels.empty() ? ChannelPlan::ieee802154(opts.channel_count)
                                            : ChannelPlan::from_numbers(opts.channels);
    const auto quant = ctx.config.empty() ? Quantization{} : load_setup(ctx.config).sim.quantization;
    auto ingest = frames_to_tensor(frames, *scene, plan, quant);
    for (const auto& w : ingest.warnings) ctx.warn(w);
    const std::string ref = opts.scene == "paper" ? std::string(kBuiltinScene)
                                                  : fs::path(opts.scene).filename().string();
    TraceFile trace{make_header(*scene, role, opts.position_id, std::nullopt, ref), std::move(ingest.tensor)};
    write_trace(ctx.out_dir / opts.to_trace, trace);
    manifest.outputs.push_back(opts.to_trace);
    manifest.config["channel_numbers"] = plan.channel_numbers;
    manifest.config["role"] = opts.role;
    manifest.config["position_id"] = opts.position_id;
  }
  ctx.info(fmt::format("decoded {} frame(s)", frames.size()));
  finish_manifest(ctx, manifest);
  return kExitOk;
}

}  // namespace dfl::cli
