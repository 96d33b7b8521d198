// SPDX-License-Identifier: Apache-2.0
#include "dfl/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dfl/channel_sim.hpp"
#include "dfl/error.hpp"

namespace dfl {

void DetectionCounts::add(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::shape_mismatch, "truth and prediction tables differ in size");
  }
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k] > 1 || predicted[k] > 1) {
      throw Error(ErrorCode::invalid_argument, fmt::format("indicator at {} is not 0 or 1", k));
    }
    if (truth[k]) {
      ++obstructed;
      if (!predicted[k]) ++missed;
    } else {
      ++non_obstructed;
      if (predicted[k]) ++false_alarms;
    }
  }
}

DetectionCounts& DetectionCounts::operator+=(const DetectionCounts& other) noexcept {
  obstructed += other.obstructed;
  missed += other.missed;
  non_obstructed += other.non_obstructed;
  false_alarms += other.false_alarms;
  return *this;
}

DetectionMetrics DetectionMetrics::from_counts(const DetectionCounts& counts) {
  DetectionMetrics m;
  m.counts = counts;
  if (counts.obstructed > 0) {
    m.p_md = static_cast<double>(counts.missed) / static_cast<double>(counts.obstructed);
  }
  if (counts.non_obstructed > 0) {
    m.p_fa = static_cast<double>(counts.false_alarms) / static_cast<double>(counts.non_obstructed);
  }
  return m;
}

DetectionMetrics detection_metrics(std::span<const std::uint8_t> truth,
                                   std::span<const std::uint8_t> predicted) {
  DetectionCounts counts;
  counts.add(truth, predicted);
  return DetectionMetrics::from_counts(counts);
}

double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::invalid_argument, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

BoxStats box_stats(std::vector<double> values) {
  BoxStats s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.q1 = quantile(values, 0.25);
  s.median = quantile(values, 0.5);
  s.q3 = quantile(values, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.lower_whisker = s.q1;
  s.upper_whisker = s.q3;
  for (double v : values) {
    if (v < lo_fence || v > hi_fence) {
      ++s.outliers;
    } else {
      s.lower_whisker = std::min(s.lower_whisker, v);
      s.upper_whisker = std::max(s.upper_whisker, v);
    }
  }
  return s;
}

LocalizationMetrics localization_metrics(std::span<const Point> truth, std::span<const Point> estimates) {
  if (truth.size() != estimates.size()) {
    throw Error(ErrorCode::shape_mismatch, "truth and estimate counts differ");
  }
  if (truth.empty()) throw Error(ErrorCode::invalid_argument, "need at least one position");
  LocalizationMetrics m;
  m.errors.reserve(truth.size());
  double sum_sq = 0.0;
  double sum = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    const double dx = estimates[t].x - truth[t].x;
    const double dy = estimates[t].y - truth[t].y;
    sum_sq += dx * dx + dy * dy;
    const double err = std::sqrt(dx * dx + dy * dy);
    sum += err;
    m.errors.push_back(err);
  }
  const auto n = static_cast<double>(truth.size());
  m.rmse = std::sqrt(sum_sq / n);
  m.mean_error = sum / n;
  std::vector<double> sorted = m.errors;
  std::sort(sorted.begin(), sorted.end());
  m.cdf.reserve(sorted.size());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    m.cdf.push_back({sorted[k], static_cast<double>(k + 1) / n});
  }
  m.box = box_stats(std::move(sorted));
  return m;
}

void EvalDataset::validate() const {
  if (calibration.links() != scene.link_count()) {
    throw Error(ErrorCode::shape_mismatch, "calibration does not match the scene");
  }
  for (const auto& obs : observations) {
    if (!obs.tensor.same_shape(calibration)) {
      throw Error(ErrorCode::shape_mismatch,
                  fmt::format("observation {} differs in shape from the calibration", obs.position_id));
    }
  }
  if (!(truth_radius > 0.0)) throw Error(ErrorCode::invalid_argument, "truth radius must be positive");
}

EvalDataset simulate_dataset(const Scene& scene, const SimulationSetup& setup,
                             std::span<const Point> positions, std::uint64_t seed) {
  const auto env = Environment::generate(scene, setup.plan, setup.sim, seed);
  EvalDataset data{scene,
                   simulate(env, scene, setup.obstruction, std::nullopt, setup.sim, seed, 0),
                   {},
                   setup.obstruction.radius};
  data.observations.reserve(positions.size());
  for (std::size_t t = 0; t < positions.size(); ++t) {
    data.observations.push_back({static_cast<int>(t + 1), positions[t],
                                 simulate(env, scene, setup.obstruction, positions[t], setup.sim, seed, t + 1)});
  }
  return data;
}

namespace {

struct Prepared {
  PowerMatrix calibration;
  std::vector<PowerMatrix> observations;
  std::vector<std::vector<std::uint8_t>> truth;
};

Prepared prepare(const EvalDataset& data) {
  data.validate();
  Prepared p;
  p.calibration = data.calibration.channel_means_mw();
  for (const auto& obs : data.observations) {
    p.observations.push_back(obs.tensor.channel_means_mw());
    p.truth.push_back(data.scene.indicators(obs.truth, data.truth_radius));
  }
  return p;
}

// Collects detection counts and per-position errors for one sweep row.
struct RowBuilder {
  DetectionCounts counts;
  std::vector<Point> truth;
  std::vector<Point> estimates;
  std::size_t failures = 0;

  SweepRow finish(std::string sweep, std::string variant, double parameter) const {
    SweepRow row{std::move(sweep), std::move(variant), parameter, DetectionMetrics::from_counts(counts),
                 std::nullopt, failures};
    if (!truth.empty()) row.localization = localization_metrics(truth, estimates);
    return row;
  }
};

std::optional<PositionEstimate> try_localize(const Scene& scene, const DetectionResult& det,
                                             const LocalizerConfig& cfg) {
  if (det.obstructed.empty()) return std::nullopt;
  return localize_detection(scene, det, cfg);
}

}  // namespace

std::vector<SweepRow> sweep_threshold(const EvalDataset& dataset, std::span<const double> thresholds,
                                      const SweepOptions& options) {
  const auto prep = prepare(dataset);
  const auto& scene = dataset.scene;

  DetectorConfig multi = options.localizer.detector;
  multi.estimator = EstimatorKind::variance;
  DetectorConfig single = options.localizer.detector;
  single.estimator = EstimatorKind::single_channel;
  single.single_channel_index = options.single_channel_index;

  std::vector<DetectionResult> multi_est;
  std::vector<DetectionResult> single_est;
  for (const auto& obs : prep.observations) {
    multi_est.push_back(detect_links(prep.calibration, obs, multi));
    single_est.push_back(detect_links(prep.calibration, obs, single));
  }

  LocalizerConfig with_filter = options.localizer;
  with_filter.spatial_filter = true;
  LocalizerConfig without_filter = options.localizer;
  without_filter.spatial_filter = false;

  std::vector<SweepRow> rows;
  for (double th : thresholds) {
    RowBuilder pre, coarse, rwls, base;
    for (std::size_t t = 0; t < prep.observations.size(); ++t) {
      const auto& truth_ind = prep.truth[t];
      const Point truth = dataset.observations[t].truth;

      const auto det = rethreshold(multi_est[t], th);
      const auto ind = det.indicators();
      pre.counts.add(truth_ind, ind);
      coarse.counts.add(truth_ind, ind);
      if (auto est = try_localize(scene, det, with_filter)) {
        rwls.counts.add(truth_ind, est->indicators);
        coarse.truth.push_back(truth);
        coarse.estimates.push_back(est->coarse);
        rwls.truth.push_back(truth);
        rwls.estimates.push_back(est->refined);
        const auto plain = localize_detection(scene, det, without_filter);
        pre.truth.push_back(truth);
        pre.estimates.push_back(plain.refined);
      } else {
        rwls.counts.add(truth_ind, ind);
        ++pre.failures;
        ++coarse.failures;
        ++rwls.failures;
      }

      const auto sdet = rethreshold(single_est[t], th);
      base.counts.add(truth_ind, sdet.indicators());
      if (auto est = try_localize(scene, sdet, without_filter)) {
        base.truth.push_back(truth);
        base.estimates.push_back(est->refined);
      } else {
        ++base.failures;
      }
    }
    rows.push_back(pre.finish("gamma_th", "multichannel", th));
    rows.push_back(coarse.finish("gamma_th", "multichannel_coarse", th));
    rows.push_back(rwls.finish("gamma_th", "multichannel_rwls", th));
    rows.push_back(base.finish("gamma_th", "single_channel", th));
  }
  return rows;
}

std::vector<SweepRow> sweep_channels(const EvalDataset& dataset, std::span<const std::size_t> counts,
                                     const SweepOptions& options) {
  const auto prep = prepare(dataset);
  const std::size_t available = prep.calibration.channels();
  std::vector<std::size_t> order = options.channel_order;
  if (order.empty()) {
    for (std::size_t c = 0; c < available; ++c) order.push_back(c);
  }

  LocalizerConfig cfg = options.localizer;
  cfg.spatial_filter = true;

  std::vector<SweepRow> rows;
  for (std::size_t count : counts) {
    if (count < 1 || count > order.size()) {
      throw Error(ErrorCode::invalid_argument,
                  fmt::format("channel count {} outside 1..{}", count, order.size()));
    }
    const std::span<const std::size_t> columns(order.data(), count);
    const auto cal = prep.calibration.select_channels(columns);
    cfg.detector.estimator = count == 1 ? EstimatorKind::single_channel : EstimatorKind::variance;
    cfg.detector.single_channel_index = 0;

    RowBuilder pre, post;
    for (std::size_t t = 0; t < prep.observations.size(); ++t) {
      const auto det = detect_links(cal, prep.observations[t].select_channels(columns), cfg.detector);
      const auto ind = det.indicators();
      pre.counts.add(prep.truth[t], ind);
      if (auto est = try_localize(dataset.scene, det, cfg)) {
        post.counts.add(prep.truth[t], est->indicators);
        for (auto* b : {&pre, &post}) {
          b->truth.push_back(dataset.observations[t].truth);
          b->estimates.push_back(est->refined);
        }
      } else {
        post.counts.add(prep.truth[t], ind);
        ++pre.failures;
        ++post.failures;
      }
    }
    rows.push_back(pre.finish("channels", "detector", static_cast<double>(count)));
    rows.push_back(post.finish("channels", "rwls", static_cast<double>(count)));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? fmt::format("{}", *v) : std::string("NA");
  };
  fmt::print(out, "sweep,variant,parameter,P_MD,P_FA,RMSE,q1,median,q3,outlier_count,failures\n");
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{},", r.sweep, r.variant, r.parameter, opt(r.detection.p_md),
               opt(r.detection.p_fa));
    if (r.localization) {
      const auto& l = *r.localization;
      fmt::print(out, "{},{},{},{},{},", l.rmse, l.box.q1, l.box.median, l.box.q3, l.box.outliers);
    } else {
      fmt::print(out, "NA,NA,NA,NA,NA,");
    }
    fmt::print(out, "{}\n", r.failures);
  }
}

std::vector<double> parse_range(std::string_view spec) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = spec.find(':', start);
    const auto token = spec.substr(start, colon == std::string_view::npos ? spec.npos : colon - start);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
      throw Error(ErrorCode::config, fmt::format("bad range '{}' (expected lo:hi[:step])", spec));
    }
    parts.push_back(v);
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() == 1) return parts;
  if (parts.size() > 3) throw Error(ErrorCode::config, fmt::format("bad range '{}'", spec));
  const double lo = parts[0];
  const double hi = parts[1];
  const double step = parts.size() == 3 ? parts[2] : 1.0;
  if (!(step > 0.0) || hi < lo) throw Error(ErrorCode::config, fmt::format("bad range '{}'", spec));
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
  return out;
}

}  // namespace dfl
