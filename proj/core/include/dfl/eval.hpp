// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfl/localization.hpp"
#include "dfl/rss_tensor.hpp"
#include "dfl/scene.hpp"
#include "dfl/sim_config.hpp"

namespace dfl {

/// Raw counts behind P_MD / P_FA. Accumulation is associative, so partial
/// counts from independent positions can be merged in any order.
struct DetectionCounts {
  std::size_t obstructed = 0;      // sum I
  std::size_t missed = 0;          // sum I (1 - I_hat)
  std::size_t non_obstructed = 0;  // sum (1 - I)
  std::size_t false_alarms = 0;    // sum (1 - I) I_hat

  void add(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> predicted);
  DetectionCounts& operator+=(const DetectionCounts& other) noexcept;
};

struct DetectionMetrics {
  std::optional<double> p_md;  // empty when no link was obstructed
  std::optional<double> p_fa;  // empty when every link was obstructed
  DetectionCounts counts;

  static DetectionMetrics from_counts(const DetectionCounts& counts);
};

/// P_MD and P_FA over flattened T x L indicator tables (values 0/1).
DetectionMetrics detection_metrics(std::span<const std::uint8_t> truth,
                                   std::span<const std::uint8_t> predicted);

/// Tukey box-plot summary: quartiles by linear interpolation between order
/// statistics, whiskers at the most extreme points within 1.5 IQR.
struct BoxStats {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double lower_whisker = 0.0;
  double upper_whisker = 0.0;
  std::size_t outliers = 0;
};

double quantile(std::span<const double> sorted, double p);
BoxStats box_stats(std::vector<double> values);

struct CdfPoint {
  double error = 0.0;
  double fraction = 0.0;
};

struct LocalizationMetrics {
  double rmse = 0.0;
  double mean_error = 0.0;
  std::vector<double> errors;  // per position, input order
  std::vector<CdfPoint> cdf;   // sorted errors with cumulative fraction k/T
  BoxStats box;
};

LocalizationMetrics localization_metrics(std::span<const Point> truth, std::span<const Point> estimates);

struct Observation {
  int position_id = 0;
  Point truth;
  RssTensor tensor;
};

/// One calibration run plus target-present runs with known positions.
/// `truth_radius` labels links (d < R) for detection metrics.
struct EvalDataset {
  Scene scene;
  RssTensor calibration;
  std::vector<Observation> observations;
  double truth_radius = 0.3;

  void validate() const;
};

/// Simulated dataset: calibration on stream 0, position t on stream t + 1.
EvalDataset simulate_dataset(const Scene& scene, const SimulationSetup& setup,
                             std::span<const Point> positions, std::uint64_t seed);

struct SweepOptions {
  LocalizerConfig localizer;               // detector.gamma_th is overridden by sweeps
  std::size_t single_channel_index = 0;    // baseline channel column
  std::vector<std::size_t> channel_order;  // channel columns for sweep_channels; empty = plan order
};

struct SweepRow {
  std::string sweep;    // "gamma_th" | "channels" | "estimates"
  std::string variant;  // detector / localizer variant
  double parameter = 0.0;
  DetectionMetrics detection;
  std::optional<LocalizationMetrics> localization;
  std::size_t failures = 0;  // positions without a position estimate
};

/// Per threshold, rows for: multichannel (pre-filter, plain WLS),
/// multichannel_coarse (grid estimate), multichannel_rwls (post-filter, RWLS)
/// and single_channel (pre-filter, plain WLS).
std::vector<SweepRow> sweep_threshold(const EvalDataset& dataset, std::span<const double> thresholds,
                                      const SweepOptions& options);

/// Per channel count C, the first C channels of `channel_order`: rows
/// "detector" (pre-filter) and "rwls" (post-filter), both with RWLS errors.
/// C = 1 uses the single-channel estimator on the first channel.
std::vector<SweepRow> sweep_channels(const EvalDataset& dataset, std::span<const std::size_t> counts,
                                     const SweepOptions& options);

/// Header: sweep,variant,parameter,P_MD,P_FA,RMSE,q1,median,q3,outlier_count,failures
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

/// Inclusive range lo:hi:step as used on the command line.
std::vector<double> parse_range(std::string_view spec);

}  // namespace dfl
