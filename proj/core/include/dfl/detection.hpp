// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dfl/rss_tensor.hpp"
#include "dfl/scene.hpp"

namespace dfl {

enum class EstimatorKind { variance, mean, single_channel };

std::string_view to_string(EstimatorKind kind) noexcept;

struct AttenuationEstimate {
  int link_id = 0;
  double gamma_hat_db = 0.0;
  EstimatorKind estimator = EstimatorKind::variance;
};

struct DetectorConfig {
  double gamma_th_db = 4.0;
  EstimatorKind estimator = EstimatorKind::variance;
  std::size_t single_channel_index = 0;  // column used by the single-channel estimator
  double variance_floor = 1e-12;         // mW^2

  void validate() const;
};

/// Parses "variance", "mean" or "single:<802.15.4 channel>" against the
/// channel numbers available in the data.
DetectorConfig parse_estimator(std::string_view spec, std::span<const int> channel_numbers,
                               DetectorConfig base = {});

struct DetectionResult {
  std::vector<int> obstructed;               // L_D, ascending link ids
  std::vector<AttenuationEstimate> estimates;  // one per link, in link order

  double gamma_hat(int link_id) const { return estimates[static_cast<std::size_t>(link_id - 1)].gamma_hat_db; }
  /// 0/1 per link, in link order.
  std::vector<std::uint8_t> indicators() const;
};

/// Population variance across channels (1/C normalization).
double channel_variance(std::span<const double> power_mw);

/// 10 log10(var(calibration) / var(observation)); both variances floored at
/// `variance_floor`. Positive values mean the link lost power.
AttenuationEstimate estimate_attenuation_variance(std::span<const double> calibration_mw,
                                                  std::span<const double> observation_mw,
                                                  double variance_floor = 1e-12);

/// 10 log10(mean(calibration) / mean(observation)).
AttenuationEstimate estimate_attenuation_mean(std::span<const double> calibration_mw,
                                              std::span<const double> observation_mw);

/// 10 log10(calibration / observation) on one channel: the plain RSS-drop detector.
AttenuationEstimate estimate_attenuation_single_channel(double calibration_mw, double observation_mw);

/// Per-link estimates and the thresholded set, from sample-averaged power.
DetectionResult detect_links(const PowerMatrix& calibration, const PowerMatrix& observation,
                             const DetectorConfig& cfg);

DetectionResult detect_links(const Scene& scene, const RssTensor& calibration,
                             const RssTensor& observation, const DetectorConfig& cfg);

/// Re-threshold existing estimates (used by sweeps; estimates are reused).
DetectionResult rethreshold(const DetectionResult& result, double gamma_th_db);

}  // namespace dfl
