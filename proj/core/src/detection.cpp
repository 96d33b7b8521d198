// SPDX-License-Identifier: Apache-2.0
#include "dfl/detection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "dfl/error.hpp"

namespace dfl {

namespace {

void require_finite_positive(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, fmt::format("non-finite {} power", what));
    if (v < 0.0) throw Error(ErrorCode::invalid_argument, fmt::format("negative {} power", what));
  }
}

void require_multichannel(std::span<const double> calibration, std::span<const double> observation) {
  if (calibration.size() != observation.size()) {
    throw Error(ErrorCode::shape_mismatch, "calibration and observation channel counts differ");
  }
  if (calibration.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "multichannel estimators need at least 2 channels");
  }
  require_finite_positive(calibration, "calibration");
  require_finite_positive(observation, "observation");
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace

std::string_view to_string(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::variance: return "variance";
    case EstimatorKind::mean: return "mean";
    case EstimatorKind::single_channel: return "single";
  }
  return "variance";
}

void DetectorConfig::validate() const {
  if (!(variance_floor > 0.0)) throw Error(ErrorCode::config, "variance floor must be positive");
  if (!std::isfinite(gamma_th_db)) throw Error(ErrorCode::config, "gamma_th must be finite");
}

DetectorConfig parse_estimator(std::string_view spec, std::span<const int> channel_numbers,
                               DetectorConfig base) {
  if (spec == "variance") {
    base.estimator = EstimatorKind::variance;
  } else if (spec == "mean") {
    base.estimator = EstimatorKind::mean;
  } else if (spec.starts_with("single:")) {
    const auto digits = spec.substr(7);
    int channel = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), channel);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
      throw Error(ErrorCode::config, fmt::format("bad estimator '{}'", spec));
    }
    const auto it = std::find(channel_numbers.begin(), channel_numbers.end(), channel);
    if (it == channel_numbers.end()) {
      throw Error(ErrorCode::config, fmt::format("channel {} is not present in the data", channel));
    }
    base.estimator = EstimatorKind::single_channel;
    base.single_channel_index = static_cast<std::size_t>(it - channel_numbers.begin());
  } else {
    throw Error(ErrorCode::config,
                fmt::format("unknown estimator '{}' (expected variance, mean or single:<channel>)", spec));
  }
  return base;
}

std::vector<std::uint8_t> DetectionResult::indicators() const {
  std::vector<std::uint8_t> out(estimates.size(), 0);
  for (int id : obstructed) out[static_cast<std::size_t>(id - 1)] = 1;
  return out;
}

double channel_variance(std::span<const double> power_mw) {
  const double m = mean_of(power_mw);
  double acc = 0.0;
  for (double x : power_mw) acc += (x - m) * (x - m);
  return acc / static_cast<double>(power_mw.size());
}

AttenuationEstimate estimate_attenuation_variance(std::span<const double> calibration_mw,
                                                  std::span<const double> observation_mw,
                                                  double variance_floor) {
  require_multichannel(calibration_mw, observation_mw);
  if (!(variance_floor > 0.0)) throw Error(ErrorCode::invalid_argument, "variance floor must be positive");
  const double v_cal = std::max(channel_variance(calibration_mw), variance_floor);
  const double v_obs = std::max(channel_variance(observation_mw), variance_floor);
  return {0, 10.0 * std::log10(v_cal / v_obs), EstimatorKind::variance};
}

AttenuationEstimate estimate_attenuation_mean(std::span<const double> calibration_mw,
                                              std::span<const double> observation_mw) {
  require_multichannel(calibration_mw, observation_mw);
  const double m_cal = mean_of(calibration_mw);
  const double m_obs = mean_of(observation_mw);
  if (!(m_cal > 0.0) || !(m_obs > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "mean estimator needs positive mean power");
  }
  return {0, 10.0 * std::log10(m_cal / m_obs), EstimatorKind::mean};
}

AttenuationEstimate estimate_attenuation_single_channel(double calibration_mw, double observation_mw) {
  if (!(calibration_mw > 0.0) || !(observation_mw > 0.0) || !std::isfinite(calibration_mw) ||
      !std::isfinite(observation_mw)) {
    throw Error(ErrorCode::invalid_argument, "single-channel estimator needs positive finite power");
  }
  return {0, 10.0 * std::log10(calibration_mw / observation_mw), EstimatorKind::single_channel};
}

DetectionResult detect_links(const PowerMatrix& calibration, const PowerMatrix& observation,
                             const DetectorConfig& cfg) {
  cfg.validate();
  if (calibration.links() != observation.links() || calibration.channels() != observation.channels()) {
    throw Error(ErrorCode::shape_mismatch,
                fmt::format("calibration is {}x{} but observation is {}x{}", calibration.links(),
                            calibration.channels(), observation.links(), observation.channels()));
  }
  if (cfg.estimator == EstimatorKind::single_channel && cfg.single_channel_index >= calibration.channels()) {
    throw Error(ErrorCode::invalid_argument, "single-channel index out of range");
  }

  DetectionResult result;
  result.estimates.reserve(calibration.links());
  for (std::size_t l = 0; l < calibration.links(); ++l) {
    AttenuationEstimate est;
    switch (cfg.estimator) {
      case EstimatorKind::variance:
        est = estimate_attenuation_variance(calibration.row(l), observation.row(l), cfg.variance_floor);
        break;
      case EstimatorKind::mean:
        est = estimate_attenuation_mean(calibration.row(l), observation.row(l));
        break;
      case EstimatorKind::single_channel:
        est = estimate_attenuation_single_channel(calibration.at(l, cfg.single_channel_index),
                                                  observation.at(l, cfg.single_channel_index));
        break;
    }
    est.link_id = static_cast<int>(l) + 1;
    if (est.gamma_hat_db > cfg.gamma_th_db) result.obstructed.push_back(est.link_id);
    result.estimates.push_back(est);
  }
  return result;
}

DetectionResult detect_links(const Scene& scene, const RssTensor& calibration,
                             const RssTensor& observation, const DetectorConfig& cfg) {
  if (!calibration.same_shape(observation)) {
    throw Error(ErrorCode::shape_mismatch, "calibration and observation tensors differ in shape");
  }
  if (calibration.links() != scene.link_count()) {
    throw Error(ErrorCode::shape_mismatch,
                fmt::format("tensor has {} links but the scene has {}", calibration.links(), scene.link_count()));
  }
  return detect_links(calibration.channel_means_mw(), observation.channel_means_mw(), cfg);
}

DetectionResult rethreshold(const DetectionResult& result, double gamma_th_db) {
  DetectionResult out;
  out.estimates = result.estimates;
  for (const auto& est : out.estimates) {
    if (est.gamma_hat_db > gamma_th_db) out.obstructed.push_back(est.link_id);
  }
  return out;
}

}  // namespace dfl
