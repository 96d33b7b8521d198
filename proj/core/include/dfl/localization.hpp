// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dfl/detection.hpp"
#include "dfl/rss_tensor.hpp"
#include "dfl/scene.hpp"

namespace dfl {

/// One line constraint a*x + b*y = e with its weight.
struct WlsRow {
  double a = 0.0;
  double b = 0.0;
  double e = 0.0;
  double weight = 0.0;
};

struct WlsSystem {
  std::vector<WlsRow> rows;

  /// Rows for the given links, weighted gamma_hat^2 / (a^2 + b^2) so the
  /// objective is the gamma_hat^2-weighted sum of squared point-line distances.
  static WlsSystem from_links(const Scene& scene, std::span<const int> link_ids,
                              const DetectionResult& detection);

  /// sum_l w_l (e_l - a_l x - b_l y)^2
  double objective(Point p) const noexcept;
  /// Analytic gradient of `objective`.
  Point gradient(Point p) const noexcept;
};

struct WlsOptions {
  double max_condition = 1e8;  // relative condition cap on H^T W H
};

/// Closed-form minimizer (H^T W H)^{-1} H^T W e. Throws degenerate_geometry
/// for fewer than two rows or an ill-conditioned normal matrix.
Point wls_solve(const WlsSystem& system, const WlsOptions& options = {});

struct CoarseGrid {
  MonitoredArea area;
  double cell_size = 0.1;    // grid pitch
  double vote_radius = 0.3;  // a link votes for cells whose center is closer than this
  DistanceMode distance_mode = DistanceMode::infinite_line;

  std::size_t columns() const;  // cells along x
  std::size_t rows() const;     // cells along y
  std::size_t cell_count() const { return columns() * rows(); }
  /// Center of cell n (row-major, row = y index). The last row/column is
  /// clipped to the area, so every center is inside it.
  Point center(std::size_t n) const;
  void validate() const;
};

struct CoarseEstimate {
  Point position;
  std::size_t cell = 0;
  std::size_t columns = 0;
  std::size_t rows = 0;
  std::vector<double> votes;  // M_n, row-major
};

/// gamma_hat-weighted vote over the grid; argmax cell center, ties to the
/// lowest cell index. Throws no_detection for an empty obstructed set.
CoarseEstimate coarse_estimate(const Scene& scene, const DetectionResult& detection,
                               const CoarseGrid& grid);

/// Keep obstructed links closer than `r_th` to `coarse`.
DetectionResult spatial_filter(const Scene& scene, const DetectionResult& detection, Point coarse,
                               double r_th, DistanceMode mode = DistanceMode::infinite_line);

struct LocalizerConfig {
  DetectorConfig detector;
  double grid_cell = 0.1;
  double vote_radius = 0.3;
  double r_th = 0.5;
  bool spatial_filter = true;  // false: plain WLS on every detected link
  DistanceMode distance_mode = DistanceMode::infinite_line;
  WlsOptions wls;

  void validate() const;
};

enum class EstimateStatus {
  refined,              // WLS on the filtered set
  coarse_only_empty,    // nothing survived the spatial filter
  coarse_only_degenerate,  // WLS geometry was degenerate after filtering
};

std::string_view to_string(EstimateStatus status) noexcept;

struct PositionEstimate {
  Point coarse;
  Point refined;  // equals `coarse` unless status == refined
  EstimateStatus status = EstimateStatus::refined;
  DetectionResult detection;      // L_D with per-link estimates
  std::vector<int> filtered;      // L'_D (== L_D when the filter is off)
  std::vector<std::uint8_t> indicators;  // I-hat per link: membership in L'_D
  CoarseEstimate grid;
};

/// Steps 2-4 of the pipeline for an existing detection result.
PositionEstimate localize_detection(const Scene& scene, const DetectionResult& detection,
                                    const LocalizerConfig& cfg);

/// Full pipeline: detect, coarse vote, spatial filter, WLS refinement.
PositionEstimate rwls_localize(const Scene& scene, const RssTensor& calibration,
                               const RssTensor& observation, const LocalizerConfig& cfg);

}  // namespace dfl
