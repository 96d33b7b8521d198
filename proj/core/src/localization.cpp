// SPDX-License-Identifier: Apache-2.0
#include "dfl/localization.hpp"

#include <cmath>

#include <fmt/format.h>

#include "dfl/error.hpp"

namespace dfl {

WlsSystem WlsSystem::from_links(const Scene& scene, std::span<const int> link_ids,
                                const DetectionResult& detection) {
  WlsSystem system;
  system.rows.reserve(link_ids.size());
  for (int id : link_ids) {
    const auto& line = scene.link(id).line;
    const double g = detection.gamma_hat(id);
    system.rows.push_back({line.a, line.b, line.e, g * g / line.norm_sq()});
  }
  return system;
}

double WlsSystem::objective(Point p) const noexcept {
  double sum = 0.0;
  for (const auto& r : rows) {
    const double residual = r.e - r.a * p.x - r.b * p.y;
    sum += r.weight * residual * residual;
  }
  return sum;
}

Point WlsSystem::gradient(Point p) const noexcept {
  Point g;
  for (const auto& r : rows) {
    const double residual = r.e - r.a * p.x - r.b * p.y;
    g.x -= 2.0 * r.weight * r.a * residual;
    g.y -= 2.0 * r.weight * r.b * residual;
  }
  return g;
}

Point wls_solve(const WlsSystem& system, const WlsOptions& options) {
  if (system.rows.size() < 2) {
    throw Error(ErrorCode::degenerate_geometry,
                fmt::format("WLS needs at least 2 links, got {}", system.rows.size()));
  }
  // Normal equations N p = r with N = H^T W H (symmetric 2x2).
  double n11 = 0.0, n12 = 0.0, n22 = 0.0, r1 = 0.0, r2 = 0.0;
  for (const auto& row : system.rows) {
    if (!(row.weight > 0.0) || !std::isfinite(row.weight)) {
      throw Error(ErrorCode::invalid_argument, "WLS weights must be positive and finite");
    }
    n11 += row.weight * row.a * row.a;
    n12 += row.weight * row.a * row.b;
    n22 += row.weight * row.b * row.b;
    r1 += row.weight * row.a * row.e;
    r2 += row.weight * row.b * row.e;
  }
  const double det = n11 * n22 - n12 * n12;
  const double half_trace = 0.5 * (n11 + n22);
  const double spread = std::hypot(0.5 * (n11 - n22), n12);
  const double lambda_max = half_trace + spread;
  // det / lambda_max avoids the cancellation in half_trace - spread.
  const double lambda_min = lambda_max > 0.0 ? det / lambda_max : 0.0;
  if (!(lambda_min > 0.0) || lambda_max / lambda_min > options.max_condition) {
    throw Error(ErrorCode::degenerate_geometry,
                "WLS normal matrix is singular or ill-conditioned (links nearly parallel)");
  }
  return {(n22 * r1 - n12 * r2) / det, (n11 * r2 - n12 * r1) / det};
}

std::size_t CoarseGrid::columns() const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(area.width() / cell_size - 1e-9)));
}

std::size_t CoarseGrid::rows() const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(area.height() / cell_size - 1e-9)));
}

Point CoarseGrid::center(std::size_t n) const {
  const std::size_t cols = columns();
  const std::size_t rws = rows();
  const std::size_t ix = n % cols;
  const std::size_t iy = n / cols;
  const auto axis = [this](std::size_t i, std::size_t count, double lo, double hi) {
    const double start = lo + static_cast<double>(i) * cell_size;
    if (i + 1 == count) return 0.5 * (start + hi);
    return start + 0.5 * cell_size;
  };
  return {axis(ix, cols, area.x_min, area.x_max), axis(iy, rws, area.y_min, area.y_max)};
}

void CoarseGrid::validate() const {
  if (!(cell_size > 0.0)) throw Error(ErrorCode::config, "grid cell size must be positive");
  if (!(vote_radius > 0.0)) throw Error(ErrorCode::config, "vote radius must be positive");
  if (!(area.x_min < area.x_max) || !(area.y_min < area.y_max)) {
    throw Error(ErrorCode::config, "grid area is empty");
  }
}

CoarseEstimate coarse_estimate(const Scene& scene, const DetectionResult& detection,
                               const CoarseGrid& grid) {
  grid.validate();
  if (detection.obstructed.empty()) {
    throw Error(ErrorCode::no_detection, "no obstructed links detected");
  }
  CoarseEstimate out;
  out.columns = grid.columns();
  out.rows = grid.rows();
  out.votes.assign(grid.cell_count(), 0.0);
  for (std::size_t n = 0; n < out.votes.size(); ++n) {
    const Point c = grid.center(n);
    double m = 0.0;
    for (int id : detection.obstructed) {
      if (point_line_distance(scene.link(id), c, grid.distance_mode) < grid.vote_radius) {
        m += detection.gamma_hat(id);
      }
    }
    out.votes[n] = m;
  }
  std::size_t best = 0;
  for (std::size_t n = 1; n < out.votes.size(); ++n) {
    if (out.votes[n] > out.votes[best]) best = n;
  }
  out.cell = best;
  out.position = grid.center(best);
  return out;
}

DetectionResult spatial_filter(const Scene& scene, const DetectionResult& detection, Point coarse,
                               double r_th, DistanceMode mode) {
  if (!(r_th > 0.0)) throw Error(ErrorCode::invalid_argument, "R_th must be positive");
  DetectionResult out;
  out.estimates = detection.estimates;
  for (int id : detection.obstructed) {
    if (point_line_distance(scene.link(id), coarse, mode) < r_th) out.obstructed.push_back(id);
  }
  return out;
}

void LocalizerConfig::validate() const {
  detector.validate();
  if (!(grid_cell > 0.0)) throw Error(ErrorCode::config, "grid cell size must be positive");
  if (!(vote_radius > 0.0)) throw Error(ErrorCode::config, "vote radius must be positive");
  if (!(r_th > 0.0)) throw Error(ErrorCode::config, "R_th must be positive");
  if (!(wls.max_condition > 1.0)) throw Error(ErrorCode::config, "condition cap must exceed 1");
}

std::string_view to_string(EstimateStatus status) noexcept {
  switch (status) {
    case EstimateStatus::refined: return "refined";
    case EstimateStatus::coarse_only_empty: return "coarse_only_empty";
    case EstimateStatus::coarse_only_degenerate: return "coarse_only_degenerate";
  }
  return "refined";
}

PositionEstimate localize_detection(const Scene& scene, const DetectionResult& detection,
                                    const LocalizerConfig& cfg) {
  cfg.validate();
  PositionEstimate out;
  out.detection = detection;
  const CoarseGrid grid{scene.area(), cfg.grid_cell, cfg.vote_radius, cfg.distance_mode};
  out.grid = coarse_estimate(scene, detection, grid);
  out.coarse = out.grid.position;

  const DetectionResult kept =
      cfg.spatial_filter ? spatial_filter(scene, detection, out.coarse, cfg.r_th, cfg.distance_mode)
                         : detection;
  out.filtered = kept.obstructed;
  out.indicators = kept.indicators();
  out.refined = out.coarse;

  if (out.filtered.empty()) {
    out.status = EstimateStatus::coarse_only_empty;
    return out;
  }
  try {
    out.refined = wls_solve(WlsSystem::from_links(scene, out.filtered, detection), cfg.wls);
    out.status = EstimateStatus::refined;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::degenerate_geometry) throw;
    out.status = EstimateStatus::coarse_only_degenerate;
  }
  return out;
}

PositionEstimate rwls_localize(const Scene& scene, const RssTensor& calibration,
                               const RssTensor& observation, const LocalizerConfig& cfg) {
  return localize_detection(scene, detect_links(scene, calibration, observation, cfg.detector), cfg);
}

}  // namespace dfl
