// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dfl/channel_sim.hpp"
#include "dfl/error.hpp"
#include "dfl/localization.hpp"
#include "generators.hpp"

namespace dfl {
namespace {

DetectionResult detection_with(std::size_t links, std::vector<std::pair<int, double>> hits) {
  DetectionResult d;
  for (std::size_t l = 0; l < links; ++l) d.estimates.push_back({static_cast<int>(l) + 1, 0.0});
  for (auto [id, g] : hits) {
    d.estimates[static_cast<std::size_t>(id - 1)].gamma_hat_db = g;
    d.obstructed.push_back(id);
  }
  std::sort(d.obstructed.begin(), d.obstructed.end());
  return d;
}

// Independent 2x2 normal-equation solve for the oracle.
Point oracle_wls(const WlsSystem& s) {
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (const auto& r : s.rows) {
    a11 += r.weight * r.a * r.a;
    a12 += r.weight * r.a * r.b;
    a22 += r.weight * r.b * r.b;
    b1 += r.weight * r.a * r.e;
    b2 += r.weight * r.b * r.e;
  }
  const double det = a11 * a22 - a12 * a12;
  return {(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};
}

TEST(Wls, ConcurrentLinesMeetAtTheirIntersection) {
  WlsSystem s;
  s.rows = {{1, 0, 1, 1.0}, {0, 1, 1, 2.0}, {1, -1, 0, 0.5}};
  const Point p = wls_solve(s);
  EXPECT_NEAR(p.x, 1.0, 1e-12);
  EXPECT_NEAR(p.y, 1.0, 1e-12);
  EXPECT_NEAR(s.objective(p), 0.0, 1e-20);
}

TEST(Wls, DegenerateGeometryThrows) {
  WlsSystem one;
  one.rows = {{1, 0, 1, 1.0}};
  WlsSystem parallel;
  parallel.rows = {{1, 0, 1, 1.0}, {2, 0, 3, 1.0}};
  for (const auto& s : {one, parallel}) {
    try {
      wls_solve(s);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::degenerate_geometry);
    }
  }
  WlsSystem zero_weight;
  zero_weight.rows = {{1, 0, 1, 0.0}, {0, 1, 1, 1.0}};
  EXPECT_THROW(wls_solve(zero_weight), Error);
}

TEST(Wls, WeightsFromLinks) {
  const auto scene = Scene::build({{1, {0, 0}}, {2, {2, 0}}, {3, {0, 2}}}, {0, 2, 0, 2});
  const auto det = detection_with(3, {{1, 6.0}, {2, 3.0}});
  const std::vector<int> ids{1, 2};
  const auto s = WlsSystem::from_links(scene, ids, det);
  ASSERT_EQ(s.rows.size(), 2u);
  const auto& l1 = scene.link(1).line;
  EXPECT_DOUBLE_EQ(s.rows[0].weight, 36.0 / l1.norm_sq());
  // Weighted objective equals the gamma^2-weighted squared distances.
  const Point p{0.7, 0.4};
  const double expected = 36.0 * std::pow(point_line_distance(scene.link(1), p), 2) +
                          9.0 * std::pow(point_line_distance(scene.link(2), p), 2);
  EXPECT_NEAR(s.objective(p), expected, 1e-12);
}

TEST(WlsProperty, MatchesOracleWithZeroGradient) {
  test::Gen gen(8);
  for (int i = 0; i < 500; ++i) {
    WlsSystem s;
    const int n = static_cast<int>(gen.integer(2, 12));
    for (int k = 0; k < n; ++k) {
      s.rows.push_back({gen.uniform(-3, 3), gen.uniform(-3, 3), gen.uniform(-5, 5), gen.uniform(0.1, 50)});
    }
    Point p;
    try {
      p = wls_solve(s);
    } catch (const Error&) {
      continue;
    }
    const Point q = oracle_wls(s);
    EXPECT_NEAR(p.x, q.x, 1e-8 * (1 + std::abs(q.x)));
    EXPECT_NEAR(p.y, q.y, 1e-8 * (1 + std::abs(q.y)));
    const Point g = s.gradient(p);
    double scale = 0;
    for (const auto& r : s.rows) scale += r.weight * (r.a * r.a + r.b * r.b) * (1 + std::abs(p.x) + std::abs(p.y));
    EXPECT_LT(std::hypot(g.x, g.y) / scale, 1e-10);
    // Nudging the minimizer never lowers the objective.
    const double f = s.objective(p);
    EXPECT_GE(s.objective({p.x + 1e-3, p.y}), f);
    EXPECT_GE(s.objective({p.x, p.y - 1e-3}), f);
  }
}

TEST(WlsProperty, GradientMatchesFiniteDifferences) {
  test::Gen gen(9);
  for (int i = 0; i < 200; ++i) {
    WlsSystem s;
    for (int k = 0; k < 5; ++k) {
      s.rows.push_back({gen.uniform(-3, 3), gen.uniform(-3, 3), gen.uniform(-5, 5), gen.uniform(0.1, 5)});
    }
    const Point p{gen.uniform(-2, 2), gen.uniform(-2, 2)};
    const double h = 1e-6;
    const Point g = s.gradient(p);
    const double gx = (s.objective({p.x + h, p.y}) - s.objective({p.x - h, p.y})) / (2 * h);
    const double gy = (s.objective({p.x, p.y + h}) - s.objective({p.x, p.y - h})) / (2 * h);
    EXPECT_NEAR(g.x, gx, 1e-5 * (1 + std::abs(gx)));
    EXPECT_NEAR(g.y, gy, 1e-5 * (1 + std::abs(gy)));
  }
}

TEST(CoarseGrid, CellsCoverTheArea) {
  CoarseGrid g{{0, 4.2, 0, 3.6}, 0.1, 0.3};
  EXPECT_EQ(g.columns(), 42u);
  EXPECT_EQ(g.rows(), 36u);
  EXPECT_NEAR(g.center(0).x, 0.05, 1e-12);
  EXPECT_NEAR(g.center(0).y, 0.05, 1e-12);
  EXPECT_NEAR(g.center(43).x, 0.15, 1e-12);
  EXPECT_NEAR(g.center(43).y, 0.15, 1e-12);
  CoarseGrid odd{{0, 1.0, 0, 1.0}, 0.3, 0.3};
  EXPECT_EQ(odd.columns(), 4u);
  EXPECT_NEAR(odd.center(3).x, 0.95, 1e-12);  // clipped last column
  g.cell_size = 0;
  EXPECT_THROW(g.validate(), Error);
}

TEST(Coarse, VotesAreGammaWeightedWithLowestIndexTies) {
  const auto scene = Scene::build({{1, {0, 0}}, {2, {2, 0}}, {3, {2, 2}}, {4, {0, 2}}}, {0, 2, 0, 2});
  // Diagonals 1-3 and 2-4 cross at (1, 1).
  const int d1 = scene.link_id(1, 3);
  const int d2 = scene.link_id(2, 4);
  const auto det = detection_with(scene.link_count(), {{d1, 5.0}, {d2, 4.0}});
  const CoarseGrid grid{scene.area(), 0.1, 0.3};
  const auto c = coarse_estimate(scene, det, grid);
  EXPECT_NEAR(c.votes[c.cell], 9.0, 1e-12);
  EXPECT_LT(point_line_distance(scene.link(d1), c.position), 0.3);
  EXPECT_LT(point_line_distance(scene.link(d2), c.position), 0.3);
  // Lowest index among the maxima.
  for (std::size_t n = 0; n < c.cell; ++n) EXPECT_LT(c.votes[n], c.votes[c.cell]);
  EXPECT_THROW(coarse_estimate(scene, detection_with(scene.link_count(), {}), grid), Error);
  try {
    coarse_estimate(scene, detection_with(scene.link_count(), {}), grid);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_detection);
  }
}

TEST(Coarse, SingleLinkVoteBand) {
  const auto scene = paper_layout();
  const int id = scene.link_id(2, 11);
  const auto det = detection_with(scene.link_count(), {{id, 5.0}});
  const CoarseGrid grid{scene.area(), 0.1, 0.3};
  const auto c = coarse_estimate(scene, det, grid);
  std::size_t first_max = c.votes.size();
  for (std::size_t n = 0; n < c.votes.size(); ++n) {
    if (c.votes[n] == 5.0) {
      EXPECT_LT(point_line_distance(scene.link(id), grid.center(n)), 0.3);
      first_max = std::min(first_max, n);
    } else {
      EXPECT_EQ(c.votes[n], 0.0);
    }
  }
  EXPECT_EQ(c.cell, first_max);
}

TEST(Coarse, ThreeConcurrentLines) {
  // Sensors placed so three links cross exactly at (2.0, 1.5).
  const auto scene = Scene::build({{1, {0.0, 0.0}},
                                   {2, {4.0, 3.0}},
                                   {3, {0.0, 1.5}},
                                   {4, {4.0, 1.5}},
                                   {5, {2.0, 0.0}},
                                   {6, {2.0, 3.0}}},
                                  {0.0, 4.0, 0.0, 3.0});
  const auto det = detection_with(scene.link_count(),
                                  {{scene.link_id(1, 2), 5.0}, {scene.link_id(3, 4), 5.0}, {scene.link_id(5, 6), 5.0}});
  const CoarseGrid grid{scene.area(), 0.1, 0.3};
  const auto c = coarse_estimate(scene, det, grid);
  // Direct enumeration of the vote map.
  for (std::size_t n = 0; n < c.votes.size(); ++n) {
    double m = 0.0;
    for (int id : det.obstructed) m += point_line_distance(scene.link(id), grid.center(n)) < 0.3 ? 5.0 : 0.0;
    EXPECT_EQ(c.votes[n], m);
  }
  // Equal weights leave a band of tied cells around the crossing; the
  // lowest index wins, so check the winner is tied and the band is centred.
  const double top = *std::max_element(c.votes.begin(), c.votes.end());
  EXPECT_EQ(c.votes[c.cell], top);
  double sx = 0.0, sy = 0.0;
  int tied = 0;
  for (std::size_t n = 0; n < c.votes.size(); ++n) {
    if (c.votes[n] != top) continue;
    sx += grid.center(n).x;
    sy += grid.center(n).y;
    ++tied;
  }
  EXPECT_LE(std::abs(sx / tied - 2.0), 0.1 + 1e-9);
  EXPECT_LE(std::abs(sy / tied - 1.5), 0.1 + 1e-9);
  EXPECT_LE(distance(c.position, {2.0, 1.5}), 0.3 * std::sqrt(2.0));
}

TEST(Coarse, NarrowRadiusPicksTheCrossing) {
  const auto scene = Scene::build({{1, {0.0, 0.0}},
                                   {2, {4.0, 3.0}},
                                   {3, {0.0, 1.5}},
                                   {4, {4.0, 1.5}},
                                   {5, {2.0, 0.0}},
                                   {6, {2.0, 3.0}}},
                                  {0.0, 4.0, 0.0, 3.0});
  const auto det = detection_with(scene.link_count(),
                                  {{scene.link_id(1, 2), 5.0}, {scene.link_id(3, 4), 5.0}, {scene.link_id(5, 6), 5.0}});
  const auto c = coarse_estimate(scene, det, CoarseGrid{scene.area(), 0.1, 0.08});
  EXPECT_LE(std::abs(c.position.x - 2.0), 0.1 + 1e-9);
  EXPECT_LE(std::abs(c.position.y - 1.5), 0.1 + 1e-9);
}

TEST(LocalizationProperty, WeightScaleInvariance) {
  test::Gen gen(19);
  const auto scene = paper_layout();
  for (int i = 0; i < 100; ++i) {
    const Point target{gen.uniform(0.5, 3.7), gen.uniform(0.5, 3.1)};
    std::vector<std::pair<int, double>> hits;
    for (const auto& link : scene.links()) {
      if (point_line_distance(link, target) < 0.3) hits.push_back({link.id, gen.uniform(4.0, 8.0)});
    }
    if (hits.size() < 2) continue;
    const double k = gen.uniform(0.2, 5.0);
    auto scaled = hits;
    for (auto& h : scaled) h.second *= k;
    const auto a = detection_with(scene.link_count(), hits);
    const auto b = detection_with(scene.link_count(), scaled);
    const CoarseGrid grid{scene.area(), 0.1, 0.3};
    EXPECT_EQ(coarse_estimate(scene, a, grid).cell, coarse_estimate(scene, b, grid).cell);
    try {
      const Point pa = wls_solve(WlsSystem::from_links(scene, a.obstructed, a));
      const Point pb = wls_solve(WlsSystem::from_links(scene, b.obstructed, b));
      EXPECT_NEAR(pa.x, pb.x, 1e-9);
      EXPECT_NEAR(pa.y, pb.y, 1e-9);
    } catch (const Error&) {
    }
  }
}

TEST(SpatialFilterProperty, ContainedAndIdempotent) {
  test::Gen gen(23);
  const auto scene = paper_layout();
  for (int i = 0; i < 200; ++i) {
    std::vector<std::pair<int, double>> hits;
    for (const auto& link : scene.links()) {
      if (gen.coin(0.1)) hits.push_back({link.id, 5.0});
    }
    const auto det = detection_with(scene.link_count(), hits);
    const Point c = gen.point(scene.area());
    const double r = gen.uniform(0.1, 2.0);
    const auto once = spatial_filter(scene, det, c, r);
    EXPECT_TRUE(std::includes(det.obstructed.begin(), det.obstructed.end(), once.obstructed.begin(),
                              once.obstructed.end()));
    EXPECT_EQ(spatial_filter(scene, once, c, r).obstructed, once.obstructed);
  }
}

TEST(SpatialFilter, KeepsOnlyNearbyLinks) {
  const auto scene = Scene::build({{1, {0, 0}}, {2, {2, 0}}, {3, {2, 2}}, {4, {0, 2}}}, {0, 2, 0, 2});
  const int bottom = scene.link_id(1, 2);
  const int top = scene.link_id(3, 4);
  const int diag = scene.link_id(1, 3);
  const auto det = detection_with(scene.link_count(), {{bottom, 5}, {top, 5}, {diag, 5}});
  const auto kept = spatial_filter(scene, det, {0.5, 0.4}, 0.5);
  EXPECT_EQ(kept.obstructed, (std::vector<int>{bottom, diag}));
  EXPECT_EQ(kept.estimates.size(), det.estimates.size());
  EXPECT_THROW(spatial_filter(scene, det, {0.5, 0.4}, 0.0), Error);
}

TEST(Localize, FallsBackToCoarseWhenFilterEmptiesOrDegenerates) {
  const auto scene = Scene::build({{1, {0, 0}}, {2, {2, 0}}, {3, {2, 2}}, {4, {0, 2}}}, {0, 2, 0, 2});
  LocalizerConfig cfg;
  const auto one = detection_with(scene.link_count(), {{scene.link_id(1, 3), 6.0}});
  const auto est = localize_detection(scene, one, cfg);
  EXPECT_EQ(est.status, EstimateStatus::coarse_only_degenerate);
  EXPECT_EQ(est.refined, est.coarse);
  EXPECT_EQ(est.filtered, (std::vector<int>{scene.link_id(1, 3)}));

  cfg.r_th = 1e-9;
  const auto two = detection_with(scene.link_count(), {{scene.link_id(1, 3), 6.0}, {scene.link_id(2, 4), 6.0}});
  const auto empty = localize_detection(scene, two, cfg);
  EXPECT_EQ(empty.status, EstimateStatus::coarse_only_empty);
  EXPECT_TRUE(empty.filtered.empty());
  EXPECT_EQ(empty.refined, empty.coarse);

  cfg.r_th = 0.5;
  const auto ok = localize_detection(scene, two, cfg);
  EXPECT_EQ(ok.status, EstimateStatus::refined);
  EXPECT_NEAR(ok.refined.x, 1.0, 1e-9);
  EXPECT_NEAR(ok.refined.y, 1.0, 1e-9);
  EXPECT_EQ(ok.indicators.size(), scene.link_count());
  EXPECT_EQ(to_string(EstimateStatus::coarse_only_empty), "coarse_only_empty");
}

TEST(Localize, FarSpuriousLinkIsRemoved) {
  const auto scene = paper_layout();
  // Three links crossing near (2.1, 1.8) plus one strong link along the bottom wall.
  const int a = scene.link_id(3, 11);
  const int b = scene.link_id(15, 8);
  const int c = scene.link_id(1, 10);
  const int far = scene.link_id(1, 5);
  const auto det = detection_with(scene.link_count(), {{a, 6}, {b, 6}, {c, 6}, {far, 6}});
  LocalizerConfig cfg;
  const auto rwls = localize_detection(scene, det, cfg);
  EXPECT_EQ(std::count(rwls.filtered.begin(), rwls.filtered.end(), far), 0);
  cfg.spatial_filter = false;
  const auto wls = localize_detection(scene, det, cfg);
  const auto clean = localize_detection(scene, detection_with(scene.link_count(), {{a, 6}, {b, 6}, {c, 6}}), cfg);
  EXPECT_LT(distance(rwls.refined, clean.refined), 1e-9);
  EXPECT_GT(distance(wls.refined, clean.refined), 0.2);
}

TEST(Localize, NoiseFreeSinglePathNearTarget) {
  const auto scene = paper_layout();
  SimConfig sim;
  sim.path_count = 1;
  sim.samples = 2;
  const auto plan = ChannelPlan::ieee802154(16);
  const ObstructionModel obs;
  // A single path carries no channel variance, so use the mean estimator.
  LocalizerConfig cfg;
  cfg.detector.estimator = EstimatorKind::mean;
  const Point target{2.1, 1.8};
  const auto est = rwls_localize(scene, simulate_scene(scene, plan, obs, std::nullopt, sim, 1),
                                 simulate_scene(scene, plan, obs, target, sim, 1, 1), cfg);
  EXPECT_EQ(est.status, EstimateStatus::refined);
  const Point q = oracle_wls(WlsSystem::from_links(scene, est.filtered, est.detection));
  EXPECT_NEAR(est.refined.x, q.x, 1e-9);
  EXPECT_NEAR(est.refined.y, q.y, 1e-9);
  EXPECT_LT(distance(est.refined, target), 0.15);
}

TEST(Localize, NoiseFreeSimulationLandsNearTarget) {
  const auto scene = paper_layout();
  const auto plan = ChannelPlan::ieee802154(16);
  SimConfig sim;
  const ObstructionModel obs;
  const auto env = Environment::generate(scene, plan, sim, 11);
  const auto cal = simulate(env, scene, obs, std::nullopt, sim, 11, 0);
  LocalizerConfig cfg;
  int near = 0;
  const auto grid = test_grid(scene.area(), 0.6);
  for (std::size_t t = 0; t < grid.size(); ++t) {
    const auto tensor = simulate(env, scene, obs, grid[t], sim, 11, t + 1);
    const auto est = rwls_localize(scene, cal, tensor, cfg);
    near += distance(est.refined, grid[t]) < 0.3 ? 1 : 0;
  }
  EXPECT_GE(near, 27);
}

}  // namespace
}  // namespace dfl
