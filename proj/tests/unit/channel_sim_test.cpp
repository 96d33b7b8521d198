// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <string>

#include <gtest/gtest.h>

#include "dfl/channel_sim.hpp"
#include "dfl/error.hpp"
#include "generators.hpp"

namespace dfl {
namespace {

constexpr double kPi = std::numbers::pi;

MultipathProfile one_channel(std::vector<double> amplitudes, std::vector<double> phases) {
  return MultipathProfile(std::move(amplitudes), {std::move(phases)});
}

TEST(ReceivedPower, WorkedExamples) {
  EXPECT_DOUBLE_EQ(received_power(one_channel({1.0}, {0.0}), 0, 0.0), 1.0);
  EXPECT_NEAR(received_power(one_channel({1.0}, {0.0}), 0, 20.0), 0.01, 1e-15);
  EXPECT_NEAR(received_power(one_channel({1.0, 1.0}, {0.0, kPi}), 0, 0.0), 0.0, 1e-30);
}

TEST(ReceivedPower, PerPathAttenuationMatchesLosOverload) {
  test::Gen gen(5);
  for (int i = 0; i < 200; ++i) {
    const auto p = one_channel({gen.uniform(0, 2), gen.uniform(0, 1), gen.uniform(0, 1)},
                               {gen.uniform(0, 7), gen.uniform(-7, 7), gen.uniform(0, 20)});
    const double gamma = gen.uniform(0, 15);
    const std::vector<double> att{gamma, 0.0, 0.0};
    EXPECT_NEAR(received_power(p, 0, att), received_power(p, 0, gamma), 1e-12);
  }
  const auto p = one_channel({1.0, 1.0}, {0.0, 0.0});
  EXPECT_THROW(received_power(p, 0, std::vector<double>{1.0}), Error);
}

TEST(MultipathProfile, WrapsPhasesAndFindsStrongestPath) {
  const MultipathProfile p({1.0, 0.2, 0.7, 0.5}, {{-kPi / 2, 3 * kPi, 0.0, 2 * kPi}});
  EXPECT_NEAR(p.phase(0, 0), 1.5 * kPi, 1e-12);
  EXPECT_NEAR(p.phase(0, 1), kPi, 1e-12);
  EXPECT_GE(p.phase(0, 3), 0.0);
  EXPECT_LT(p.phase(0, 3), 2 * kPi);
  EXPECT_EQ(p.strongest_multipath(), 2u);
  EXPECT_EQ(one_channel({1.0}, {0.0}).strongest_multipath(), 0u);
  EXPECT_THROW(MultipathProfile({-1.0}, {{0.0}}), Error);
  EXPECT_THROW(MultipathProfile({1.0, 1.0}, {{0.0}}), Error);
}

TEST(PathLoss, AmplitudeScalesInverselyWithFrequency) {
  EXPECT_DOUBLE_EQ(path_loss_amplitude(2.405e9, 0.7), 0.7);
  EXPECT_DOUBLE_EQ(path_loss_amplitude(4.81e9, 0.7), 0.35);
  EXPECT_NEAR(path_loss_amplitude(2.405e9, 1.0) / path_loss_amplitude(2.480e9, 1.0), 2.480 / 2.405, 1e-12);
  EXPECT_NEAR(2.480 / 2.405, 1.031, 5e-4);
  EXPECT_THROW(path_loss_amplitude(0.0, 1.0), Error);
}

TEST(ChannelPlan, Ieee802154Frequencies) {
  EXPECT_DOUBLE_EQ(ieee802154_center_hz(11), 2.405e9);
  EXPECT_DOUBLE_EQ(ieee802154_center_hz(26), 2.480e9);
  EXPECT_THROW(ieee802154_center_hz(10), Error);
  EXPECT_THROW(ieee802154_center_hz(27), Error);
  const auto plan = ChannelPlan::ieee802154(16);
  EXPECT_EQ(plan.count(), 16u);
  EXPECT_EQ(plan.channel_numbers.back(), 26);
  EXPECT_NEAR(plan.fractional_span(), 0.075 / 2.405, 1e-12);
  EXPECT_LT(plan.fractional_span(), 0.05);
  EXPECT_THROW(ChannelPlan::from_numbers({12, 11}), Error);
  EXPECT_THROW(ChannelPlan::from_numbers({}), Error);
  EXPECT_THROW(ChannelPlan::ieee802154(17), Error);
}

TEST(PowerDelta, PhaseQuadratureGivesPureAttenuation) {
  const double gamma = 6.0;
  const auto p = one_channel({1.3, 0.8}, {0.4, 0.4 + kPi / 2});
  const auto d = single_channel_power_delta(p, 0, gamma);
  EXPECT_NEAR(d.delta_mw, (1 - std::pow(10.0, -gamma / 10)) * 1.3 * 1.3, 1e-12);
  EXPECT_NEAR(d.multipath_amplitude(), 0.8, 1e-12);
  EXPECT_NEAR(d.multipath_phase(), kPi / 2, 1e-12);
}

TEST(PowerDelta, NoMultipathAlwaysAttenuates) {
  const auto p = one_channel({1.0, 0.0}, {0.0, 1.0});
  for (double gamma : {0.5, 3.0, 10.0}) EXPECT_GT(single_channel_power_delta(p, 0, gamma).delta_mw, 0.0);
}

TEST(PowerDelta, StrongOpposedMultipathEnhancesRss) {
  const auto p = one_channel({0.1, 1.0}, {0.0, kPi});
  const auto d = single_channel_power_delta(p, 0, 6.0);
  EXPECT_LT(d.delta_mw, 0.0);
  EXPECT_THROW(single_channel_power_delta(one_channel({1.0}, {0.0}), 0, 6.0), Error);
}

// delta = (1 - g) A1 [(1 + g) A1 + 2 A_M cos(theta_M)], g = 10^(-gamma/20).
TEST(PowerDeltaProperty, MatchesClosedForm) {
  test::Gen gen(21);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t paths = static_cast<std::size_t>(gen.integer(2, 6));
    std::vector<double> amps(paths), phases(paths);
    for (std::size_t k = 0; k < paths; ++k) {
      amps[k] = gen.uniform(0.0, 1.5);
      phases[k] = gen.uniform(0.0, 2 * kPi);
    }
    const auto p = one_channel(amps, phases);
    const double gamma = gen.uniform(0.0, 20.0);
    const auto d = single_channel_power_delta(p, 0, gamma);
    const double g = std::pow(10.0, -gamma / 20.0);
    const double a1 = amps[0];
    const double expected =
        (1 - g) * a1 * ((1 + g) * a1 + 2 * d.multipath_amplitude() * std::cos(d.multipath_phase()));
    EXPECT_NEAR(d.delta_mw, expected, 1e-10);
    const bool enhanced = a1 < -2 * d.multipath_amplitude() * std::cos(d.multipath_phase()) / (1 + g);
    if (gamma > 1e-6 && std::abs(d.delta_mw) > 1e-9) EXPECT_EQ(d.delta_mw < 0, enhanced);
  }
}

// Mean and variance of |sum A_i e^{j theta_i}|^2 over uniform phases,
// at a Monte-Carlo size suited to a unit test (the 1e6 check lives in the
// acceptance suite).
TEST(MomentProperty, MeanAndVarianceClosedForms) {
  test::Gen gen(31);
  for (std::size_t paths : {2u, 3u, 5u}) {
    std::vector<double> amps(paths);
    for (auto& a : amps) a = gen.uniform(0.2, 1.0);
    const double gamma = gen.uniform(0.0, 10.0);
    std::vector<double> eff = amps;
    eff[0] *= std::pow(10.0, -gamma / 20.0);
    double mean_cf = 0.0, var_cf = 0.0;
    for (std::size_t i = 0; i < paths; ++i) {
      mean_cf += eff[i] * eff[i];
      for (std::size_t j = i + 1; j < paths; ++j) var_cf += 2 * eff[i] * eff[i] * eff[j] * eff[j];
    }
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    std::vector<double> ph(paths);
    for (int k = 0; k < n; ++k) {
      for (auto& t : ph) t = gen.uniform(0, 2 * kPi);
      const double pw = received_power(one_channel(amps, ph), 0, gamma);
      s += pw;
      s2 += pw * pw;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    EXPECT_NEAR(mean / mean_cf, 1.0, 0.01) << paths;
    EXPECT_NEAR(var / var_cf, 1.0, 0.03) << paths;
  }
}

TEST(Obstruction, ProfileShapes) {
  ObstructionModel m;
  EXPECT_DOUBLE_EQ(m.attenuation_db(0.0), 7.0);
  EXPECT_DOUBLE_EQ(m.attenuation_db(0.15), 3.5);
  EXPECT_EQ(m.attenuation_db(0.3), 0.0);
  EXPECT_EQ(m.attenuation_db(1.0), 0.0);
  m.shape = AttenuationShape::step;
  EXPECT_DOUBLE_EQ(m.attenuation_db(0.29), 7.0);
  m.shape = AttenuationShape::raised_cosine;
  EXPECT_DOUBLE_EQ(m.attenuation_db(0.15), 3.5);
  m.custom_shape = [](double u) { return 1.0 - u * u; };
  EXPECT_DOUBLE_EQ(m.attenuation_db(0.15), 7.0 * 0.75);
  m.custom_shape = nullptr;
  m.per_link_gamma_max_db = {10.0, 2.0};
  EXPECT_DOUBLE_EQ(m.attenuation_db(0.0, 2), 2.0);
  EXPECT_DOUBLE_EQ(m.attenuation_db(0.0, 3), 7.0);
  EXPECT_EQ(parse_attenuation_shape("raised_cosine"), AttenuationShape::raised_cosine);
  EXPECT_THROW(parse_attenuation_shape("cubic"), Error);
}

TEST(ObstructionProperty, PositiveInsideZeroOutsideNonincreasing) {
  test::Gen gen(41);
  for (auto shape : {AttenuationShape::linear, AttenuationShape::step, AttenuationShape::raised_cosine}) {
    ObstructionModel m;
    m.shape = shape;
    m.radius = gen.uniform(0.1, 1.0);
    double prev = m.attenuation_db(0.0);
    for (int k = 1; k < 1000; ++k) {
      const double d = m.radius * k / 1000.0;
      const double v = m.attenuation_db(d);
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, prev + 1e-12);
      prev = v;
    }
    EXPECT_EQ(m.attenuation_db(m.radius), 0.0);
  }
}

Scene line_scene() { return Scene::build({{1, {0, 0}}, {2, {2, 0}}, {3, {0, 2}}}, {0, 2, 0, 2}); }

SimConfig clean_single_path() {
  SimConfig sim;
  sim.path_count = 1;
  sim.samples = 4;
  return sim;
}

TEST(Simulate, IsDeterministic) {
  const auto scene = paper_layout();
  const auto plan = ChannelPlan::ieee802154(16);
  SimConfig sim;
  sim.noise_sigma_db = 0.5;
  const ObstructionModel obs;
  const auto a = simulate_scene(scene, plan, obs, Point{2.1, 1.8}, sim, 99, 3);
  const auto b = simulate_scene(scene, plan, obs, Point{2.1, 1.8}, sim, 99, 3);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, simulate_scene(scene, plan, obs, Point{2.1, 1.8}, sim, 99, 4));
  EXPECT_NE(a, simulate_scene(scene, plan, obs, Point{2.1, 1.8}, sim, 100, 3));
  SimConfig quiet;
  const auto cal1 = simulate_scene(scene, ChannelPlan::ieee802154(2), obs, std::nullopt, quiet, 5, 0);
  const auto cal2 = simulate_scene(scene, ChannelPlan::ieee802154(2), obs, std::nullopt, quiet, 5, 7);
  EXPECT_EQ(cal1, cal2);
}

TEST(Simulate, SinglePathMidpointDropsByGammaMax) {
  const auto scene = line_scene();
  ObstructionModel obs;
  obs.gamma_max_db = 10.0;
  const auto sim = clean_single_path();
  const auto plan = ChannelPlan::ieee802154(4);
  const auto cal = simulate_scene(scene, plan, obs, std::nullopt, sim, 1);
  const auto hit = simulate_scene(scene, plan, obs, Point{1.0, 0.0}, sim, 1, 1);
  const std::size_t l = static_cast<std::size_t>(scene.link_id(1, 2) - 1);
  for (std::size_t c = 0; c < plan.count(); ++c) {
    EXPECT_EQ(cal.code(l, c, 0), 140);
    EXPECT_EQ(hit.code(l, c, 0), 120);  // 10 dB at 0.5 dB per code
  }
}

TEST(Simulate, FarTargetLeavesTensorUnchangedAndWarns) {
  const auto scene = line_scene();
  SimConfig sim;
  const auto plan = ChannelPlan::ieee802154(3);
  const ObstructionModel obs;
  std::string warning;
  const auto env = Environment::generate(scene, plan, sim, 8);
  const auto cal = simulate(env, scene, obs, std::nullopt, sim, 8, 0);
  const auto far = simulate(env, scene, obs, Point{10.0, 10.0}, sim, 8, 1,
                            [&](std::string_view w) { warning = std::string(w); });
  EXPECT_EQ(cal, far);
  EXPECT_NE(warning.find("outside"), std::string::npos);
}

TEST(Simulate, NoiseAveragesOut) {
  const auto scene = line_scene();
  SimConfig sim = clean_single_path();
  sim.samples = 4000;
  sim.noise_sigma_db = 0.5;
  const auto t = simulate_scene(scene, ChannelPlan::ieee802154(1), ObstructionModel{}, std::nullopt, sim, 2);
  const auto m = t.channel_means_mw();
  EXPECT_NEAR(mw_to_dbm(m.at(0, 0)), -45.0, 0.1);
}

TEST(Simulate, WidebandGainFollowsInverseSquareFrequency) {
  const auto scene = line_scene();
  SimConfig sim = clean_single_path();
  sim.narrowband = false;
  sim.los_power_dbm = -114.0;
  sim.quantization = {-115.0, 0.01};
  const auto t = simulate_scene(scene, ChannelPlan::ieee802154(16), ObstructionModel{}, std::nullopt, sim, 3);
  EXPECT_EQ(t.code(0, 0, 0), 100);
  const double expected_db = -114.0 + 20.0 * std::log10(2.405 / 2.480);
  EXPECT_EQ(t.code(0, 15, 0), sim.quantization.quantize(expected_db));
}

TEST(Environment, AmplitudesFrozenAcrossChannels) {
  const auto scene = paper_layout();
  SimConfig sim;
  const auto env = Environment::generate(scene, ChannelPlan::ieee802154(16), sim, 4);
  ASSERT_EQ(env.links(), 120u);
  for (std::size_t l = 0; l < env.links(); ++l) {
    const auto& p = env.profile(l);
    EXPECT_EQ(p.path_count(), 5u);
    EXPECT_EQ(p.channel_count(), 16u);
    EXPECT_NEAR(p.amplitude(0), std::sqrt(dbm_to_mw(-45.0)), 1e-15);
    for (std::size_t c = 0; c < 16; ++c) {
      for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_GE(p.phase(c, i), 0.0);
        EXPECT_LT(p.phase(c, i), 2 * kPi);
      }
    }
  }
}

TEST(Simulate, ConfoundersOnlyTouchUnobstructedLinksWhenTargetPresent) {
  const auto scene = paper_layout();
  SimConfig sim;
  sim.confounders.rate = 1.0;
  const auto plan = ChannelPlan::ieee802154(16);
  const ObstructionModel obs;
  const auto env = Environment::generate(scene, plan, sim, 6);
  const auto cal = simulate(env, scene, obs, std::nullopt, sim, 6, 0);
  EXPECT_EQ(cal, simulate(env, scene, obs, std::nullopt, sim, 6, 1));
  const Point target{2.1, 1.8};
  const auto hit = simulate(env, scene, obs, target, sim, 6, 1);
  SimConfig plain = sim;
  plain.confounders.rate = 0.0;
  const auto ref = simulate(env, scene, obs, target, plain, 6, 1);
  const auto gamma = los_attenuation_db(scene, obs, target);
  std::size_t changed = 0;
  for (std::size_t l = 0; l < scene.link_count(); ++l) {
    bool differs = false;
    for (std::size_t c = 0; c < plan.count(); ++c) differs = differs || hit.cell(l, c)[0] != ref.cell(l, c)[0];
    if (gamma[l] > 0.0) EXPECT_FALSE(differs) << l;
    changed += differs ? 1 : 0;
  }
  EXPECT_GT(changed, 50u);
}

TEST(SimConfig, Validation) {
  SimConfig sim;
  EXPECT_NO_THROW(sim.validate());
  sim.path_count = 0;
  EXPECT_THROW(sim.validate(), Error);
  sim = {};
  sim.confounders.rate = 1.5;
  EXPECT_THROW(sim.validate(), Error);
  sim = {};
  sim.noise_sigma_db = -1;
  EXPECT_THROW(sim.validate(), Error);
  ObstructionModel obs;
  obs.radius = 0;
  EXPECT_THROW(obs.validate(), Error);
}

}  // namespace
}  // namespace dfl
