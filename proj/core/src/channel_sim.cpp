// SPDX-License-Identifier: Apache-2.0
#include "dfl/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "dfl/error.hpp"
#include "random_detail.hpp"

namespace dfl {

namespace {

constexpr std::uint64_t kEnvironmentTag = 0x454e56;  // "ENV"
constexpr std::uint64_t kRunTag = 0x52554e;          // "RUN"
constexpr std::uint64_t kConfounderTag = 0x434f4e;   // "CON"

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double amplitude_factor(double attenuation_db) { return std::pow(10.0, -attenuation_db / 20.0); }

}  // namespace

double ieee802154_center_hz(int channel) {
  if (channel < 11 || channel > 26) {
    throw Error(ErrorCode::invalid_argument,
                fmt::format("802.15.4 channel {} outside 11..26", channel));
  }
  return 2405e6 + 5e6 * (channel - 11);
}

ChannelPlan ChannelPlan::ieee802154(std::size_t count) {
  if (count < 1 || count > 16) {
    throw Error(ErrorCode::invalid_argument, fmt::format("channel count {} outside 1..16", count));
  }
  std::vector<int> numbers(count);
  for (std::size_t k = 0; k < count; ++k) numbers[k] = 11 + static_cast<int>(k);
  return from_numbers(std::move(numbers));
}

ChannelPlan ChannelPlan::from_numbers(std::vector<int> numbers) {
  if (numbers.empty()) throw Error(ErrorCode::invalid_argument, "channel plan needs at least one channel");
  ChannelPlan plan;
  for (int n : numbers) {
    const double f = ieee802154_center_hz(n);
    if (!plan.center_hz.empty() && !(f > plan.center_hz.back())) {
      throw Error(ErrorCode::invalid_argument, "channel frequencies must be strictly increasing");
    }
    plan.center_hz.push_back(f);
  }
  plan.channel_numbers = std::move(numbers);
  return plan;
}

double ChannelPlan::fractional_span() const noexcept {
  if (center_hz.empty()) return 0.0;
  return (center_hz.back() - center_hz.front()) / center_hz.front();
}

MultipathProfile::MultipathProfile(std::vector<double> amplitudes,
                                   std::vector<std::vector<double>> phases)
    : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.empty()) throw Error(ErrorCode::invalid_argument, "profile needs at least one path");
  for (double a : amplitudes_) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw Error(ErrorCode::invalid_argument, "path amplitudes must be finite and nonnegative");
    }
  }
  if (phases.empty()) throw Error(ErrorCode::invalid_argument, "profile needs at least one channel");
  phases_.reserve(phases.size() * amplitudes_.size());
  for (const auto& per_channel : phases) {
    if (per_channel.size() != amplitudes_.size()) {
      throw Error(ErrorCode::shape_mismatch, "one phase per path is required on every channel");
    }
    for (double theta : per_channel) {
      // Wrap into [0, 2*pi).
      double wrapped = std::fmod(theta, 2.0 * std::numbers::pi);
      if (wrapped < 0.0) wrapped += 2.0 * std::numbers::pi;
      phases_.push_back(wrapped);
    }
  }
}

std::size_t MultipathProfile::strongest_multipath() const noexcept {
  if (amplitudes_.size() < 2) return 0;
  return static_cast<std::size_t>(
      std::max_element(amplitudes_.begin() + 1, amplitudes_.end()) - amplitudes_.begin());
}

double received_power(const MultipathProfile& profile, std::size_t channel,
                      double los_attenuation_db) {
  std::complex<double> sum = std::polar(profile.amplitude(0) * amplitude_factor(los_attenuation_db),
                                        profile.phase(channel, 0));
  for (std::size_t i = 1; i < profile.path_count(); ++i) {
    sum += std::polar(profile.amplitude(i), profile.phase(channel, i));
  }
  return std::norm(sum);
}

double received_power(const MultipathProfile& profile, std::size_t channel,
                      std::span<const double> path_attenuation_db) {
  if (path_attenuation_db.size() != profile.path_count()) {
    throw Error(ErrorCode::shape_mismatch, "one attenuation per path is required");
  }
  std::complex<double> sum;
  for (std::size_t i = 0; i < profile.path_count(); ++i) {
    sum += std::polar(profile.amplitude(i) * amplitude_factor(path_attenuation_db[i]),
                      profile.phase(channel, i));
  }
  return std::norm(sum);
}

double path_loss_amplitude(double center_hz, double reference_amplitude, double reference_hz) {
  if (!(center_hz > 0.0) || !(reference_hz > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "frequencies must be positive");
  }
  return reference_amplitude * reference_hz / center_hz;
}

PowerDelta single_channel_power_delta(const MultipathProfile& profile, std::size_t channel,
                                      double gamma_db) {
  if (profile.path_count() < 2) {
    throw Error(ErrorCode::invalid_argument, "single-channel analysis needs at least two paths");
  }
  PowerDelta out;
  const double theta_los = profile.phase(channel, 0);
  for (std::size_t i = 1; i < profile.path_count(); ++i) {
    out.multipath += std::polar(profile.amplitude(i), profile.phase(channel, i) - theta_los);
  }
  out.delta_mw = received_power(profile, channel, 0.0) - received_power(profile, channel, gamma_db);
  return out;
}

std::string_view to_string(AttenuationShape shape) noexcept {
  switch (shape) {
    case AttenuationShape::linear: return "linear";
    case AttenuationShape::step: return "step";
    case AttenuationShape::raised_cosine: return "raised_cosine";
  }
  return "linear";
}

AttenuationShape parse_attenuation_shape(std::string_view name) {
  if (name == "linear") return AttenuationShape::linear;
  if (name == "step") return AttenuationShape::step;
  if (name == "raised_cosine") return AttenuationShape::raised_cosine;
  throw Error(ErrorCode::config, fmt::format("unknown attenuation shape '{}'", name));
}

double ObstructionModel::attenuation_db(double distance, int link_id) const {
  if (!(distance < radius)) return 0.0;
  double peak = gamma_max_db;
  if (link_id > 0 && static_cast<std::size_t>(link_id) <= per_link_gamma_max_db.size()) {
    peak = per_link_gamma_max_db[static_cast<std::size_t>(link_id - 1)];
  }
  const double u = std::max(distance, 0.0) / radius;
  double fraction = 0.0;
  if (custom_shape) {
    fraction = custom_shape(u);
  } else {
    switch (shape) {
      case AttenuationShape::linear: fraction = 1.0 - u; break;
      case AttenuationShape::step: fraction = 1.0; break;
      case AttenuationShape::raised_cosine:
        fraction = 0.5 * (1.0 + std::cos(std::numbers::pi * u));
        break;
    }
  }
  return peak * fraction;
}

void ObstructionModel::validate() const {
  if (!(radius > 0.0)) throw Error(ErrorCode::config, "obstruction radius must be positive");
  if (!(gamma_max_db > 0.0)) throw Error(ErrorCode::config, "gamma_max must be positive");
  for (double g : per_link_gamma_max_db) {
    if (!(g > 0.0)) throw Error(ErrorCode::config, "per-link gamma_max must be positive");
  }
}

void SimConfig::validate() const {
  if (path_count < 1) throw Error(ErrorCode::config, "path_count must be at least 1");
  if (samples < 1) throw Error(ErrorCode::config, "samples must be at least 1");
  if (!(noise_sigma_db >= 0.0)) throw Error(ErrorCode::config, "noise sigma must be nonnegative");
  if (!(multipath.rayleigh_scale >= 0.0)) throw Error(ErrorCode::config, "rayleigh scale must be nonnegative");
  if (!(quantization.step_db > 0.0)) throw Error(ErrorCode::config, "quantization step must be positive");
  if (!(confounders.rate >= 0.0 && confounders.rate <= 1.0)) {
    throw Error(ErrorCode::config, "confounder rate must be in [0, 1]");
  }
  if (!(confounders.attenuation_db >= 0.0)) {
    throw Error(ErrorCode::config, "confounder attenuation must be nonnegative");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1342543de82ef95ULL));
}

Environment Environment::generate(const Scene& scene, const ChannelPlan& plan,
                                  const SimConfig& sim, std::uint64_t seed) {
  sim.validate();
  const double los_amplitude = std::sqrt(dbm_to_mw(sim.los_power_dbm));
  std::vector<MultipathProfile> profiles;
  profiles.reserve(scene.link_count());
  for (std::size_t l = 0; l < scene.link_count(); ++l) {
    std::mt19937_64 rng(derive_seed(seed, kEnvironmentTag, l));
    std::vector<double> amplitudes(sim.path_count);
    amplitudes[0] = los_amplitude;
    for (std::size_t i = 1; i < sim.path_count; ++i) {
      amplitudes[i] = detail::rayleigh(rng, sim.multipath.rayleigh_scale * los_amplitude);
    }
    std::vector<std::vector<double>> phases(plan.count(), std::vector<double>(sim.path_count));
    for (auto& per_channel : phases) {
      for (auto& theta : per_channel) theta = detail::uniform_phase(rng);
    }
    profiles.emplace_back(std::move(amplitudes), std::move(phases));
  }
  return Environment(plan, std::move(profiles));
}

std::vector<double> los_attenuation_db(const Scene& scene, const ObstructionModel& obstruction,
                                       std::optional<Point> target) {
  std::vector<double> out(scene.link_count(), 0.0);
  if (!target) return out;
  for (const auto& link : scene.links()) {
    out[static_cast<std::size_t>(link.id - 1)] =
        obstruction.attenuation_db(point_line_distance(link, *target), link.id);
  }
  return out;
}

RssTensor simulate(const Environment& env, const Scene& scene, const ObstructionModel& obstruction,
                   std::optional<Point> target, const SimConfig& sim, std::uint64_t seed,
                   std::uint64_t stream, const WarningSink& warn) {
  sim.validate();
  obstruction.validate();
  if (env.links() != scene.link_count()) {
    throw Error(ErrorCode::shape_mismatch, "environment does not match the scene's link count");
  }
  if (target && !scene.area().contains(*target) && warn) {
    warn(fmt::format("target ({}, {}) lies outside the monitored area", target->x, target->y));
  }

  const auto& plan = env.plan();
  const auto gamma = los_attenuation_db(scene, obstruction, target);

  std::vector<double> channel_gain(plan.count(), 1.0);
  if (!sim.narrowband) {
    for (std::size_t c = 0; c < plan.count(); ++c) {
      const double a = path_loss_amplitude(plan.center_hz[c], 1.0, plan.center_hz.front());
      channel_gain[c] = a * a;
    }
  }

  RssTensor tensor(scene.link_count(), plan.channel_numbers, sim.samples, sim.quantization);
  std::mt19937_64 confounder_rng(derive_seed(seed, kConfounderTag, stream));
  const std::uint64_t run_seed = derive_seed(seed, kRunTag, stream);
  std::vector<double> attenuation;

  for (std::size_t l = 0; l < scene.link_count(); ++l) {
    const auto& profile = env.profile(l);
    attenuation.assign(profile.path_count(), 0.0);
    attenuation[0] = gamma[l];

    // Drawn for every link so the realization does not depend on the target.
    const double u = detail::uniform01(confounder_rng);
    if (target && gamma[l] == 0.0 && profile.path_count() > 1 && u < sim.confounders.rate) {
      attenuation[profile.strongest_multipath()] = sim.confounders.attenuation_db;
    }

    std::mt19937_64 noise_rng(derive_seed(run_seed, l));
    for (std::size_t c = 0; c < plan.count(); ++c) {
      const double clean_dbm = mw_to_dbm(received_power(profile, c, attenuation) * channel_gain[c]);
      auto cell = tensor.cell(l, c);
      for (auto& code : cell) {
        const double noise = sim.noise_sigma_db > 0.0 ? sim.noise_sigma_db * detail::standard_normal(noise_rng) : 0.0;
        code = sim.quantization.quantize(clean_dbm + noise);
      }
    }
  }
  return tensor;
}

RssTensor simulate_scene(const Scene& scene, const ChannelPlan& plan,
                         const ObstructionModel& obstruction, std::optional<Point> target,
                         const SimConfig& sim, std::uint64_t seed, std::uint64_t stream,
                         const WarningSink& warn) {
  const auto env = Environment::generate(scene, plan, sim, seed);
  return simulate(env, scene, obstruction, target, sim, seed, stream, warn);
}

}  // namespace dfl
