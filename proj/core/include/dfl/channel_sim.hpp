// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "dfl/rss_tensor.hpp"
#include "dfl/scene.hpp"

namespace dfl {

/// IEEE 802.15.4 2.4 GHz channel number (11..26) to center frequency.
double ieee802154_center_hz(int channel);

struct ChannelPlan {
  std::vector<int> channel_numbers;
  std::vector<double> center_hz;

  /// Channels 11, 12, ... for the first `count` 802.15.4 channels.
  static ChannelPlan ieee802154(std::size_t count = 16);
  static ChannelPlan from_numbers(std::vector<int> numbers);

  std::size_t count() const noexcept { return channel_numbers.size(); }
  /// (max f - min f) / min f; the narrowband simplification assumes this is small.
  double fractional_span() const noexcept;
};

/// Per-link multipath: P path amplitudes (sqrt(mW), index 0 is LOS) shared by
/// all channels, and one phase per (channel, path).
class MultipathProfile {
 public:
  MultipathProfile(std::vector<double> amplitudes, std::vector<std::vector<double>> phases);

  std::size_t path_count() const noexcept { return amplitudes_.size(); }
  std::size_t channel_count() const noexcept { return phases_.size() / amplitudes_.size(); }
  std::span<const double> amplitudes() const noexcept { return amplitudes_; }
  double amplitude(std::size_t path) const { return amplitudes_[path]; }
  double phase(std::size_t channel, std::size_t path) const {
    return phases_[channel * amplitudes_.size() + path];
  }

  /// Index of the strongest non-LOS path, or 0 when P == 1.
  std::size_t strongest_multipath() const noexcept;

 private:
  std::vector<double> amplitudes_;
  std::vector<double> phases_;
};

/// |10^(-gamma/20) A_1 e^{j theta_1} + sum_{i>=2} A_i e^{j theta_i}|^2 in mW.
double received_power(const MultipathProfile& profile, std::size_t channel,
                      double los_attenuation_db);

/// Same, with an independent attenuation (dB) per path.
double received_power(const MultipathProfile& profile, std::size_t channel,
                      std::span<const double> path_attenuation_db);

/// Amplitude at `center_hz` given its value at `reference_hz`; A scales as 1/f.
double path_loss_amplitude(double center_hz, double reference_amplitude,
                           double reference_hz = 2.405e9);

struct PowerDelta {
  double delta_mw = 0.0;                // unobstructed minus obstructed power
  std::complex<double> multipath;       // sum_{i>=2} A_i e^{j(theta_i - theta_1)}
  double multipath_amplitude() const noexcept { return std::abs(multipath); }
  double multipath_phase() const noexcept { return std::arg(multipath); }
};

/// Single-channel power change when the LOS path is attenuated by gamma dB.
/// Requires P >= 2.
PowerDelta single_channel_power_delta(const MultipathProfile& profile, std::size_t channel,
                                      double gamma_db);

/// Attenuation profile of a link's LOS path versus target distance. The
/// shape function maps d/R in [0, 1) to a fraction in (0, 1] and must be
/// nonincreasing; attenuation is zero for d >= R.
enum class AttenuationShape { linear, step, raised_cosine };

std::string_view to_string(AttenuationShape shape) noexcept;
AttenuationShape parse_attenuation_shape(std::string_view name);

struct ObstructionModel {
  double radius = 0.3;
  double gamma_max_db = 7.0;
  AttenuationShape shape = AttenuationShape::linear;
  std::function<double(double)> custom_shape;  // overrides `shape` when set
  std::vector<double> per_link_gamma_max_db;   // optional, indexed by link id - 1

  double attenuation_db(double distance, int link_id = 0) const;
  void validate() const;
};

struct MultipathRule {
  // Non-LOS amplitudes are Rayleigh with the given scale, relative to A_1.
  double rayleigh_scale = 0.2;
};

/// Blocked-multipath confounders: with probability `rate`, a link the target
/// does not obstruct has its strongest non-LOS path attenuated instead.
struct ConfounderModel {
  double rate = 0.0;
  double attenuation_db = 8.0;
};

struct SimConfig {
  std::size_t path_count = 5;
  double los_power_dbm = -45.0;
  MultipathRule multipath;
  double noise_sigma_db = 0.0;
  Quantization quantization;
  std::size_t samples = 100;
  bool narrowband = true;  // false: scale amplitudes as 1/f per channel
  ConfounderModel confounders;

  void validate() const;
};

/// Frozen per-link multipath for one deployment. The same environment is
/// used for calibration and for every observation.
class Environment {
 public:
  static Environment generate(const Scene& scene, const ChannelPlan& plan, const SimConfig& sim,
                              std::uint64_t seed);

  const MultipathProfile& profile(std::size_t link_index) const { return profiles_[link_index]; }
  std::size_t links() const noexcept { return profiles_.size(); }
  const ChannelPlan& plan() const noexcept { return plan_; }

 private:
  Environment(ChannelPlan plan, std::vector<MultipathProfile> profiles)
      : plan_(std::move(plan)), profiles_(std::move(profiles)) {}

  ChannelPlan plan_;
  std::vector<MultipathProfile> profiles_;
};

using WarningSink = std::function<void(std::string_view)>;

/// Independent 64-bit stream seed for (seed, a, b); used so that trials,
/// links and measurement runs never share RNG state.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Measurement run over a fixed environment. `stream` selects the noise and
/// confounder realization; calibration conventionally uses stream 0.
RssTensor simulate(const Environment& env, const Scene& scene, const ObstructionModel& obstruction,
                   std::optional<Point> target, const SimConfig& sim, std::uint64_t seed,
                   std::uint64_t stream, const WarningSink& warn = {});

/// Convenience: generate the environment from `seed`, then measure.
RssTensor simulate_scene(const Scene& scene, const ChannelPlan& plan,
                         const ObstructionModel& obstruction, std::optional<Point> target,
                         const SimConfig& sim, std::uint64_t seed, std::uint64_t stream = 0,
                         const WarningSink& warn = {});

/// Per-link LOS attenuation (dB) the simulator applies for a target.
std::vector<double> los_attenuation_db(const Scene& scene, const ObstructionModel& obstruction,
                                       std::optional<Point> target);

}  // namespace dfl
