// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>
#include <random>

namespace dfl::detail {

// Bit-level conversions so simulated traces do not depend on the standard
// library's distribution implementations.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_phase(std::mt19937_64& rng) {
  return 2.0 * std::numbers::pi * uniform01(rng);
}

inline double standard_normal(std::mt19937_64& rng) {
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double rayleigh(std::mt19937_64& rng, double scale) {
  return scale * std::sqrt(-2.0 * std::log(1.0 - uniform01(rng)));
}

}  // namespace dfl::detail
