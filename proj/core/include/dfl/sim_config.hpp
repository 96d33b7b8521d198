// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "dfl/channel_sim.hpp"

namespace dfl {

/// Everything the simulator needs besides the scene, as one JSON document:
///
///   {
///     "channels": 16,
///     "path_count": 5,
///     "los_power_dbm": -45,
///     "multipath": {"rayleigh_scale": 0.2},
///     "noise_sigma_db": 0.5,
///     "quantization": {"offset_dbm": -115, "step_db": 0.5},
///     "samples": 100,
///     "narrowband": true,
///     "obstruction": {"radius": 0.3, "gamma_max_db": 7, "shape": "linear"},
///     "confounders": {"rate": 0.0, "attenuation_db": 8}
///   }
///
/// Missing keys keep their defaults; unknown keys are rejected.
struct SimulationSetup {
  ChannelPlan plan = ChannelPlan::ieee802154(16);
  SimConfig sim;
  ObstructionModel obstruction;
};

SimulationSetup setup_from_json(const nlohmann::json& doc, const std::string& source_name = "<config>");
nlohmann::json to_json(const SimulationSetup& setup);
SimulationSetup load_setup(const std::filesystem::path& path);

}  // namespace dfl
