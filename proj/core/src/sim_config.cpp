// SPDX-License-Identifier: Apache-2.0
#include "dfl/sim_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <type_traits>

#include <fmt/format.h>

#include "dfl/error.hpp"

namespace dfl {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& source,
                    std::string_view where) {
  for (const auto& [key, _] : obj.items()) {
    if (!known.contains(key)) {
      throw ConfigError(source, 0, fmt::format("unknown key '{}{}'", where, key));
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& source) {
  if (!obj.contains(key)) return;
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (!obj.at(key).is_number_unsigned()) {
      throw ConfigError(source, 0, fmt::format("'{}' must be a nonnegative integer", key));
    }
  }
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(source, 0, fmt::format("bad value for '{}': {}", key, e.what()));
  }
}

}  // namespace

SimulationSetup setup_from_json(const json& doc, const std::string& source) {
  if (!doc.is_object()) throw ConfigError(source, 0, "simulation config must be a JSON object");
  reject_unknown(doc,
                 {"channels", "channel_numbers", "path_count", "los_power_dbm", "multipath",
                  "noise_sigma_db", "quantization", "samples", "narrowband", "obstruction",
                  "confounders"},
                 source, "");
  SimulationSetup setup;
  try {
    if (doc.contains("channel_numbers")) {
      setup.plan = ChannelPlan::from_numbers(doc.at("channel_numbers").get<std::vector<int>>());
    } else if (doc.contains("channels")) {
      setup.plan = ChannelPlan::ieee802154(doc.at("channels").get<std::size_t>());
    }
  } catch (const json::exception& e) {
    throw ConfigError(source, 0, fmt::format("bad channel plan: {}", e.what()));
  } catch (const Error& e) {
    throw ConfigError(source, 0, e.what());
  }

  auto& sim = setup.sim;
  read(doc, "path_count", sim.path_count, source);
  read(doc, "los_power_dbm", sim.los_power_dbm, source);
  read(doc, "noise_sigma_db", sim.noise_sigma_db, source);
  read(doc, "samples", sim.samples, source);
  read(doc, "narrowband", sim.narrowband, source);
  if (doc.contains("multipath")) {
    const auto& m = doc.at("multipath");
    reject_unknown(m, {"rayleigh_scale"}, source, "multipath.");
    read(m, "rayleigh_scale", sim.multipath.rayleigh_scale, source);
  }
  if (doc.contains("quantization")) {
    const auto& q = doc.at("quantization");
    reject_unknown(q, {"offset_dbm", "step_db"}, source, "quantization.");
    read(q, "offset_dbm", sim.quantization.offset_dbm, source);
    read(q, "step_db", sim.quantization.step_db, source);
  }
  if (doc.contains("confounders")) {
    const auto& c = doc.at("confounders");
    reject_unknown(c, {"rate", "attenuation_db"}, source, "confounders.");
    read(c, "rate", sim.confounders.rate, source);
    read(c, "attenuation_db", sim.confounders.attenuation_db, source);
  }
  if (doc.contains("obstruction")) {
    const auto& o = doc.at("obstruction");
    reject_unknown(o, {"radius", "gamma_max_db", "shape", "per_link_gamma_max_db"}, source,
                   "obstruction.");
    read(o, "radius", setup.obstruction.radius, source);
    read(o, "gamma_max_db", setup.obstruction.gamma_max_db, source);
    read(o, "per_link_gamma_max_db", setup.obstruction.per_link_gamma_max_db, source);
    if (o.contains("shape")) {
      std::string shape;
      read(o, "shape", shape, source);
      try {
        setup.obstruction.shape = parse_attenuation_shape(shape);
      } catch (const Error& e) {
        throw ConfigError(source, 0, e.what());
      }
    }
  }
  try {
    sim.validate();
    setup.obstruction.validate();
  } catch (const Error& e) {
    throw ConfigError(source, 0, e.what());
  }
  return setup;
}

nlohmann::json to_json(const SimulationSetup& setup) {
  const auto& sim = setup.sim;
  json obstruction = {{"radius", setup.obstruction.radius},
                      {"gamma_max_db", setup.obstruction.gamma_max_db},
                      {"shape", std::string(to_string(setup.obstruction.shape))}};
  if (!setup.obstruction.per_link_gamma_max_db.empty()) {
    obstruction["per_link_gamma_max_db"] = setup.obstruction.per_link_gamma_max_db;
  }
  return {
      {"channel_numbers", setup.plan.channel_numbers},
      {"path_count", sim.path_count},
      {"los_power_dbm", sim.los_power_dbm},
      {"multipath", {{"rayleigh_scale", sim.multipath.rayleigh_scale}}},
      {"noise_sigma_db", sim.noise_sigma_db},
      {"quantization", {{"offset_dbm", sim.quantization.offset_dbm}, {"step_db", sim.quantization.step_db}}},
      {"samples", sim.samples},
      {"narrowband", sim.narrowband},
      {"obstruction", obstruction},
      {"confounders", {{"rate", sim.confounders.rate}, {"attenuation_db", sim.confounders.attenuation_db}}},
  };
}

SimulationSetup load_setup(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open simulation config");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    // byte offset is the best position nlohmann reports; map it to a line.
    std::ifstream again(path);
    std::string text((std::istreambuf_iterator<char>(again)), std::istreambuf_iterator<char>());
    int line = 1;
    for (std::size_t k = 0; k < std::min<std::size_t>(e.byte, text.size()); ++k) {
      if (text[k] == '\n') ++line;
    }
    throw ConfigError(path.string(), line, fmt::format("JSON parse error: {}", e.what()));
  }
  return setup_from_json(doc, path.string());
}

}  // namespace dfl
