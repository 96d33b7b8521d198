// SPDX-License-Identifier: Apache-2.0
#include "cli/manifest.hpp"

#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "dfl/error.hpp"
#include "dfl/version.hpp"

namespace dfl::cli {

using nlohmann::json;

FileRecord describe_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {}", path.string()));
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::uintmax_t n = 0;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it, ++n) {
    h ^= static_cast<unsigned char>(*it);
    h *= 0x100000001b3ULL;
  }
  return {path.generic_string(), n, fmt::format("{:016x}", h)};
}

json RunManifest::to_json() const {
  json in = json::array();
  for (const auto& f : inputs) in.push_back({{"path", f.path}, {"bytes", f.bytes}, {"fnv1a64", f.fnv1a64}});
  return {{"tool", "dfl"},    {"version", std::string(kVersion)}, {"subcommand", subcommand},
          {"argv", argv},     {"seed", seed},                     {"config", config},
          {"inputs", in},     {"outputs", outputs}};
}

RunManifest RunManifest::from_json(const json& doc, const std::string& source) {
  RunManifest m;
  try {
    if (doc.at("tool").get<std::string>() != "dfl") throw ConfigError(source, 0, "not a dfl run manifest");
    m.subcommand = doc.at("subcommand").get<std::string>();
    m.argv = doc.at("argv").get<std::vector<std::string>>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.config = doc.value("config", json::object());
    for (const auto& f : doc.value("inputs", json::array())) {
      m.inputs.push_back({f.at("path").get<std::string>(), f.at("bytes").get<std::uintmax_t>(),
                          f.at("fnv1a64").get<std::string>()});
    }
    m.outputs = doc.value("outputs", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ConfigError(source, 0, fmt::format("malformed manifest: {}", e.what()));
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, fmt::format("cannot write {}", path.string()));
  out << manifest.to_json().dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open manifest");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), 0, fmt::format("JSON parse error: {}", e.what()));
  }
  return RunManifest::from_json(doc, path.string());
}

}  // namespace dfl::cli
