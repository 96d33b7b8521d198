// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dfl::cli {

struct FileRecord {
  std::string path;
  std::uintmax_t bytes = 0;
  std::string fnv1a64;  // hex digest of the file contents
};

/// Everything needed to regenerate a run's outputs. No timestamps or host
/// details, so two identical runs produce identical manifests.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<FileRecord> inputs;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& doc, const std::string& source);
};

FileRecord describe_file(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace dfl::cli
