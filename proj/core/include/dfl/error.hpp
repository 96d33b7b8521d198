// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dfl {

enum class ErrorCode {
  invalid_argument,
  duplicate_sensor_id,
  coincident_sensors,
  config,
  shape_mismatch,
  no_detection,
  degenerate_geometry,
  frame,
  incomplete_round,
  trace_format,
  version_mismatch,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Coarse buckets used for process exit codes.
enum class ErrorCategory { config, data, geometry };

ErrorCategory category_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by text config readers; carries the offending file and 1-based line.
class ConfigError : public Error {
 public:
  ConfigError(std::string file, int line, const std::string& message);

  const std::string& file() const noexcept { return file_; }
  int line() const noexcept { return line_; }

 private:
  std::string file_;
  int line_;
};

}  // namespace dfl
