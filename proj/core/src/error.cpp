// SPDX-License-Identifier: Apache-2.0
#include "dfl/error.hpp"

#include <fmt/format.h>

namespace dfl {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::duplicate_sensor_id: return "duplicate_sensor_id";
    case ErrorCode::coincident_sensors: return "coincident_sensors";
    case ErrorCode::config: return "config";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::no_detection: return "no_detection";
    case ErrorCode::degenerate_geometry: return "degenerate_geometry";
    case ErrorCode::frame: return "frame";
    case ErrorCode::incomplete_round: return "incomplete_round";
    case ErrorCode::trace_format: return "trace_format";
    case ErrorCode::version_mismatch: return "version_mismatch";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::duplicate_sensor_id:
    case ErrorCode::coincident_sensors:
    case ErrorCode::config:
      return ErrorCategory::config;
    case ErrorCode::no_detection:
    case ErrorCode::degenerate_geometry:
      return ErrorCategory::geometry;
    default:
      return ErrorCategory::data;
  }
}

ConfigError::ConfigError(std::string file, int line, const std::string& message)
    : Error(ErrorCode::config,
            line > 0 ? fmt::format("{}:{}: {}", file, line, message)
                     : fmt::format("{}: {}", file, message)),
      file_(std::move(file)),
      line_(line) {}

}  // namespace dfl
