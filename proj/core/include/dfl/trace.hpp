// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "dfl/frame.hpp"
#include "dfl/rss_tensor.hpp"
#include "dfl/scene.hpp"

namespace dfl {

inline constexpr std::string_view kTraceMagic = "DFL-TRACE";
inline constexpr int kTraceVersion = 1;

enum class TraceRole { calibration, observation };

std::string_view to_string(TraceRole role) noexcept;

struct TraceHeader {
  TraceRole role = TraceRole::observation;
  int position_id = 0;
  std::optional<Point> target;  // ground truth, when known
  std::string scene_ref;        // free-form; usually a scene file name
  std::size_t sensors = 0;
  double protocol_timeout_ms = kProtocolTimeoutMs;
  std::size_t rounds_averaged = kProtocolRoundsAveraged;

  friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

struct TraceFile {
  TraceHeader header;
  RssTensor tensor;  // carries channel numbers, quantization and sample count

  friend bool operator==(const TraceFile&, const TraceFile&) = default;
};

// Text layout:
//   DFL-TRACE 1
//   role calibration|observation
//   position <id>
//   target <x> <y> | target none
//   scene <ref>
//   sensors <K>
//   links <L>
//   channels <c1> ... <cC>
//   quantization <offset_dbm> <step_db>
//   samples <S>
//   protocol_timeout_ms <t>
//   rounds_averaged <n>
//   end_header
//   <link> <channel> <code_1> ... <code_S>     (one line per cell)
void write_trace(std::ostream& out, const TraceFile& trace);
void write_trace(const std::filesystem::path& path, const TraceFile& trace);
TraceFile read_trace(std::istream& in, const std::string& source_name = "<trace>");
TraceFile read_trace(const std::filesystem::path& path);

/// Header for a tensor produced on `scene`.
TraceHeader make_header(const Scene& scene, TraceRole role, int position_id,
                        std::optional<Point> target, std::string scene_ref);

/// Throws shape_mismatch if the trace does not fit the scene.
void check_trace_matches(const TraceFile& trace, const Scene& scene);

}  // namespace dfl
