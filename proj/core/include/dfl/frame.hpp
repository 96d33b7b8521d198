// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dfl/channel_sim.hpp"
#include "dfl/error.hpp"
#include "dfl/rss_tensor.hpp"
#include "dfl/scene.hpp"

namespace dfl {

// Measurement-protocol frame: FLAG, CID, NID (one byte each), then DATA.
// A data frame carries K-1 RSS codes, one per other sensor in ascending id
// order (the sender is skipped). A command frame has no DATA and tells every
// node to switch to channel CID.

inline constexpr int kMinChannel = 11;
inline constexpr int kMaxChannel = 26;
inline constexpr std::size_t kFrameHeaderBytes = 3;
inline constexpr double kProtocolTimeoutMs = 10.0;      // sensor 1 restart timer
inline constexpr std::size_t kProtocolRoundsAveraged = 100;

enum class FrameFlag : std::uint8_t { data = 0, command = 1 };

struct Frame {
  FrameFlag flag = FrameFlag::data;
  std::uint8_t cid = kMinChannel;
  std::uint8_t nid = 1;
  std::vector<std::uint8_t> data;

  friend bool operator==(const Frame&, const Frame&) = default;
};

enum class FrameErrorKind { wrong_length, invalid_flag, invalid_channel, invalid_node };

const char* to_string(FrameErrorKind kind) noexcept;

class FrameError : public Error {
 public:
  FrameError(FrameErrorKind kind, const std::string& message)
      : Error(ErrorCode::frame, message), kind_(kind) {}
  FrameErrorKind kind() const noexcept { return kind_; }

 private:
  FrameErrorKind kind_;
};

/// Strict decode for a network of `sensors` nodes. Total over all inputs:
/// returns a Frame or throws FrameError.
Frame decode_frame(std::span<const std::uint8_t> bytes, std::size_t sensors);

/// Inverse of decode_frame; throws FrameError on an invalid frame.
std::vector<std::uint8_t> encode_frame(const Frame& frame);

/// Split a concatenated byte stream into frames (lengths follow from FLAG).
std::vector<Frame> decode_stream(std::span<const std::uint8_t> bytes, std::size_t sensors);
std::vector<std::uint8_t> encode_stream(std::span<const Frame> frames);

class IncompleteRoundError : public Error {
 public:
  IncompleteRoundError(int channel, int sensor, const std::string& message)
      : Error(ErrorCode::incomplete_round, message), channel_(channel), sensor_(sensor) {}
  int channel() const noexcept { return channel_; }
  int sensor() const noexcept { return sensor_; }

 private:
  int channel_;
  int sensor_;
};

struct FrameIngest {
  RssTensor tensor;
  std::vector<std::string> warnings;  // protocol-order and channel mismatches
};

/// Assemble a round-robin capture into a tensor. Round r of link (i, j),
/// i < j, yields sample 2r from sensor i's report and 2r+1 from sensor j's,
/// so the cell mean is the average of both directions after dequantization.
FrameIngest frames_to_tensor(std::span<const Frame> frames, const Scene& scene,
                             const ChannelPlan& plan, Quantization quantization = {});

/// Protocol frame sequence reproducing `tensor` (sample count must be even):
/// per channel, a command frame switching to it (except the first), then
/// each round's data frames from sensors 1..K.
std::vector<Frame> tensor_to_frames(const RssTensor& tensor, const Scene& scene);

}  // namespace dfl
