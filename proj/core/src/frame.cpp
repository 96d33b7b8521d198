// SPDX-License-Identifier: Apache-2.0
#include "dfl/frame.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

namespace dfl {

namespace {

void check_sensor_count(std::size_t sensors) {
  if (sensors < 2 || sensors > 255) {
    throw Error(ErrorCode::invalid_argument, fmt::format("sensor count {} outside 2..255", sensors));
  }
}

void check_channel(int cid) {
  if (cid < kMinChannel || cid > kMaxChannel) {
    throw FrameError(FrameErrorKind::invalid_channel, fmt::format("channel {} outside 11..26", cid));
  }
}

}  // namespace

const char* to_string(FrameErrorKind kind) noexcept {
  switch (kind) {
    case FrameErrorKind::wrong_length: return "wrong_length";
    case FrameErrorKind::invalid_flag: return "invalid_flag";
    case FrameErrorKind::invalid_channel: return "invalid_channel";
    case FrameErrorKind::invalid_node: return "invalid_node";
  }
  return "unknown";
}

Frame decode_frame(std::span<const std::uint8_t> bytes, std::size_t sensors) {
  check_sensor_count(sensors);
  if (bytes.size() < kFrameHeaderBytes) {
    throw FrameError(FrameErrorKind::wrong_length,
                     fmt::format("frame of {} bytes is shorter than the 3-byte header", bytes.size()));
  }
  if (bytes[0] > 1) {
    throw FrameError(FrameErrorKind::invalid_flag, fmt::format("invalid FLAG 0x{:02X}", bytes[0]));
  }
  Frame f;
  f.flag = static_cast<FrameFlag>(bytes[0]);
  const std::size_t expected = f.flag == FrameFlag::data ? kFrameHeaderBytes + sensors - 1 : kFrameHeaderBytes;
  if (bytes.size() != expected) {
    throw FrameError(FrameErrorKind::wrong_length,
                     fmt::format("{} frame must be {} bytes, got {}",
                                 f.flag == FrameFlag::data ? "data" : "command", expected, bytes.size()));
  }
  check_channel(bytes[1]);
  if (bytes[2] < 1 || bytes[2] > sensors) {
    throw FrameError(FrameErrorKind::invalid_node, fmt::format("NID {} outside 1..{}", bytes[2], sensors));
  }
  f.cid = bytes[1];
  f.nid = bytes[2];
  f.data.assign(bytes.begin() + kFrameHeaderBytes, bytes.end());
  return f;
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  if (frame.flag != FrameFlag::data && frame.flag != FrameFlag::command) {
    throw FrameError(FrameErrorKind::invalid_flag, "invalid FLAG");
  }
  check_channel(frame.cid);
  if (frame.nid < 1) throw FrameError(FrameErrorKind::invalid_node, "NID must be at least 1");
  if (frame.flag == FrameFlag::command && !frame.data.empty()) {
    throw FrameError(FrameErrorKind::wrong_length, "command frames carry no DATA");
  }
  if (frame.flag == FrameFlag::data) {
    // K - 1 codes, so the sender id can be at most K.
    if (frame.data.empty() || frame.data.size() > 254) {
      throw FrameError(FrameErrorKind::wrong_length, "data frames carry 1..254 RSS codes");
    }
    if (frame.nid > frame.data.size() + 1) {
      throw FrameError(FrameErrorKind::invalid_node,
                       fmt::format("NID {} exceeds the {} sensors implied by DATA", frame.nid,
                                   frame.data.size() + 1));
    }
  }
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderBytes + frame.data.size());
  out.push_back(static_cast<std::uint8_t>(frame.flag));
  out.push_back(frame.cid);
  out.push_back(frame.nid);
  out.insert(out.end(), frame.data.begin(), frame.data.end());
  return out;
}

std::vector<Frame> decode_stream(std::span<const std::uint8_t> bytes, std::size_t sensors) {
  check_sensor_count(sensors);
  std::vector<Frame> frames;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t len = bytes[pos] == 0 ? kFrameHeaderBytes + sensors - 1 : kFrameHeaderBytes;
    if (bytes[pos] > 1) {
      throw FrameError(FrameErrorKind::invalid_flag,
                       fmt::format("invalid FLAG 0x{:02X} at byte {}", bytes[pos], pos));
    }
    if (pos + len > bytes.size()) {
      throw FrameError(FrameErrorKind::wrong_length, fmt::format("truncated frame at byte {}", pos));
    }
    frames.push_back(decode_frame(bytes.subspan(pos, len), sensors));
    pos += len;
  }
  return frames;
}

std::vector<std::uint8_t> encode_stream(std::span<const Frame> frames) {
  std::vector<std::uint8_t> out;
  for (const auto& f : frames) {
    const auto bytes = encode_frame(f);
    out.insert(out.end(), bytes.begin(), bytes.end());
  }
  return out;
}

FrameIngest frames_to_tensor(std::span<const Frame> frames, const Scene& scene, const ChannelPlan& plan,
                             Quantization quantization) {
  const std::size_t k = scene.sensor_count();
  FrameIngest out;
  std::map<int, std::size_t> column;
  for (std::size_t c = 0; c < plan.count(); ++c) column[plan.channel_numbers[c]] = c;

  // reports[c][s] holds every data payload sensor s+1 sent on plan channel c.
  std::vector<std::vector<std::vector<const std::vector<std::uint8_t>*>>> reports(
      plan.count(), std::vector<std::vector<const std::vector<std::uint8_t>*>>(k));
  std::vector<int> last_nid(plan.count(), 0);
  int network_channel = 0;

  for (std::size_t n = 0; n < frames.size(); ++n) {
    const auto& f = frames[n];
    if (f.flag == FrameFlag::command) {
      network_channel = f.cid;
      continue;
    }
    if (f.nid < 1 || f.nid > k) {
      throw FrameError(FrameErrorKind::invalid_node, fmt::format("frame {}: NID {} outside 1..{}", n, f.nid, k));
    }
    if (f.data.size() != k - 1) {
      throw FrameError(FrameErrorKind::wrong_length,
                       fmt::format("frame {}: {} RSS codes, expected {}", n, f.data.size(), k - 1));
    }
    const auto it = column.find(f.cid);
    if (it == column.end()) {
      throw Error(ErrorCode::frame, fmt::format("frame {}: channel {} is not in the channel plan", n, f.cid));
    }
    if (network_channel != 0 && network_channel != f.cid) {
      out.warnings.push_back(fmt::format("frame {}: data on channel {} after a switch to channel {}", n,
                                         f.cid, network_channel));
    }
    const std::size_t c = it->second;
    const int expected = last_nid[c] % static_cast<int>(k) + 1;
    if (f.nid != expected) {
      out.warnings.push_back(fmt::format("frame {}: protocol order on channel {}: expected sensor {}, got {}",
                                         n, f.cid, expected, f.nid));
    }
    last_nid[c] = f.nid;
    reports[c][f.nid - 1u].push_back(&f.data);
  }

  std::size_t rounds = 0;
  for (const auto& per_channel : reports) {
    for (const auto& per_sensor : per_channel) rounds = std::max(rounds, per_sensor.size());
  }
  if (rounds == 0) {
    throw IncompleteRoundError(plan.channel_numbers.front(), 1, "capture contains no data frames");
  }
  for (std::size_t c = 0; c < plan.count(); ++c) {
    for (std::size_t s = 0; s < k; ++s) {
      if (reports[c][s].size() < rounds) {
        throw IncompleteRoundError(
            plan.channel_numbers[c], static_cast<int>(s + 1),
            fmt::format("incomplete round on channel {}: sensor {} reported {} of {} rounds",
                        plan.channel_numbers[c], s + 1, reports[c][s].size(), rounds));
      }
    }
  }

  RssTensor tensor(scene.link_count(), plan.channel_numbers, 2 * rounds, quantization);
  // Slot of sensor `other` in the payload of `sender` (sender skipped).
  const auto slot = [](int sender, int other) {
    return static_cast<std::size_t>(other < sender ? other - 1 : other - 2);
  };
  for (std::size_t c = 0; c < plan.count(); ++c) {
    for (const auto& link : scene.links()) {
      const auto l = static_cast<std::size_t>(link.id - 1);
      const auto& from_i = reports[c][static_cast<std::size_t>(link.sensor_i - 1)];
      const auto& from_j = reports[c][static_cast<std::size_t>(link.sensor_j - 1)];
      for (std::size_t r = 0; r < rounds; ++r) {
        tensor.set_code(l, c, 2 * r, (*from_i[r])[slot(link.sensor_i, link.sensor_j)]);
        tensor.set_code(l, c, 2 * r + 1, (*from_j[r])[slot(link.sensor_j, link.sensor_i)]);
      }
    }
  }
  out.tensor = std::move(tensor);
  return out;
}

std::vector<Frame> tensor_to_frames(const RssTensor& tensor, const Scene& scene) {
  if (tensor.links() != scene.link_count()) {
    throw Error(ErrorCode::shape_mismatch, "tensor does not match the scene");
  }
  if (tensor.samples() % 2 != 0) {
    throw Error(ErrorCode::invalid_argument, "frame export needs an even sample count (two directions per round)");
  }
  const int k = static_cast<int>(scene.sensor_count());
  const std::size_t rounds = tensor.samples() / 2;
  std::vector<Frame> frames;
  for (std::size_t c = 0; c < tensor.channels(); ++c) {
    const auto cid = static_cast<std::uint8_t>(tensor.channel_numbers()[c]);
    if (c > 0) frames.push_back({FrameFlag::command, cid, 1, {}});
    for (std::size_t r = 0; r < rounds; ++r) {
      for (int s = 1; s <= k; ++s) {
        Frame f{FrameFlag::data, cid, static_cast<std::uint8_t>(s), {}};
        f.data.reserve(static_cast<std::size_t>(k - 1));
        for (int other = 1; other <= k; ++other) {
          if (other == s) continue;
          const auto l = static_cast<std::size_t>(scene.link_id(s, other) - 1);
          f.data.push_back(tensor.code(l, c, s < other ? 2 * r : 2 * r + 1));
        }
        frames.push_back(std::move(f));
      }
    }
  }
  return frames;
}

}  // namespace dfl
