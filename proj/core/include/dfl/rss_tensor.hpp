// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dfl {

double dbm_to_mw(double dbm) noexcept;
double mw_to_dbm(double mw) noexcept;

/// Affine map between an 8-bit RSS code and dBm: dBm = offset + step * code.
struct Quantization {
  double offset_dbm = -115.0;
  double step_db = 0.5;

  std::uint8_t quantize(double dbm) const noexcept;
  std::uint8_t quantize_mw(double mw) const noexcept;
  double to_dbm(std::uint8_t code) const noexcept { return offset_dbm + step_db * code; }
  double to_mw(std::uint8_t code) const noexcept { return dbm_to_mw(to_dbm(code)); }

  friend bool operator==(const Quantization&, const Quantization&) = default;
};

/// Per-link, per-channel linear power (mW). Row-major: one row per link.
class PowerMatrix {
 public:
  PowerMatrix() = default;
  PowerMatrix(std::size_t links, std::size_t channels, double fill = 0.0)
      : links_(links), channels_(channels), values_(links * channels, fill) {}

  std::size_t links() const noexcept { return links_; }
  std::size_t channels() const noexcept { return channels_; }

  double& at(std::size_t link, std::size_t channel) { return values_[link * channels_ + channel]; }
  double at(std::size_t link, std::size_t channel) const { return values_[link * channels_ + channel]; }

  std::span<const double> row(std::size_t link) const {
    return {values_.data() + link * channels_, channels_};
  }

  /// The first `count` channels of every link.
  PowerMatrix first_channels(std::size_t count) const;
  /// Arbitrary channel subset, by column index.
  PowerMatrix select_channels(std::span<const std::size_t> columns) const;
  PowerMatrix scaled(double factor) const;

 private:
  std::size_t links_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> values_;
};

/// Quantized RSS samples indexed (link, channel, sample). Link and channel
/// are 0-based positions; `channel_numbers` carries the radio channel ids.
class RssTensor {
 public:
  RssTensor() = default;
  RssTensor(std::size_t links, std::vector<int> channel_numbers, std::size_t samples,
            Quantization quantization = {});

  std::size_t links() const noexcept { return links_; }
  std::size_t channels() const noexcept { return channel_numbers_.size(); }
  std::size_t samples() const noexcept { return samples_; }
  const std::vector<int>& channel_numbers() const noexcept { return channel_numbers_; }
  const Quantization& quantization() const noexcept { return quantization_; }

  std::uint8_t code(std::size_t link, std::size_t channel, std::size_t sample) const {
    return codes_[index(link, channel, sample)];
  }
  void set_code(std::size_t link, std::size_t channel, std::size_t sample, std::uint8_t value) {
    codes_[index(link, channel, sample)] = value;
  }
  std::span<const std::uint8_t> cell(std::size_t link, std::size_t channel) const {
    return {codes_.data() + index(link, channel, 0), samples_};
  }
  std::span<std::uint8_t> cell(std::size_t link, std::size_t channel) {
    return {codes_.data() + index(link, channel, 0), samples_};
  }
  std::span<const std::uint8_t> codes() const noexcept { return codes_; }

  /// Sample-averaged linear power per (link, channel), averaged after
  /// dequantization.
  PowerMatrix channel_means_mw() const;

  /// True when both tensors cover the same links and channels.
  bool same_shape(const RssTensor& other) const noexcept;

  friend bool operator==(const RssTensor&, const RssTensor&) = default;

 private:
  std::size_t index(std::size_t link, std::size_t channel, std::size_t sample) const {
    return (link * channel_numbers_.size() + channel) * samples_ + sample;
  }

  std::size_t links_ = 0;
  std::vector<int> channel_numbers_;
  std::size_t samples_ = 0;
  Quantization quantization_;
  std::vector<std::uint8_t> codes_;
};

}  // namespace dfl
