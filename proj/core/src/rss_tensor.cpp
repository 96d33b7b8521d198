// SPDX-License-Identifier: Apache-2.0
#include "dfl/rss_tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dfl/error.hpp"

namespace dfl {

double dbm_to_mw(double dbm) noexcept { return std::pow(10.0, dbm / 10.0); }

double mw_to_dbm(double mw) noexcept { return 10.0 * std::log10(mw); }

std::uint8_t Quantization::quantize(double dbm) const noexcept {
  if (std::isnan(dbm)) return 0;
  const double level = std::round((dbm - offset_dbm) / step_db);
  return static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0));
}

std::uint8_t Quantization::quantize_mw(double mw) const noexcept {
  if (!(mw > 0.0)) return 0;
  return quantize(mw_to_dbm(mw));
}

PowerMatrix PowerMatrix::first_channels(std::size_t count) const {
  if (count == 0 || count > channels_) {
    throw Error(ErrorCode::invalid_argument, "channel subset larger than the available channels");
  }
  PowerMatrix out(links_, count);
  for (std::size_t l = 0; l < links_; ++l) {
    for (std::size_t c = 0; c < count; ++c) out.at(l, c) = at(l, c);
  }
  return out;
}

PowerMatrix PowerMatrix::select_channels(std::span<const std::size_t> columns) const {
  PowerMatrix out(links_, columns.size());
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] >= channels_) {
      throw Error(ErrorCode::invalid_argument, "channel subset index out of range");
    }
  }
  for (std::size_t l = 0; l < links_; ++l) {
    for (std::size_t k = 0; k < columns.size(); ++k) out.at(l, k) = at(l, columns[k]);
  }
  return out;
}

PowerMatrix PowerMatrix::scaled(double factor) const {
  PowerMatrix out = *this;
  for (auto& v : out.values_) v *= factor;
  return out;
}

RssTensor::RssTensor(std::size_t links, std::vector<int> channel_numbers, std::size_t samples,
                     Quantization quantization)
    : links_(links),
      channel_numbers_(std::move(channel_numbers)),
      samples_(samples),
      quantization_(quantization),
      codes_(links * channel_numbers_.size() * samples, 0) {
  if (links == 0 || channel_numbers_.empty() || samples == 0) {
    throw Error(ErrorCode::invalid_argument, "RSS tensor dimensions must be nonzero");
  }
}

PowerMatrix RssTensor::channel_means_mw() const {
  std::array<double, 256> lut{};
  for (int code = 0; code < 256; ++code) {
    lut[static_cast<std::size_t>(code)] = quantization_.to_mw(static_cast<std::uint8_t>(code));
  }
  PowerMatrix out(links_, channels());
  for (std::size_t l = 0; l < links_; ++l) {
    for (std::size_t c = 0; c < channels(); ++c) {
      double sum = 0.0;
      for (auto code : cell(l, c)) sum += lut[code];
      out.at(l, c) = sum / static_cast<double>(samples_);
    }
  }
  return out;
}

bool RssTensor::same_shape(const RssTensor& other) const noexcept {
  return links_ == other.links_ && channel_numbers_ == other.channel_numbers_;
}

}  // namespace dfl
