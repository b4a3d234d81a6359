// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gssfront {

using Complex = std::complex<double>;

inline constexpr int kSeparationRate = 48000;
inline constexpr int kFeatureRate = 16000;

bool is_supported_rate(int rate);

// Multichannel time-domain signal. Every channel has the same length and the
// rate is one of the two rates the front-end runs at.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  AudioBuffer(int rate, std::size_t channels, std::size_t frames);
  AudioBuffer(int rate, std::vector<std::vector<double>> channels);

  int rate() const noexcept { return rate_; }
  std::size_t channels() const noexcept { return data_.size(); }
  std::size_t frames() const noexcept {
    return data_.empty() ? 0 : data_.front().size();
  }
  double duration_seconds() const noexcept {
    return rate_ > 0 ? static_cast<double>(frames()) / rate_ : 0.0;
  }

  std::span<const double> channel(std::size_t c) const { return data_.at(c); }
  std::span<double> channel(std::size_t c) { return data_.at(c); }

  const std::vector<std::vector<double>>& data() const noexcept {
    return data_;
  }

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;

 private:
  int rate_ = 0;
  std::vector<std::vector<double>> data_;
};

// Half spectrum (K/2+1 bins) for each channel of one analysis frame.
struct SpectralFrame {
  std::int64_t index = 0;
  std::size_t fft_size = 0;
  int rate = 0;
  std::vector<std::vector<Complex>> bins;  // [channel][bin]

  SpectralFrame() = default;
  SpectralFrame(std::int64_t frame_index, std::size_t k, int sample_rate,
                std::size_t channels)
      : index(frame_index),
        fft_size(k),
        rate(sample_rate),
        bins(channels, std::vector<Complex>(k / 2 + 1)) {}

  std::size_t channels() const noexcept { return bins.size(); }
  std::size_t num_bins() const noexcept { return fft_size / 2 + 1; }
};

}  // namespace gssfront
