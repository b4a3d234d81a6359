// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gssfront {

inline constexpr std::size_t kMelBands = 24;

// mel(f) = 2595 log10(1 + f/700)
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters equally spaced on the mel scale between low_hz and
// high_hz, sampled on the half-spectrum grid of a K-point FFT at `rate`.
// Filter i rises from edge i to edge i+1 and falls to edge i+2 (triangles are
// linear in mel).
class MelFilterbank {
 public:
  MelFilterbank(std::size_t fft_size = 400, int rate = 16000,
                std::size_t num_filters = kMelBands, double low_hz = 0.0,
                double high_hz = 8000.0);

  std::size_t num_filters() const noexcept { return first_.size(); }
  std::size_t num_bins() const noexcept { return fft_size_ / 2 + 1; }
  std::size_t fft_size() const noexcept { return fft_size_; }
  int rate() const noexcept { return rate_; }
  double center_hz(std::size_t filter) const { return centers_.at(filter); }

  // Dense weights over all bins of the grid.
  std::vector<double> weights(std::size_t filter) const;
  std::size_t first_bin(std::size_t filter) const { return first_.at(filter); }
  std::span<const double> band_weights(std::size_t filter) const {
    return weights_.at(filter);
  }

  // e_i = sum_k w_i(k) P(k); throws invalid-config when P is on another grid.
  std::vector<double> apply(std::span<const double> power) const;

 private:
  std::size_t fft_size_;
  int rate_;
  std::vector<double> centers_;
  std::vector<std::size_t> first_;
  std::vector<std::vector<double>> weights_;  // nonzero span starting at first_
};

std::vector<double> mel_energies(std::span<const double> power,
                                 const MelFilterbank& bank);

}  // namespace gssfront
