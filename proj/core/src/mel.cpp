// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/mel.hpp"

#include <cmath>
#include <string>

#include "gssfront/error.hpp"

namespace gssfront {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(std::size_t fft_size, int rate,
                             std::size_t num_filters, double low_hz,
                             double high_hz)
    : fft_size_(fft_size), rate_(rate) {
  if (fft_size < 2 || fft_size % 2 != 0 || rate <= 0) {
    fail(ErrorKind::kInvalidConfig, "mel filterbank needs an even FFT size and a rate");
  }
  if (num_filters == 0 || !(low_hz >= 0.0) || !(high_hz > low_hz) ||
      high_hz > rate / 2.0) {
    fail(ErrorKind::kInvalidConfig, "mel filterbank band edges are invalid");
  }
  const double mel_lo = hz_to_mel(low_hz);
  const double mel_hi = hz_to_mel(high_hz);
  const double step = (mel_hi - mel_lo) / static_cast<double>(num_filters + 1);
  const double bin_hz = static_cast<double>(rate) / static_cast<double>(fft_size);
  const std::size_t bins = fft_size / 2 + 1;

  centers_.resize(num_filters);
  first_.resize(num_filters);
  weights_.resize(num_filters);
  for (std::size_t i = 0; i < num_filters; ++i) {
    const double left = mel_lo + step * static_cast<double>(i);
    const double center = left + step;
    const double right = center + step;
    centers_[i] = mel_to_hz(center);
    std::vector<double> dense(bins, 0.0);
    std::size_t first = bins, last = 0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double mel = hz_to_mel(bin_hz * static_cast<double>(k));
      double w = 0.0;
      if (mel > left && mel <= center) {
        w = (mel - left) / step;
      } else if (mel > center && mel < right) {
        w = (right - mel) / step;
      }
      if (w > 0.0) {
        dense[k] = w;
        if (first == bins) first = k;
        last = k;
      }
    }
    if (first == bins) {
      fail(ErrorKind::kInvalidConfig,
           "mel filter " + std::to_string(i) + " covers no FFT bin; grid too coarse");
    }
    first_[i] = first;
    weights_[i].assign(dense.begin() + static_cast<std::ptrdiff_t>(first),
                       dense.begin() + static_cast<std::ptrdiff_t>(last + 1));
  }
}

std::vector<double> MelFilterbank::weights(std::size_t filter) const {
  std::vector<double> dense(num_bins(), 0.0);
  const auto& w = weights_.at(filter);
  for (std::size_t j = 0; j < w.size(); ++j) dense[first_[filter] + j] = w[j];
  return dense;
}

std::vector<double> MelFilterbank::apply(std::span<const double> power) const {
  if (power.size() != num_bins()) {
    fail(ErrorKind::kInvalidConfig,
         "spectrum has " + std::to_string(power.size()) + " bins, filterbank grid has " +
             std::to_string(num_bins()));
  }
  std::vector<double> e(num_filters(), 0.0);
  for (std::size_t i = 0; i < num_filters(); ++i) {
    const auto& w = weights_[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * power[first_[i] + j];
    e[i] = acc;
  }
  return e;
}

std::vector<double> mel_energies(std::span<const double> power,
                                 const MelFilterbank& bank) {
  return bank.apply(power);
}

}  // namespace gssfront
