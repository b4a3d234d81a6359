// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/resample.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gssfront/error.hpp"

namespace gssfront {

namespace {

constexpr int kFactor = 3;
constexpr std::size_t kTaps = 289;
constexpr double kCutoffHz = 7500.0;
constexpr double kKaiserBeta = 7.857;  // 0.1102 * (80 - 8.7)

}  // namespace

Decimator48kTo16k::Decimator48kTo16k() : taps_(kTaps) {
  const double center = (kTaps - 1) / 2.0;
  const double fc = kCutoffHz / kSeparationRate;  // cycles/sample
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);
  double sum = 0.0;
  for (std::size_t n = 0; n < kTaps; ++n) {
    const double t = static_cast<double>(n) - center;
    const double sinc = t == 0.0 ? 2.0 * fc
                                 : std::sin(2.0 * std::numbers::pi * fc * t) /
                                       (std::numbers::pi * t);
    const double r = t / center;
    const double kaiser =
        std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
    taps_[n] = sinc * kaiser;
    sum += taps_[n];
  }
  for (double& h : taps_) h /= sum;  // unity DC gain
}

std::vector<double> Decimator48kTo16k::process(std::span<const double> input) const {
  const std::size_t out_len = (input.size() + kFactor - 1) / kFactor;
  const auto len = static_cast<std::ptrdiff_t>(input.size());
  const auto half = static_cast<std::ptrdiff_t>(kTaps / 2);
  std::vector<double> out(out_len, 0.0);
  for (std::size_t m = 0; m < out_len; ++m) {
    const auto center = static_cast<std::ptrdiff_t>(m) * kFactor;
    double acc = 0.0;
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(kTaps); ++j) {
      const std::ptrdiff_t idx = center + half - j;
      if (idx >= 0 && idx < len) acc += taps_[j] * input[idx];
    }
    out[m] = acc;
  }
  return out;
}

AudioBuffer resample_48k_to_16k(const AudioBuffer& audio) {
  if (audio.rate() != kSeparationRate) {
    fail(ErrorKind::kInvalidConfig, "resampler expects 48 kHz input, got " +
                                        std::to_string(audio.rate()));
  }
  static const Decimator48kTo16k decimator;
  std::vector<std::vector<double>> channels;
  channels.reserve(audio.channels());
  for (std::size_t c = 0; c < audio.channels(); ++c) {
    channels.push_back(decimator.process(audio.channel(c)));
  }
  return AudioBuffer(kFeatureRate, std::move(channels));
}

}  // namespace gssfront
