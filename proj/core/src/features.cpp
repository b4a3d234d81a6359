// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/features.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gssfront/error.hpp"

namespace gssfront {

void FeatureOptions::validate() const {
  stft.validate();
  if (num_bands < 2) fail(ErrorKind::kInvalidConfig, "need at least 2 mel bands");
  if (lifter && (lifter_keep_first > lifter_keep_last || lifter_keep_last >= num_bands)) {
    fail(ErrorKind::kInvalidConfig, "lifter range outside cepstrum");
  }
  if (!(log_floor > 0.0)) fail(ErrorKind::kInvalidConfig, "log floor must be positive");
  if (delta_half_width == 0) fail(ErrorKind::kInvalidConfig, "delta window must be >= 1");
}

std::vector<double> FeatureVector::concatenated() const {
  std::vector<double> v(statics);
  v.insert(v.end(), deltas.begin(), deltas.end());
  return v;
}

Dct::Dct(std::size_t n) : n_(n), basis_(n * n) {
  const double scale0 = std::sqrt(1.0 / static_cast<double>(n));
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = std::numbers::pi * static_cast<double>(k) *
                         (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      basis_[k * n + i] = (k == 0 ? scale0 : scale) * std::cos(arg);
    }
  }
}

std::vector<double> Dct::forward(std::span<const double> x) const {
  if (x.size() != n_) fail(ErrorKind::kStream, "DCT input size mismatch");
  std::vector<double> c(n_, 0.0);
  for (std::size_t k = 0; k < n_; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) acc += basis_[k * n_ + i] * x[i];
    c[k] = acc;
  }
  return c;
}

std::vector<double> Dct::inverse(std::span<const double> c) const {
  if (c.size() != n_) fail(ErrorKind::kStream, "IDCT input size mismatch");
  std::vector<double> x(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n_; ++k) acc += basis_[k * n_ + i] * c[k];
    x[i] = acc;
  }
  return x;
}

void apply_lifter(std::span<double> cepstrum, std::size_t keep_first,
                  std::size_t keep_last) {
  for (std::size_t q = 0; q < cepstrum.size(); ++q) {
    if (q < keep_first || q > keep_last) cepstrum[q] = 0.0;
  }
}

void cepstral_mean_subtraction(std::vector<std::vector<double>>& cepstra) {
  if (cepstra.empty()) return;
  const std::size_t dim = cepstra.front().size();
  std::vector<double> mean(dim, 0.0);
  for (const auto& c : cepstra) {
    for (std::size_t d = 0; d < dim; ++d) mean[d] += c[d];
  }
  for (double& m : mean) m /= static_cast<double>(cepstra.size());
  for (auto& c : cepstra) {
    for (std::size_t d = 0; d < dim; ++d) c[d] -= mean[d];
  }
}

std::vector<std::vector<double>> compute_deltas(
    const std::vector<std::vector<double>>& statics, std::size_t half_width,
    std::vector<bool>* valid) {
  const std::size_t t_count = statics.size();
  const std::size_t dim = t_count ? statics.front().size() : 0;
  std::vector<std::vector<double>> deltas(t_count, std::vector<double>(dim, 0.0));
  if (valid) valid->assign(t_count, false);
  double denom = 0.0;
  for (std::size_t n = 1; n <= half_width; ++n) denom += static_cast<double>(n * n);
  denom *= 2.0;
  for (std::size_t t = half_width; t + half_width < t_count; ++t) {
    for (std::size_t d = 0; d < dim; ++d) {
      double acc = 0.0;
      for (std::size_t n = 1; n <= half_width; ++n) {
        acc += static_cast<double>(n) * (statics[t + n][d] - statics[t - n][d]);
      }
      deltas[t][d] = acc / denom;
    }
    if (valid) (*valid)[t] = true;
  }
  return deltas;
}

FeatureExtractor::FeatureExtractor(FeatureOptions options)
    : options_((options.validate(), options)),
      analyzer_(options.stft, kFeatureRate),
      bank_(options.stft.fft_size, kFeatureRate, options.num_bands, options.low_hz,
            options.high_hz),
      dct_(options.num_bands) {}

std::vector<std::vector<double>> FeatureExtractor::log_mel(
    const AudioBuffer& audio16k) const {
  if (audio16k.rate() != kFeatureRate) {
    fail(ErrorKind::kInvalidConfig, "feature extraction expects 16 kHz audio");
  }
  if (audio16k.channels() != 1) {
    fail(ErrorKind::kInvalidInput, "feature extraction expects mono audio");
  }
  const std::size_t count = analyzer_.frame_count(audio16k.frames());
  std::vector<std::vector<double>> out;
  out.reserve(count);
  std::vector<Complex> spectrum(options_.stft.fft_size / 2 + 1);
  std::vector<double> power(spectrum.size());
  const auto samples = audio16k.channel(0);
  for (std::size_t t = 0; t < count; ++t) {
    analyzer_.transform(samples.subspan(t * options_.stft.shift, options_.stft.fft_size),
                        spectrum);
    for (std::size_t k = 0; k < spectrum.size(); ++k) power[k] = std::norm(spectrum[k]);
    auto bands = bank_.apply(power);
    for (double& e : bands) e = std::log(std::max(e, options_.log_floor));
    out.push_back(std::move(bands));
  }
  return out;
}

std::vector<std::vector<double>> FeatureExtractor::smooth_and_normalize(
    std::vector<std::vector<double>> log_mel) const {
  std::vector<std::vector<double>> cepstra;
  cepstra.reserve(log_mel.size());
  for (const auto& frame : log_mel) {
    auto c = dct_.forward(frame);
    if (options_.lifter) {
      apply_lifter(c, options_.lifter_keep_first, options_.lifter_keep_last);
    }
    cepstra.push_back(std::move(c));
  }
  if (options_.cms) cepstral_mean_subtraction(cepstra);
  for (std::size_t t = 0; t < cepstra.size(); ++t) log_mel[t] = dct_.inverse(cepstra[t]);
  return log_mel;
}

FeatureStream FeatureExtractor::extract(const AudioBuffer& audio16k) const {
  auto statics = smooth_and_normalize(log_mel(audio16k));
  std::vector<bool> valid;
  auto deltas = compute_deltas(statics, options_.delta_half_width, &valid);

  FeatureStream stream;
  stream.deltas_available = statics.size() >= 2 * options_.delta_half_width + 1;
  if (!stream.deltas_available) {
    spdlog::warn("utterance has {} frames; too short for delta features", statics.size());
  }
  stream.frames.resize(statics.size());
  for (std::size_t t = 0; t < statics.size(); ++t) {
    auto& f = stream.frames[t];
    f.index = static_cast<std::int64_t>(t);
    f.statics = std::move(statics[t]);
    f.deltas = std::move(deltas[t]);
    f.delta_valid = valid[t];
  }
  return stream;
}

FeatureStream extract_features(const AudioBuffer& audio16k,
                               const FeatureOptions& options) {
  return FeatureExtractor(options).extract(audio16k);
}

}  // namespace gssfront
