// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/mcra.hpp"

#include <algorithm>

#include "gssfront/error.hpp"

namespace gssfront {

void McraOptions::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v < 1.0; };
  if (!unit(noise_smoothing) || !unit(power_smoothing) || !unit(presence_smoothing)) {
    fail(ErrorKind::kInvalidConfig, "MCRA smoothing constants must lie in [0, 1)");
  }
  if (window_frames == 0) fail(ErrorKind::kInvalidConfig, "MCRA window must be > 0");
  if (!(onset_ratio > 1.0)) fail(ErrorKind::kInvalidConfig, "MCRA onset ratio must be > 1");
}

McraEstimator::McraEstimator(std::size_t num_bins, McraOptions options)
    : options_(options),
      smoothed_(num_bins, 0.0),
      minimum_(num_bins, 0.0),
      running_minimum_(num_bins, 0.0),
      presence_(num_bins, 0.0),
      noise_(num_bins, 0.0),
      freq_smoothed_(num_bins, 0.0) {
  options_.validate();
}

void McraEstimator::update(std::span<const double> power) {
  const std::size_t n = noise_.size();
  if (power.size() != n) fail(ErrorKind::kStream, "MCRA power spectrum size mismatch");
  if (n == 0) return;

  // 0.25/0.5/0.25 across frequency, renormalized at the edges.
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.5 * power[k];
    double weight = 0.5;
    if (k > 0) {
      acc += 0.25 * power[k - 1];
      weight += 0.25;
    }
    if (k + 1 < n) {
      acc += 0.25 * power[k + 1];
      weight += 0.25;
    }
    freq_smoothed_[k] = acc / weight;
  }

  if (frames_ == 0) {
    std::copy(freq_smoothed_.begin(), freq_smoothed_.end(), smoothed_.begin());
    std::copy(freq_smoothed_.begin(), freq_smoothed_.end(), minimum_.begin());
    std::copy(freq_smoothed_.begin(), freq_smoothed_.end(), running_minimum_.begin());
    std::copy(power.begin(), power.end(), noise_.begin());
    ++frames_;
    return;
  }

  const double as = options_.power_smoothing;
  for (std::size_t k = 0; k < n; ++k) {
    smoothed_[k] = as * smoothed_[k] + (1.0 - as) * freq_smoothed_[k];
    minimum_[k] = std::min(minimum_[k], smoothed_[k]);
    running_minimum_[k] = std::min(running_minimum_[k], smoothed_[k]);
  }
  ++frames_;
  if (frames_ % options_.window_frames == 0) {
    for (std::size_t k = 0; k < n; ++k) {
      minimum_[k] = std::min(running_minimum_[k], smoothed_[k]);
      running_minimum_[k] = smoothed_[k];
    }
  }

  const double ap = options_.presence_smoothing;
  const double ad = options_.noise_smoothing;
  for (std::size_t k = 0; k < n; ++k) {
    const bool active = smoothed_[k] > options_.onset_ratio * minimum_[k];
    presence_[k] = ap * presence_[k] + (1.0 - ap) * (active ? 1.0 : 0.0);
    if (active) continue;
    const double a = ad + (1.0 - ad) * presence_[k];
    noise_[k] = a * noise_[k] + (1.0 - a) * power[k];
  }
}

}  // namespace gssfront
