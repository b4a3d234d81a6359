// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gssfront {

struct McraOptions {
  double noise_smoothing = 0.95;     // recursive averaging of the noise power
  double power_smoothing = 0.8;      // temporal smoothing of the tracked power
  std::size_t window_frames = 150;   // minimum-tracking window
  double presence_smoothing = 0.95;  // smoothing of the speech-presence indicator
  double onset_ratio = 5.0;          // power / minimum above this => speech

  void validate() const;
  friend bool operator==(const McraOptions&, const McraOptions&) = default;
};

// Minima-controlled recursive averaging noise tracker for one channel.
//
// The power spectrum is smoothed over three bins and over time; its running
// minimum over a window of `window_frames` .. 2*`window_frames` frames is
// the reference floor. A bin is declared speech-active when the smoothed
// power exceeds `onset_ratio` times that floor. Active bins freeze the noise
// estimate for the frame; inactive bins average the raw power in with a
// factor that grows with the smoothed presence probability.
class McraEstimator {
 public:
  explicit McraEstimator(std::size_t num_bins, McraOptions options = {});

  void update(std::span<const double> power);

  std::size_t num_bins() const noexcept { return noise_.size(); }
  std::span<const double> noise() const noexcept { return noise_; }
  std::span<const double> presence() const noexcept { return presence_; }
  std::size_t frames_seen() const noexcept { return frames_; }
  const McraOptions& options() const noexcept { return options_; }

 private:
  McraOptions options_;
  std::vector<double> smoothed_;
  std::vector<double> minimum_;
  std::vector<double> running_minimum_;
  std::vector<double> presence_;
  std::vector<double> noise_;
  std::vector<double> freq_smoothed_;
  std::size_t frames_ = 0;
};

}  // namespace gssfront
