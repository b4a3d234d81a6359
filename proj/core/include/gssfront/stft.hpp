// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "gssfront/audio.hpp"

namespace gssfront {

enum class Window { kSqrtHann, kHann, kHamming, kRectangular };

// Periodic window of length n (the DFT-even variant).
std::vector<double> make_window(Window window, std::size_t n);

struct StftConfig {
  std::size_t fft_size = 1024;
  std::size_t shift = 512;
  Window window = Window::kSqrtHann;

  void validate() const;
  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

// Real-input FFT of a fixed size. Forward is unnormalized, inverse applies
// 1/n. Execution is thread-safe; only construction touches the planner.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<const double> in, std::span<Complex> out) const;
  void inverse(std::span<const Complex> in, std::span<double> out) const;

 private:
  struct Plans;
  std::size_t n_ = 0;
  std::unique_ptr<Plans> plans_;
};

// Frame t covers samples [t*shift, t*shift + fft_size).
class StftAnalyzer {
 public:
  StftAnalyzer(StftConfig config, int rate);

  const StftConfig& config() const noexcept { return config_; }
  int rate() const noexcept { return rate_; }
  std::span<const double> window() const noexcept { return window_; }

  // floor((length - K) / shift) + 1, or 0 if length < K.
  std::size_t frame_count(std::size_t length) const noexcept;

  // Windowed transform of exactly fft_size samples into K/2+1 bins.
  void transform(std::span<const double> samples, std::span<Complex> out) const;

  SpectralFrame analyze_frame(const AudioBuffer& audio,
                              std::size_t frame_index) const;
  std::vector<SpectralFrame> analyze(const AudioBuffer& audio) const;

 private:
  StftConfig config_;
  int rate_;
  std::vector<double> window_;
  RealFft fft_;
};

// Weighted overlap-add. Each inverse frame is multiplied by the synthesis
// window and the sum is divided by the periodic analysis*synthesis window
// overlap, so any shift whose overlap never vanishes reconstructs exactly on
// fully covered samples.
class OverlapAddSynthesizer {
 public:
  OverlapAddSynthesizer(StftConfig config, int rate, std::size_t channels);

  void push(const SpectralFrame& frame);
  std::size_t frames_pushed() const noexcept { return frames_pushed_; }

  // Output length is (frames-1)*shift + fft_size (zero when nothing pushed).
  AudioBuffer finish() const;

 private:
  StftConfig config_;
  int rate_;
  std::vector<double> window_;
  std::vector<double> overlap_norm_;  // indexed by sample mod shift
  RealFft fft_;
  std::vector<std::vector<double>> out_;
  std::vector<double> scratch_;
  std::size_t frames_pushed_ = 0;
};

std::vector<SpectralFrame> stft_analyze(const AudioBuffer& audio,
                                        const StftConfig& config);
AudioBuffer stft_synthesize(std::span<const SpectralFrame> frames,
                            const StftConfig& config);

}  // namespace gssfront
