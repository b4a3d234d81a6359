// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/stft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "gssfront/error.hpp"

namespace gssfront {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

std::vector<double> make_window(Window window, std::size_t n) {
  std::vector<double> w(n, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = two_pi * static_cast<double>(i) / static_cast<double>(n);
    switch (window) {
      case Window::kSqrtHann:
        w[i] = std::sqrt(0.5 - 0.5 * std::cos(phase));
        break;
      case Window::kHann:
        w[i] = 0.5 - 0.5 * std::cos(phase);
        break;
      case Window::kHamming:
        w[i] = 0.54 - 0.46 * std::cos(phase);
        break;
      case Window::kRectangular:
        break;
    }
  }
  return w;
}

void StftConfig::validate() const {
  if (fft_size < 2 || fft_size % 2 != 0) {
    fail(ErrorKind::kInvalidConfig,
         "fft_size must be even and >= 2, got " + std::to_string(fft_size));
  }
  if (shift == 0 || shift > fft_size) {
    fail(ErrorKind::kInvalidConfig,
         "shift must be in [1, fft_size], got " + std::to_string(shift));
  }
}

struct RealFft::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

RealFft::RealFft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  std::vector<double> re(n);
  std::vector<Complex> cx(n / 2 + 1);
  auto* cplx = reinterpret_cast<fftw_complex*>(cx.data());
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->forward =
      fftw_plan_dft_r2c_1d(static_cast<int>(n), re.data(), cplx, flags);
  plans_->inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx, re.data(),
                                         flags | FFTW_DESTROY_INPUT);
  if (!plans_->forward || !plans_->inverse) {
    fail(ErrorKind::kInvalidConfig, "could not plan FFT of size " +
                                        std::to_string(n));
  }
}

RealFft::~RealFft() {
  if (!plans_) return;
  std::lock_guard lock(planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->inverse) fftw_destroy_plan(plans_->inverse);
}

RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> in, std::span<Complex> out) const {
  if (in.size() != n_ || out.size() != n_ / 2 + 1) {
    fail(ErrorKind::kStream, "FFT buffer size mismatch");
  }
  // r2c does not modify its input, but the API takes a non-const pointer.
  fftw_execute_dft_r2c(plans_->forward, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const Complex> in, std::span<double> out) const {
  if (in.size() != n_ / 2 + 1 || out.size() != n_) {
    fail(ErrorKind::kStream, "IFFT buffer size mismatch");
  }
  std::vector<Complex> work(in.begin(), in.end());
  fftw_execute_dft_c2r(plans_->inverse,
                       reinterpret_cast<fftw_complex*>(work.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n_);
  for (double& v : out) v *= scale;
}

StftAnalyzer::StftAnalyzer(StftConfig config, int rate)
    : config_((config.validate(), config)),
      rate_(rate),
      window_(make_window(config.window, config.fft_size)),
      fft_(config.fft_size) {}

std::size_t StftAnalyzer::frame_count(std::size_t length) const noexcept {
  if (length < config_.fft_size) return 0;
  return (length - config_.fft_size) / config_.shift + 1;
}

void StftAnalyzer::transform(std::span<const double> samples,
                             std::span<Complex> out) const {
  const std::size_t k = config_.fft_size;
  if (samples.size() != k) {
    fail(ErrorKind::kStream, "analysis frame must hold fft_size samples");
  }
  std::vector<double> windowed(k);
  for (std::size_t i = 0; i < k; ++i) windowed[i] = samples[i] * window_[i];
  fft_.forward(windowed, out);
}

SpectralFrame StftAnalyzer::analyze_frame(const AudioBuffer& audio,
                                          std::size_t frame_index) const {
  const std::size_t k = config_.fft_size;
  const std::size_t start = frame_index * config_.shift;
  if (start + k > audio.frames()) {
    fail(ErrorKind::kStream, "frame " + std::to_string(frame_index) +
                                 " extends past the end of the signal");
  }
  SpectralFrame frame(static_cast<std::int64_t>(frame_index), k, audio.rate(),
                      audio.channels());
  for (std::size_t c = 0; c < audio.channels(); ++c) {
    transform(audio.channel(c).subspan(start, k), frame.bins[c]);
  }
  return frame;
}

std::vector<SpectralFrame> StftAnalyzer::analyze(const AudioBuffer& audio) const {
  const std::size_t count = frame_count(audio.frames());
  if (count == 0) {
    fail(ErrorKind::kInvalidInput, "signal shorter than one analysis frame");
  }
  std::vector<SpectralFrame> frames;
  frames.reserve(count);
  for (std::size_t t = 0; t < count; ++t) frames.push_back(analyze_frame(audio, t));
  return frames;
}

OverlapAddSynthesizer::OverlapAddSynthesizer(StftConfig config, int rate,
                                             std::size_t channels)
    : config_((config.validate(), config)),
      rate_(rate),
      window_(make_window(config.window, config.fft_size)),
      overlap_norm_(config.shift, 0.0),
      fft_(config.fft_size),
      out_(channels),
      scratch_(config.fft_size) {
  const std::size_t k = config_.fft_size;
  const std::size_t s = config_.shift;
  for (std::size_t r = 0; r < s; ++r) {
    for (std::size_t n = r; n < k; n += s) overlap_norm_[r] += window_[n] * window_[n];
    if (overlap_norm_[r] < 1e-8) {
      fail(ErrorKind::kInvalidConfig,
           "window overlap vanishes for shift " + std::to_string(s));
    }
  }
}

void OverlapAddSynthesizer::push(const SpectralFrame& frame) {
  const std::size_t k = config_.fft_size;
  if (frame.fft_size != k) {
    fail(ErrorKind::kStream, "frame fft_size " + std::to_string(frame.fft_size) +
                                 " does not match synthesizer size " +
                                 std::to_string(k));
  }
  if (frame.channels() != out_.size()) {
    fail(ErrorKind::kStream, "frame channel count does not match synthesizer");
  }
  const std::size_t start = frames_pushed_ * config_.shift;
  for (std::size_t c = 0; c < out_.size(); ++c) {
    auto& dst = out_[c];
    dst.resize(start + k, 0.0);
    fft_.inverse(frame.bins[c], scratch_);
    for (std::size_t n = 0; n < k; ++n) dst[start + n] += scratch_[n] * window_[n];
  }
  ++frames_pushed_;
}

AudioBuffer OverlapAddSynthesizer::finish() const {
  std::vector<std::vector<double>> channels = out_;
  const std::size_t s = config_.shift;
  for (auto& ch : channels) {
    for (std::size_t n = 0; n < ch.size(); ++n) ch[n] /= overlap_norm_[n % s];
  }
  return AudioBuffer(rate_, std::move(channels));
}

std::vector<SpectralFrame> stft_analyze(const AudioBuffer& audio,
                                        const StftConfig& config) {
  return StftAnalyzer(config, audio.rate()).analyze(audio);
}

AudioBuffer stft_synthesize(std::span<const SpectralFrame> frames,
                            const StftConfig& config) {
  if (frames.empty()) fail(ErrorKind::kStream, "no frames to synthesize");
  OverlapAddSynthesizer synth(config, frames.front().rate,
                              frames.front().channels());
  for (const auto& f : frames) synth.push(f);
  return synth.finish();
}

}  // namespace gssfront
