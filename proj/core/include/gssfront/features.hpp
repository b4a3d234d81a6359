// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gssfront/audio.hpp"
#include "gssfront/mel.hpp"
#include "gssfront/stft.hpp"

namespace gssfront {

struct FeatureOptions {
  StftConfig stft{400, 160, Window::kHamming};
  std::size_t num_bands = kMelBands;
  double low_hz = 0.0;
  double high_hz = 8000.0;
  double log_floor = 1e-12;
  bool lifter = true;
  // Cepstra outside [lifter_keep_first, lifter_keep_last] are zeroed.
  std::size_t lifter_keep_first = 1;
  std::size_t lifter_keep_last = 12;
  bool cms = true;
  std::size_t delta_half_width = 2;

  void validate() const;
  friend bool operator==(const FeatureOptions&, const FeatureOptions&) = default;
};

struct FeatureVector {
  std::int64_t index = 0;
  std::vector<double> statics;  // log-mel after lifter/CMS round trip
  std::vector<double> deltas;   // zero where delta_valid is false
  bool delta_valid = false;

  // statics followed by deltas
  std::vector<double> concatenated() const;
};

struct FeatureStream {
  std::vector<FeatureVector> frames;
  // False for utterances too short to hold one full delta window.
  bool deltas_available = false;
};

// Orthonormal DCT-II (forward) and its transpose (inverse).
class Dct {
 public:
  explicit Dct(std::size_t n);
  std::size_t size() const noexcept { return n_; }
  std::vector<double> forward(std::span<const double> x) const;
  std::vector<double> inverse(std::span<const double> c) const;

 private:
  std::size_t n_;
  std::vector<double> basis_;  // row-major n x n, basis_[k*n + i]
};

void apply_lifter(std::span<double> cepstrum, std::size_t keep_first,
                  std::size_t keep_last);
// Per-utterance mean removal, coefficient by coefficient.
void cepstral_mean_subtraction(std::vector<std::vector<double>>& cepstra);

// Linear-regression deltas over +-half_width frames:
// d_t = sum_n n (c_{t+n} - c_{t-n}) / (2 sum_n n^2). Frames without a full
// window get zeros and valid[t] = false.
std::vector<std::vector<double>> compute_deltas(
    const std::vector<std::vector<double>>& statics, std::size_t half_width,
    std::vector<bool>* valid = nullptr);

// FFT -> Mel -> Log -> DCT -> Lifter -> CMS -> IDCT -> Differentiation.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(FeatureOptions options = {});

  const FeatureOptions& options() const noexcept { return options_; }
  const MelFilterbank& filterbank() const noexcept { return bank_; }

  // Steps through Log: one vector of log band energies per frame.
  std::vector<std::vector<double>> log_mel(const AudioBuffer& audio16k) const;
  // Steps DCT through IDCT on a whole utterance.
  std::vector<std::vector<double>> smooth_and_normalize(
      std::vector<std::vector<double>> log_mel) const;

  FeatureStream extract(const AudioBuffer& audio16k) const;

 private:
  FeatureOptions options_;
  StftAnalyzer analyzer_;
  MelFilterbank bank_;
  Dct dct_;
};

FeatureStream extract_features(const AudioBuffer& audio16k,
                               const FeatureOptions& options = {});

}  // namespace gssfront
