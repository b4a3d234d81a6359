// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <span>
#include <vector>

#include "gssfront/audio.hpp"

namespace gssfront {

// Decimate-by-3 with a linear-phase Kaiser-windowed sinc lowpass (passband
// edge 7 kHz, stopband edge 8 kHz, ~80 dB design attenuation). The filter is
// applied zero-phase, so output sample m is aligned with input sample 3m.
class Decimator48kTo16k {
 public:
  Decimator48kTo16k();

  std::span<const double> taps() const noexcept { return taps_; }
  std::vector<double> process(std::span<const double> input) const;

 private:
  std::vector<double> taps_;
};

AudioBuffer resample_48k_to_16k(const AudioBuffer& audio);

}  // namespace gssfront
