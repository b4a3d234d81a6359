// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/audio.hpp"

#include <string>

#include "gssfront/error.hpp"

namespace gssfront {

bool is_supported_rate(int rate) {
  return rate == kSeparationRate || rate == kFeatureRate;
}

namespace {

void check_rate(int rate) {
  if (!is_supported_rate(rate)) {
    fail(ErrorKind::kInvalidConfig,
         "unsupported sample rate " + std::to_string(rate) +
             " (expected 48000 or 16000)");
  }
}

}  // namespace

AudioBuffer::AudioBuffer(int rate, std::size_t channels, std::size_t frames)
    : rate_(rate), data_(channels, std::vector<double>(frames, 0.0)) {
  check_rate(rate);
  if (channels == 0) fail(ErrorKind::kInvalidInput, "audio needs >= 1 channel");
}

AudioBuffer::AudioBuffer(int rate, std::vector<std::vector<double>> channels)
    : rate_(rate), data_(std::move(channels)) {
  check_rate(rate);
  if (data_.empty()) fail(ErrorKind::kInvalidInput, "audio needs >= 1 channel");
  for (const auto& ch : data_) {
    if (ch.size() != data_.front().size()) {
      fail(ErrorKind::kInvalidInput, "audio channels differ in length");
    }
  }
}

}  // namespace gssfront
