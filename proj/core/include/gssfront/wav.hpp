// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gssfront/audio.hpp"

namespace gssfront {

// Little-endian RIFF/WAVE, 1-8 channels, 16-bit PCM or 32-bit IEEE float.
// WAVE_FORMAT_EXTENSIBLE headers are accepted on read.
enum class SampleFormat { kPcm16, kFloat32 };

inline constexpr std::size_t kMaxWavChannels = 8;

std::vector<std::uint8_t> encode_wav(const AudioBuffer& audio,
                                     SampleFormat format);
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);

AudioBuffer read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               SampleFormat format = SampleFormat::kFloat32);

}  // namespace gssfront
