// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "gssfront/error.hpp"

namespace gssfront {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteWriter {
 public:
  void tag(const char (&t)[5]) { bytes_.insert(bytes_.end(), t, t + 4); }
  void u16(std::uint16_t v) {
    bytes_.push_back(static_cast<std::uint8_t>(v & 0xFF));
    bytes_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }
  void reserve(std::size_t n) { bytes_.reserve(n); }

 private:
  std::vector<std::uint8_t> bytes_;
};

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) |
         (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* t) {
  return std::memcmp(b.data() + at, t, 4) == 0;
}

std::int16_t to_pcm16(double v) {
  const double clipped = std::clamp(v, -1.0, 1.0);
  return static_cast<std::int16_t>(std::lround(clipped * 32767.0));
}

}  // namespace

std::vector<std::uint8_t> encode_wav(const AudioBuffer& audio,
                                     SampleFormat format) {
  const std::size_t channels = audio.channels();
  if (channels == 0 || channels > kMaxWavChannels) {
    fail(ErrorKind::kInvalidInput,
         "WAV output supports 1-8 channels, got " + std::to_string(channels));
  }
  const std::uint16_t bits = format == SampleFormat::kPcm16 ? 16 : 32;
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(audio.frames() * block_align);

  ByteWriter w;
  w.reserve(44 + data_bytes);
  w.tag("RIFF");
  w.u32(36 + data_bytes);
  w.tag("WAVE");
  w.tag("fmt ");
  w.u32(16);
  w.u16(format == SampleFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  w.u16(static_cast<std::uint16_t>(channels));
  w.u32(static_cast<std::uint32_t>(audio.rate()));
  w.u32(static_cast<std::uint32_t>(audio.rate()) * block_align);
  w.u16(block_align);
  w.u16(bits);
  w.tag("data");
  w.u32(data_bytes);
  for (std::size_t n = 0; n < audio.frames(); ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = audio.channel(c)[n];
      if (format == SampleFormat::kPcm16) {
        w.u16(static_cast<std::uint16_t>(to_pcm16(v)));
      } else {
        w.u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      }
    }
  }
  return w.take();
}

AudioBuffer decode_wav(std::span<const std::uint8_t> b) {
  if (b.size() < 12 || !tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE")) {
    fail(ErrorKind::kInvalidInput, "not a RIFF/WAVE stream");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_at = 0, data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t len = get_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > b.size() && !tag_is(b, pos, "data")) {
      fail(ErrorKind::kInvalidInput, "truncated WAV chunk");
    }
    if (tag_is(b, pos, "fmt ")) {
      if (len < 16) fail(ErrorKind::kInvalidInput, "short fmt chunk");
      format = get_u16(b, body);
      channels = get_u16(b, body + 2);
      rate = get_u32(b, body + 4);
      bits = get_u16(b, body + 14);
      if (format == kFormatExtensible) {
        if (len < 40) fail(ErrorKind::kInvalidInput, "short extensible fmt chunk");
        format = get_u16(b, body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (tag_is(b, pos, "data")) {
      data_at = body;
      data_len = std::min<std::size_t>(len, b.size() - body);
      break;
    }
    pos = body + len + (len & 1);
  }
  if (!have_fmt || data_at == 0) {
    fail(ErrorKind::kInvalidInput, "WAV stream lacks fmt or data chunk");
  }
  if (channels == 0 || channels > kMaxWavChannels) {
    fail(ErrorKind::kInvalidInput,
         "WAV input supports 1-8 channels, got " + std::to_string(channels));
  }
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    fail(ErrorKind::kInvalidInput, "unsupported WAV sample format (format " +
                                       std::to_string(format) + ", " +
                                       std::to_string(bits) + " bits)");
  }
  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frames = data_len / (bytes_per_sample * channels);
  std::vector<std::vector<double>> data(channels, std::vector<double>(frames));
  std::size_t at = data_at;
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      if (pcm16) {
        data[c][n] = static_cast<std::int16_t>(get_u16(b, at)) / 32768.0;
      } else {
        data[c][n] = std::bit_cast<float>(get_u32(b, at));
      }
      at += bytes_per_sample;
    }
  }
  return AudioBuffer(static_cast<int>(rate), std::move(data));
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               SampleFormat format) {
  const auto bytes = encode_wav(audio, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "short write to " + path.string());
}

}  // namespace gssfront
