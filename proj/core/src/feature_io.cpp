// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/feature_io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "byte_io.hpp"
#include "gssfront/error.hpp"

namespace gssfront {

namespace detail {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot create '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "write failed for '" + path + "'");
}

}  // namespace detail

namespace {

constexpr std::uint32_t kVersion = 1;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  // strtod handles inf/nan and the %.17g output we write.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    fail(ErrorKind::kInvalidInput, "bad number '" + s + "' in CSV");
  }
  return v;
}

std::int64_t parse_int(const std::string& s) {
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    fail(ErrorKind::kInvalidInput, "bad integer '" + s + "' in CSV");
  }
  return v;
}

// Validity as compute_deltas assigns it.
void restore_delta_validity(FeatureStream& fs, std::size_t half_width) {
  const std::size_t n = fs.frames.size();
  fs.deltas_available = n >= 2 * half_width + 1;
  for (std::size_t t = 0; t < n; ++t) {
    fs.frames[t].delta_valid =
        fs.deltas_available && t >= half_width && t + half_width < n;
  }
}

std::size_t feature_width(const FeatureStream& fs) {
  if (fs.frames.empty()) return kMelBands;
  const std::size_t b = fs.frames.front().statics.size();
  for (const auto& f : fs.frames) {
    if (f.statics.size() != b || f.deltas.size() != b) {
      fail(ErrorKind::kInvalidInput, "feature frames have inconsistent widths");
    }
  }
  return b;
}

}  // namespace

void write_features_csv(std::ostream& out, const FeatureStream& features) {
  const std::size_t b = feature_width(features);
  out << "frame";
  for (std::size_t i = 0; i < b; ++i) out << ",s" << i;
  for (std::size_t i = 0; i < b; ++i) out << ",d" << i;
  out << '\n';
  out << std::setprecision(17);
  for (const auto& f : features.frames) {
    out << f.index;
    for (double v : f.statics) out << ',' << v;
    for (double v : f.deltas) out << ',' << v;
    out << '\n';
  }
}

FeatureStream read_features_csv(std::istream& in, std::size_t delta_half_width) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::kInvalidInput, "empty feature CSV");
  const auto header = split_csv(line);
  if (header.empty() || header[0] != "frame" || header.size() % 2 != 1) {
    fail(ErrorKind::kInvalidInput, "feature CSV header malformed");
  }
  const std::size_t b = (header.size() - 1) / 2;
  FeatureStream fs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      fail(ErrorKind::kInvalidInput, "feature CSV row has wrong column count");
    }
    FeatureVector f;
    f.index = parse_int(cells[0]);
    f.statics.resize(b);
    f.deltas.resize(b);
    for (std::size_t i = 0; i < b; ++i) {
      f.statics[i] = parse_double(cells[1 + i]);
      f.deltas[i] = parse_double(cells[1 + b + i]);
    }
    fs.frames.push_back(std::move(f));
  }
  restore_delta_validity(fs, delta_half_width);
  return fs;
}

std::vector<std::uint8_t> encode_features(const FeatureStream& features,
                                          std::size_t delta_half_width) {
  const std::size_t b = feature_width(features);
  detail::LeWriter w;
  w.bytes("GSFF", 4);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(features.frames.size()));
  w.u32(static_cast<std::uint32_t>(b));
  w.u32(static_cast<std::uint32_t>(b));
  w.u32(static_cast<std::uint32_t>(delta_half_width));
  w.u32(features.deltas_available ? 1 : 0);
  for (const auto& f : features.frames) {
    w.i64(f.index);
    for (double v : f.statics) w.f64(v);
    for (double v : f.deltas) w.f64(v);
  }
  return std::move(w.data());
}

FeatureStream decode_features(std::span<const std::uint8_t> bytes) {
  detail::LeReader r(bytes);
  if (!r.tag("GSFF")) fail(ErrorKind::kInvalidInput, "not a feature file");
  if (r.u32() != kVersion) fail(ErrorKind::kInvalidInput, "unsupported feature file version");
  const std::uint32_t frames = r.u32();
  const std::uint32_t ns = r.u32();
  const std::uint32_t nd = r.u32();
  const std::uint32_t half_width = r.u32();
  const bool available = r.u32() != 0;
  if (ns != nd) fail(ErrorKind::kInvalidInput, "static/delta widths differ");
  r.need(static_cast<std::size_t>(frames) * (8 + 8 * (ns + nd)));
  FeatureStream fs;
  fs.frames.resize(frames);
  for (auto& f : fs.frames) {
    f.index = r.i64();
    f.statics.resize(ns);
    f.deltas.resize(nd);
    for (double& v : f.statics) v = r.f64();
    for (double& v : f.deltas) v = r.f64();
  }
  if (!r.at_end()) fail(ErrorKind::kInvalidInput, "trailing bytes in feature file");
  restore_delta_validity(fs, half_width);
  fs.deltas_available = available;
  return fs;
}

void write_mask_csv(std::ostream& out, const MaskMatrix& mask) {
  const std::size_t b = mask.num_bands;
  out << "frame";
  for (std::size_t i = 0; i < b; ++i) out << ",m" << i;
  for (std::size_t i = 0; i < b; ++i) out << ",M" << i;
  for (std::size_t i = 0; i < b; ++i) out << ",dM" << i;
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t t = 0; t < mask.rows.size(); ++t) {
    const auto& row = mask.rows[t];
    out << t;
    for (double v : row.continuous) out << ',' << v;
    for (auto v : row.reliable) out << ',' << int{v};
    for (auto v : row.delta_reliable) out << ',' << int{v};
    out << '\n';
  }
}

MaskMatrix read_mask_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::kInvalidInput, "empty mask CSV");
  const auto header = split_csv(line);
  if (header.empty() || header[0] != "frame" || (header.size() - 1) % 3 != 0) {
    fail(ErrorKind::kInvalidInput, "mask CSV header malformed");
  }
  MaskMatrix mask;
  mask.num_bands = (header.size() - 1) / 3;
  const std::size_t b = mask.num_bands;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      fail(ErrorKind::kInvalidInput, "mask CSV row has wrong column count");
    }
    MaskRow row;
    row.continuous.resize(b);
    row.reliable.resize(b);
    row.delta_reliable.resize(b);
    for (std::size_t i = 0; i < b; ++i) {
      row.continuous[i] = parse_double(cells[1 + i]);
      row.reliable[i] = parse_int(cells[1 + b + i]) != 0;
      row.delta_reliable[i] = parse_int(cells[1 + 2 * b + i]) != 0;
    }
    mask.rows.push_back(std::move(row));
  }
  return mask;
}

std::vector<std::uint8_t> encode_mask(const MaskMatrix& mask) {
  const std::size_t b = mask.num_bands;
  if (b > 32) fail(ErrorKind::kInvalidInput, "mask bitfields hold at most 32 bands");
  detail::LeWriter w;
  w.bytes("GSFM", 4);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(mask.rows.size()));
  w.u32(static_cast<std::uint32_t>(b));
  w.f64(mask.threshold);
  for (std::size_t t = 0; t < mask.rows.size(); ++t) {
    const auto& row = mask.rows[t];
    if (row.continuous.size() != b || row.reliable.size() != b ||
        row.delta_reliable.size() != b) {
      fail(ErrorKind::kInvalidInput, "mask row width mismatch");
    }
    w.u32(static_cast<std::uint32_t>(t));
    for (double v : row.continuous) w.f64(v);
    std::uint32_t s = 0, d = 0;
    for (std::size_t i = 0; i < b; ++i) {
      if (row.reliable[i]) s |= 1u << i;
      if (row.delta_reliable[i]) d |= 1u << i;
    }
    w.u32(s);
    w.u32(d);
  }
  return std::move(w.data());
}

MaskMatrix decode_mask(std::span<const std::uint8_t> bytes) {
  detail::LeReader r(bytes);
  if (!r.tag("GSFM")) fail(ErrorKind::kInvalidInput, "not a mask file");
  if (r.u32() != kVersion) fail(ErrorKind::kInvalidInput, "unsupported mask file version");
  const std::uint32_t frames = r.u32();
  const std::uint32_t b = r.u32();
  if (b > 32) fail(ErrorKind::kInvalidInput, "mask file band count too large");
  MaskMatrix mask;
  mask.threshold = r.f64();
  mask.num_bands = b;
  r.need(static_cast<std::size_t>(frames) * (12 + 8 * b));
  mask.rows.resize(frames);
  for (auto& row : mask.rows) {
    r.u32();
    row.continuous.resize(b);
    row.reliable.resize(b);
    row.delta_reliable.resize(b);
    for (double& v : row.continuous) v = r.f64();
    const std::uint32_t s = r.u32();
    const std::uint32_t d = r.u32();
    for (std::size_t i = 0; i < b; ++i) {
      row.reliable[i] = (s >> i) & 1u;
      row.delta_reliable[i] = (d >> i) & 1u;
    }
  }
  if (!r.at_end()) fail(ErrorKind::kInvalidInput, "trailing bytes in mask file");
  return mask;
}

namespace {

bool is_csv(const std::filesystem::path& p) { return p.extension() == ".csv"; }

}  // namespace

void save_features(const std::filesystem::path& path, const FeatureStream& features) {
  if (is_csv(path)) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::kIo, "cannot create '" + path.string() + "'");
    write_features_csv(out, features);
    return;
  }
  detail::write_file_bytes(path.string(), encode_features(features));
}

FeatureStream load_features(const std::filesystem::path& path) {
  if (is_csv(path)) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::kIo, "cannot open '" + path.string() + "'");
    return read_features_csv(in);
  }
  return decode_features(detail::read_file_bytes(path.string()));
}

void save_mask(const std::filesystem::path& path, const MaskMatrix& mask) {
  if (is_csv(path)) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::kIo, "cannot create '" + path.string() + "'");
    write_mask_csv(out, mask);
    return;
  }
  detail::write_file_bytes(path.string(), encode_mask(mask));
}

MaskMatrix load_mask(const std::filesystem::path& path) {
  if (is_csv(path)) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::kIo, "cannot open '" + path.string() + "'");
    return read_mask_csv(in);
  }
  return decode_mask(detail::read_file_bytes(path.string()));
}

}  // namespace gssfront
