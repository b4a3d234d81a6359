// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "gssfront/features.hpp"
#include "gssfront/mask.hpp"

namespace gssfront {

// Feature file, one record per frame: frame index, statics, deltas.
//
// CSV:    header "frame,s0..s{B-1},d0..d{B-1}", then one row per frame.
// Binary: "GSFF", u32 version (1), u32 frames, u32 statics, u32 deltas,
//         u32 delta half-width, u32 deltas_available; then per frame
//         i64 index and statics+deltas as f64. All little-endian.
//
// Delta validity is not stored per frame; readers rebuild it from the
// half-width (true when the frame has full context).
void write_features_csv(std::ostream& out, const FeatureStream& features);
FeatureStream read_features_csv(std::istream& in, std::size_t delta_half_width = 2);
std::vector<std::uint8_t> encode_features(const FeatureStream& features,
                                          std::size_t delta_half_width = 2);
FeatureStream decode_features(std::span<const std::uint8_t> bytes);

// Mask file with the same framing: per frame, B continuous values, B static
// bits, B delta bits.
//
// CSV:    header "frame,m0..,M0..,dM0..".
// Binary: "GSFM", u32 version (1), u32 frames, u32 bands (<= 32),
//         f64 threshold; then per frame u32 index, B x f64 continuous,
//         u32 static bitfield, u32 delta bitfield (bit i = band i).
void write_mask_csv(std::ostream& out, const MaskMatrix& mask);
MaskMatrix read_mask_csv(std::istream& in);
std::vector<std::uint8_t> encode_mask(const MaskMatrix& mask);
MaskMatrix decode_mask(std::span<const std::uint8_t> bytes);

void save_features(const std::filesystem::path& path, const FeatureStream& features);
FeatureStream load_features(const std::filesystem::path& path);
void save_mask(const std::filesystem::path& path, const MaskMatrix& mask);
MaskMatrix load_mask(const std::filesystem::path& path);

}  // namespace gssfront
