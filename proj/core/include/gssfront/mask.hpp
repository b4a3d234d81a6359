// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gssfront/mel.hpp"
#include "gssfront/postfilter.hpp"

namespace gssfront {

struct MaskOptions {
  double threshold = 0.25;
  double input_floor = 1e-10;  // relative to the frame's total input energy
  std::size_t delta_half_width = 2;

  void validate() const;
  friend bool operator==(const MaskOptions&, const MaskOptions&) = default;
};

// Post-filter input/output energy and stationary-noise energy per mel band
// for one frame.
struct BandEnergies {
  std::vector<double> input;
  std::vector<double> output;
  std::vector<double> noise;
};

struct MaskRow {
  std::vector<double> continuous;          // m = (S_out + N) / S_in
  std::vector<std::uint8_t> reliable;      // m > T
  std::vector<std::uint8_t> delta_reliable;
};

struct MaskMatrix {
  double threshold = 0.25;
  std::size_t num_bands = 0;
  std::vector<MaskRow> rows;
};

BandEnergies band_energies(const PostfilterRecord& record, const MelFilterbank& bank);

// Bands whose input energy does not exceed input_floor times the frame
// energy are set to m = 1 and marked reliable. delta_reliable is left zero.
MaskRow compute_mask(std::span<const double> s_in, std::span<const double> s_out,
                     std::span<const double> noise, double threshold,
                     double input_floor = 1e-10);

// Product of the static bits of the 2*half_width+1 rows centred on the
// middle row.
std::vector<std::uint8_t> delta_mask(std::span<const MaskRow> window);

// Fills delta_reliable on every row; rows without full context get zeros.
void fill_delta_masks(MaskMatrix& mask, std::size_t half_width);

MaskMatrix build_mask(std::span<const BandEnergies> frames, const MaskOptions& options);

// For each target frame, the index of the source frame whose centre is
// nearest in time. Centres are first_centre + t * hop (seconds).
std::vector<std::size_t> nearest_frame_map(std::size_t target_frames,
                                           double target_first_centre,
                                           double target_hop,
                                           std::size_t source_frames,
                                           double source_first_centre,
                                           double source_hop);

}  // namespace gssfront
