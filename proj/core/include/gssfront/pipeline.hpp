// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Frame-synchronous front-end: STFT analysis, separation, post-filter, then
// per-source synthesis, feature extraction and mask estimation.

#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gssfront/audio.hpp"
#include "gssfront/config.hpp"
#include "gssfront/features.hpp"
#include "gssfront/mask.hpp"
#include "gssfront/quality.hpp"

namespace gssfront {

// Blocking FIFO with a fixed capacity. close() wakes every waiter; pop then
// drains what is left and returns nullopt once empty.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

  // False if the queue was closed before the item could be queued.
  bool push(T item) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_full_.notify_all();
    not_empty_.notify_all();
  }

  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<T> items_;
  bool closed_ = false;
};

// Known additive parts of the mixture. When given, they are pushed through
// the same filters as the mixture so every output splits exactly into
// per-source and noise contributions.
struct MixtureComponents {
  std::vector<AudioBuffer> images;  // per configured source, same order
  AudioBuffer noise;
};

struct StageTimings {
  double analysis_s = 0.0;
  double separation_s = 0.0;
  double postfilter_s = 0.0;
  double mask_s = 0.0;
  double synthesis_s = 0.0;
  double features_s = 0.0;
};

struct PipelineResult {
  std::vector<std::string> source_ids;
  std::size_t input_frames = 0;     // samples per channel at 48 kHz
  std::size_t stft_frames = 0;

  // Per source, 48 kHz, aligned with the input.
  std::vector<std::vector<double>> separated;  // last enabled stage
  std::vector<std::vector<double>> gss_output;
  std::vector<std::vector<double>> delay_and_sum;  // only with components
  std::vector<std::vector<double>> postfiltered;   // empty when disabled

  std::vector<FeatureStream> features;
  std::vector<MaskMatrix> masks;          // aligned with the feature frames
  std::vector<std::size_t> mask_frame_map;  // feature frame -> STFT frame

  // With components: [stage][source][component] time signals, component
  // order = sources then noise.
  std::vector<std::string> stage_names;
  std::vector<std::vector<std::vector<std::vector<double>>>> shadows;
  // Per source, per STFT frame, per band energy of target, of the summed
  // other sources and of the sensor noise at the separator output.
  std::vector<std::vector<std::vector<double>>> band_target;
  std::vector<std::vector<std::vector<double>>> band_interference;
  std::vector<std::vector<std::vector<double>>> band_noise;
  std::optional<QualityReport> quality;

  std::vector<double> cost_j1;  // per frame, diagnostics only
  std::vector<double> cost_j2;
  std::size_t rejected_updates = 0;
  std::size_t gain_incidents = 0;
  StageTimings timings;
};

struct ProcessOptions {
  const MixtureComponents* components = nullptr;
  std::ostream* postfilter_diagnostics = nullptr;  // CSV, see MultiSourcePostfilter
  std::ostream* weight_diagnostics = nullptr;       // final |W| CSV
  bool record_costs = false;
};

// Runs the configured stages on a mixture held in memory. Inline and threaded
// execution produce bit-identical results.
PipelineResult process_mixture(const PipelineConfig& config, const AudioBuffer& mixture,
                               const ProcessOptions& options = {});

// Whole run from files: validates every input first, then writes
// effective_config.json, separated_<id>.wav, features_<id>.{bin,csv},
// mask_<id>.{bin,csv}, quality.csv (with references) and, with diagnostics
// enabled, diagnostics/{postfilter,weights,costs}.csv into output_dir.
PipelineResult run_pipeline(const PipelineConfig& config);

// Quality of every stage against the components, skipping `skip` samples.
QualityReport evaluate_quality(const PipelineResult& result, const AudioBuffer& mixture,
                               const MixtureComponents& components, std::size_t skip = 0);

void log_run_header(const PipelineConfig& config);

}  // namespace gssfront
