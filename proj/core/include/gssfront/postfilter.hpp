// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "gssfront/audio.hpp"
#include "gssfront/mcra.hpp"
#include "gssfront/spectral_gain.hpp"

namespace gssfront {

struct PostfilterOptions {
  double spectrum_smoothing = 0.7;  // alpha_s of the smoothed output spectra Z
  double leakage = 0.25;            // eta, power ratio (-6 dB)
  double alpha = 1.0;               // amplitude-domain exponent of the estimator
  double dd_weight = 0.98;          // alpha_p of the decision-directed estimate
  McraOptions mcra;

  // Prior speech-absence estimator.
  double prior_smoothing = 0.7;
  std::size_t local_half_width = 1;
  std::size_t global_half_width = 15;
  double prior_xi_min_db = -10.0;
  double prior_xi_max_db = 5.0;
  double prior_q_min = 0.02;
  double prior_q_max = 0.98;

  double upsilon_clamp = 30.0;
  double gain_min = kGainMin;
  double gain_max = kGainMax;
  double noise_floor = 1e-30;  // lower bound on lambda when forming gamma

  void validate() const;
  friend bool operator==(const PostfilterOptions&, const PostfilterOptions&) = default;
};

// Noise model of one separated channel.
struct SourceNoise {
  explicit SourceNoise(std::size_t bins, const McraOptions& mcra_options)
      : mcra(bins, mcra_options),
        smoothed(bins, 0.0),
        leakage(bins, 0.0),
        total(bins, 0.0) {}

  McraEstimator mcra;            // lambda_stat lives in mcra.noise()
  std::vector<double> smoothed;  // Z
  std::vector<double> leakage;   // lambda_leak
  std::vector<double> total;     // lambda = lambda_stat + lambda_leak
};

struct NoiseState {
  std::vector<SourceNoise> sources;
  std::size_t num_bins = 0;

  NoiseState(std::size_t num_sources, std::size_t bins, const McraOptions& mcra);
  std::span<const double> stationary(std::size_t m) const {
    return sources.at(m).mcra.noise();
  }
};

// Spectral-gain memory of one separated channel.
struct SourceGain {
  explicit SourceGain(std::size_t bins)
      : previous_gain_h1(bins, 0.0), previous_gamma(bins, 0.0), xi(bins, 0.0),
        upsilon(bins, 0.0), gamma(bins, 0.0), zeta(bins, 0.0), q(bins, 0.5),
        presence(bins, 1.0), gain_h1(bins, 0.0), gain(bins, kGainMin) {}

  std::vector<double> previous_gain_h1;
  std::vector<double> previous_gamma;
  std::vector<double> xi;
  std::vector<double> upsilon;
  std::vector<double> gamma;
  std::vector<double> zeta;      // time-smoothed xi feeding the prior estimator
  std::vector<double> q;         // prior speech-absence probability
  std::vector<double> presence;  // p
  std::vector<double> gain_h1;
  std::vector<double> gain;      // G = p^(1/alpha) G_H1, clamped
};

struct GainState {
  std::vector<SourceGain> sources;
  std::size_t num_bins = 0;
  std::size_t incidents = 0;  // non-finite gain evaluations

  GainState(std::size_t num_sources, std::size_t bins);
};

// Per-bin powers kept for the missing-feature mask.
struct PostfilterRecord {
  std::vector<double> input_power;
  std::vector<double> output_power;
  std::vector<double> stationary_noise;
};

std::vector<double> power_spectrum(std::span<const Complex> bins);

// Z <- alpha_s Z + (1 - alpha_s) |Y|^2
std::span<const double> smooth_spectrum(NoiseState& noise, std::size_t m,
                                        std::span<const double> power,
                                        double alpha_s);
void mcra_update(NoiseState& noise, std::size_t m, std::span<const double> power);
// lambda_leak(m) = eta sum_{i != m} Z_i, and refreshes lambda = stat + leak.
std::span<const double> leakage_estimate(NoiseState& noise, std::size_t m,
                                         double eta);

// Uses the previous frame's G_H1 and gamma stored for (m, k).
double decision_directed_xi(const GainState& gains, std::size_t m, std::size_t k,
                            double gamma_now, double alpha_p);
// Uses the prior q held for (m, k).
double speech_presence(const GainState& gains, std::size_t m, std::size_t k,
                       double xi, double upsilon, double upsilon_clamp = 30.0);
// Refreshes q for every bin of source m from the current xi.
void update_speech_absence_prior(GainState& gains, std::size_t m,
                                 const PostfilterOptions& options);

// Computes gamma, xi, q, p and G for source m from the current noise state
// and stores them (plus the memory for the next frame) in `gains`.
void compute_gains(GainState& gains, std::size_t m, const NoiseState& noise,
                   std::span<const double> power, const PostfilterOptions& options);

// S_m(k) = G_m(k) Y_m(k) with the gains already in `gains`. Fills one record
// per source when `records` is non-null.
SpectralFrame apply_postfilter(const SpectralFrame& y, const NoiseState& noise,
                               const GainState& gains,
                               std::vector<PostfilterRecord>* records = nullptr);

// Multi-source post-filter driving the steps above in order: all smoothed
// spectra first (leakage couples the channels), then per source the
// stationary noise, leakage, gain computation and application.
class MultiSourcePostfilter {
 public:
  MultiSourcePostfilter(std::size_t num_sources, std::size_t num_bins,
                        PostfilterOptions options = {});

  SpectralFrame process(const SpectralFrame& y);

  std::size_t num_sources() const noexcept { return noise_.sources.size(); }
  std::size_t num_bins() const noexcept { return noise_.num_bins; }
  const PostfilterOptions& options() const noexcept { return options_; }
  const NoiseState& noise() const noexcept { return noise_; }
  const GainState& gains() const noexcept { return gains_; }
  std::span<const double> gain(std::size_t m) const { return gains_.sources.at(m).gain; }
  const std::vector<PostfilterRecord>& records() const noexcept { return records_; }

  void add_source();
  void remove_source(std::size_t m);

  // frame,source,bin,lambda_stat,lambda_leak,xi,p,gain
  void write_diagnostics_csv_header(std::ostream& out) const;
  void write_diagnostics_csv(std::ostream& out, std::int64_t frame_index) const;

 private:
  PostfilterOptions options_;
  NoiseState noise_;
  GainState gains_;
  std::vector<PostfilterRecord> records_;
};

}  // namespace gssfront
