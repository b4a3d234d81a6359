// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/postfilter.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "gssfront/error.hpp"

namespace gssfront {

void PostfilterOptions::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v < 1.0; };
  if (!unit(spectrum_smoothing)) {
    fail(ErrorKind::kInvalidConfig, "spectrum smoothing must lie in [0, 1)");
  }
  if (!(leakage >= 0.0 && leakage <= 1.0)) {
    fail(ErrorKind::kInvalidConfig, "leakage factor eta must lie in [0, 1]");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    fail(ErrorKind::kInvalidConfig, "gain exponent alpha must be positive");
  }
  if (!unit(dd_weight)) {
    fail(ErrorKind::kInvalidConfig, "decision-directed weight must lie in [0, 1)");
  }
  if (!unit(prior_smoothing)) {
    fail(ErrorKind::kInvalidConfig, "prior smoothing must lie in [0, 1)");
  }
  if (!(prior_xi_max_db > prior_xi_min_db)) {
    fail(ErrorKind::kInvalidConfig, "prior SNR ramp must be increasing");
  }
  if (!(prior_q_min >= 0.0 && prior_q_min <= prior_q_max && prior_q_max <= 1.0)) {
    fail(ErrorKind::kInvalidConfig, "prior q bounds must satisfy 0 <= min <= max <= 1");
  }
  if (!(gain_min >= 0.0 && gain_min <= gain_max)) {
    fail(ErrorKind::kInvalidConfig, "gain bounds must satisfy 0 <= min <= max");
  }
  mcra.validate();
}

NoiseState::NoiseState(std::size_t num_sources, std::size_t bins,
                       const McraOptions& mcra)
    : num_bins(bins) {
  sources.reserve(num_sources);
  for (std::size_t m = 0; m < num_sources; ++m) sources.emplace_back(bins, mcra);
}

GainState::GainState(std::size_t num_sources, std::size_t bins) : num_bins(bins) {
  sources.reserve(num_sources);
  for (std::size_t m = 0; m < num_sources; ++m) sources.emplace_back(bins);
}

std::vector<double> power_spectrum(std::span<const Complex> bins) {
  std::vector<double> p(bins.size());
  for (std::size_t k = 0; k < bins.size(); ++k) p[k] = std::norm(bins[k]);
  return p;
}

std::span<const double> smooth_spectrum(NoiseState& noise, std::size_t m,
                                        std::span<const double> power,
                                        double alpha_s) {
  auto& z = noise.sources.at(m).smoothed;
  if (power.size() != z.size()) fail(ErrorKind::kStream, "power spectrum size mismatch");
  for (std::size_t k = 0; k < z.size(); ++k) {
    z[k] = alpha_s * z[k] + (1.0 - alpha_s) * power[k];
  }
  return z;
}

void mcra_update(NoiseState& noise, std::size_t m, std::span<const double> power) {
  noise.sources.at(m).mcra.update(power);
}

std::span<const double> leakage_estimate(NoiseState& noise, std::size_t m,
                                         double eta) {
  auto& self = noise.sources.at(m);
  const auto stat = self.mcra.noise();
  for (std::size_t k = 0; k < noise.num_bins; ++k) {
    double others = 0.0;
    for (std::size_t i = 0; i < noise.sources.size(); ++i) {
      if (i != m) others += noise.sources[i].smoothed[k];
    }
    self.leakage[k] = eta * others;
    self.total[k] = stat[k] + self.leakage[k];
  }
  return self.leakage;
}

double decision_directed_xi(const GainState& gains, std::size_t m, std::size_t k,
                            double gamma_now, double alpha_p) {
  const auto& g = gains.sources.at(m);
  return decision_directed_xi(alpha_p, g.previous_gain_h1.at(k),
                              g.previous_gamma.at(k), gamma_now);
}

double speech_presence(const GainState& gains, std::size_t m, std::size_t k,
                       double xi, double upsilon, double upsilon_clamp) {
  return speech_presence_probability(gains.sources.at(m).q.at(k), xi, upsilon,
                                     upsilon_clamp);
}

namespace {

// Linear-in-dB ramp from 0 at xi_min to 1 at xi_max.
double ramp(double zeta, double lo, double hi) {
  if (zeta <= lo) return 0.0;
  if (zeta >= hi) return 1.0;
  return std::log(zeta / lo) / std::log(hi / lo);
}

}  // namespace

void update_speech_absence_prior(GainState& gains, std::size_t m,
                                 const PostfilterOptions& options) {
  auto& g = gains.sources.at(m);
  const std::size_t n = gains.num_bins;
  if (n == 0) return;
  const double b = options.prior_smoothing;
  for (std::size_t k = 0; k < n; ++k) g.zeta[k] = b * g.zeta[k] + (1.0 - b) * g.xi[k];

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + g.zeta[k];
  auto window_mean = [&](std::size_t k, std::size_t half) {
    const std::size_t lo = k >= half ? k - half : 0;
    const std::size_t hi = std::min(n, k + half + 1);
    return (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  };

  const double lo = std::pow(10.0, options.prior_xi_min_db / 10.0);
  const double hi = std::pow(10.0, options.prior_xi_max_db / 10.0);
  const double p_frame = ramp(prefix[n] / static_cast<double>(n), lo, hi);
  for (std::size_t k = 0; k < n; ++k) {
    const double p_local = ramp(window_mean(k, options.local_half_width), lo, hi);
    const double p_global = ramp(window_mean(k, options.global_half_width), lo, hi);
    g.q[k] = std::clamp(1.0 - p_local * p_global * p_frame, options.prior_q_min,
                        options.prior_q_max);
  }
}

void compute_gains(GainState& gains, std::size_t m, const NoiseState& noise,
                   std::span<const double> power, const PostfilterOptions& options) {
  auto& g = gains.sources.at(m);
  const auto& lambda = noise.sources.at(m).total;
  const std::size_t n = gains.num_bins;
  if (power.size() != n) fail(ErrorKind::kStream, "power spectrum size mismatch");

  for (std::size_t k = 0; k < n; ++k) {
    const double gamma = power[k] / std::max(lambda[k], options.noise_floor);
    g.gamma[k] = gamma;
    g.xi[k] = decision_directed_xi(gains, m, k, gamma, options.dd_weight);
  }
  update_speech_absence_prior(gains, m, options);

  const double inv_alpha = 1.0 / options.alpha;
  for (std::size_t k = 0; k < n; ++k) {
    const double xi = g.xi[k];
    const double gamma = g.gamma[k];
    const double v = upsilon_of(xi, gamma);
    const double gh1 =
        gain_h1(xi, gamma, options.alpha, &gains.incidents, options.gain_max);
    const double p = speech_presence(gains, m, k, xi, v, options.upsilon_clamp);
    double gain = std::pow(p, inv_alpha) * gh1;
    if (!std::isfinite(gain)) {
      ++gains.incidents;
      gain = options.gain_min;
    }
    g.upsilon[k] = v;
    g.presence[k] = p;
    g.gain_h1[k] = gh1;
    g.gain[k] = std::clamp(gain, options.gain_min, options.gain_max);
    g.previous_gain_h1[k] = gh1;
    g.previous_gamma[k] = gamma;
  }
}

SpectralFrame apply_postfilter(const SpectralFrame& y, const NoiseState& noise,
                               const GainState& gains,
                               std::vector<PostfilterRecord>* records) {
  if (y.channels() != gains.sources.size() || y.num_bins() != gains.num_bins) {
    fail(ErrorKind::kStream, "post-filter frame shape mismatch");
  }
  SpectralFrame out(y.index, y.fft_size, y.rate, y.channels());
  if (records) records->resize(y.channels());
  for (std::size_t m = 0; m < y.channels(); ++m) {
    const auto& gain = gains.sources[m].gain;
    PostfilterRecord* rec = records ? &(*records)[m] : nullptr;
    if (rec) {
      rec->input_power.resize(y.num_bins());
      rec->output_power.resize(y.num_bins());
      const auto stat = noise.stationary(m);
      rec->stationary_noise.assign(stat.begin(), stat.end());
    }
    for (std::size_t k = 0; k < y.num_bins(); ++k) {
      out.bins[m][k] = gain[k] * y.bins[m][k];
      if (rec) {
        rec->input_power[k] = std::norm(y.bins[m][k]);
        rec->output_power[k] = std::norm(out.bins[m][k]);
      }
    }
  }
  return out;
}

MultiSourcePostfilter::MultiSourcePostfilter(std::size_t num_sources,
                                             std::size_t num_bins,
                                             PostfilterOptions options)
    : options_((options.validate(), options)),
      noise_(num_sources, num_bins, options.mcra),
      gains_(num_sources, num_bins) {}

SpectralFrame MultiSourcePostfilter::process(const SpectralFrame& y) {
  if (y.channels() != num_sources() || y.num_bins() != num_bins()) {
    fail(ErrorKind::kStream, "post-filter expects " + std::to_string(num_sources()) +
                                 " channels of " + std::to_string(num_bins()) + " bins");
  }
  std::vector<std::vector<double>> powers(num_sources());
  for (std::size_t m = 0; m < num_sources(); ++m) {
    powers[m] = power_spectrum(y.bins[m]);
    smooth_spectrum(noise_, m, powers[m], options_.spectrum_smoothing);
  }
  // Every Z is current from here on.
  for (std::size_t m = 0; m < num_sources(); ++m) {
    mcra_update(noise_, m, powers[m]);
    leakage_estimate(noise_, m, options_.leakage);
    compute_gains(gains_, m, noise_, powers[m], options_);
  }
  return apply_postfilter(y, noise_, gains_, &records_);
}

void MultiSourcePostfilter::add_source() {
  noise_.sources.emplace_back(num_bins(), options_.mcra);
  gains_.sources.emplace_back(num_bins());
}

void MultiSourcePostfilter::remove_source(std::size_t m) {
  if (m >= num_sources()) fail(ErrorKind::kInvalidInput, "post-filter source out of range");
  noise_.sources.erase(noise_.sources.begin() + static_cast<std::ptrdiff_t>(m));
  gains_.sources.erase(gains_.sources.begin() + static_cast<std::ptrdiff_t>(m));
  if (m < records_.size()) records_.erase(records_.begin() + static_cast<std::ptrdiff_t>(m));
}

void MultiSourcePostfilter::write_diagnostics_csv_header(std::ostream& out) const {
  out << "frame,source,bin,lambda_stat,lambda_leak,xi,p,gain\n";
}

void MultiSourcePostfilter::write_diagnostics_csv(std::ostream& out,
                                                  std::int64_t frame_index) const {
  for (std::size_t m = 0; m < num_sources(); ++m) {
    const auto stat = noise_.stationary(m);
    const auto& src = noise_.sources[m];
    const auto& g = gains_.sources[m];
    for (std::size_t k = 0; k < num_bins(); ++k) {
      out << frame_index << ',' << m << ',' << k << ',' << stat[k] << ','
          << src.leakage[k] << ',' << g.xi[k] << ',' << g.presence[k] << ','
          << g.gain[k] << '\n';
    }
  }
}

}  // namespace gssfront
