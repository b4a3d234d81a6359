// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "gssfront/error.hpp"
#include "gssfront/feature_io.hpp"
#include "gssfront/gss.hpp"
#include "gssfront/postfilter.hpp"
#include "gssfront/resample.hpp"
#include "gssfront/scene.hpp"
#include "gssfront/stft.hpp"
#include "gssfront/wav.hpp"

namespace gssfront {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Everything one STFT frame carries between stages.
struct Bundle {
  std::size_t t = 0;
  SpectralFrame x;
  std::vector<SpectralFrame> xc;  // components of x
  SpectralFrame ds;
  std::vector<SpectralFrame> ds_c;
  SpectralFrame y;
  std::vector<SpectralFrame> yc;
  SpectralFrame s;
  std::vector<SpectralFrame> sc;
  std::vector<BandEnergies> bands;
  std::vector<std::vector<double>> band_target;
  std::vector<std::vector<double>> band_interference;
  std::vector<std::vector<double>> band_noise;
  double j1 = 0.0;
  double j2 = 0.0;
  std::string pf_text;
};

SpectralFrame apply_weights(const std::vector<gss::Matrix>& w, const SpectralFrame& x) {
  const std::size_t m = static_cast<std::size_t>(w.front().rows());
  const std::size_t n = x.channels();
  SpectralFrame y(x.index, x.fft_size, x.rate, m);
  gss::Vector v(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < x.num_bins(); ++k) {
    for (std::size_t c = 0; c < n; ++c) v(static_cast<Eigen::Index>(c)) = x.bins[c][k];
    const gss::Vector yk = w[k] * v;
    for (std::size_t i = 0; i < m; ++i) y.bins[i][k] = yk(static_cast<Eigen::Index>(i));
  }
  return y;
}

SpectralFrame apply_gains(const GainState& gains, const SpectralFrame& y) {
  SpectralFrame out(y.index, y.fft_size, y.rate, y.channels());
  for (std::size_t m = 0; m < y.channels(); ++m) {
    const auto& g = gains.sources[m].gain;
    for (std::size_t k = 0; k < y.num_bins(); ++k) out.bins[m][k] = g[k] * y.bins[m][k];
  }
  return out;
}

std::vector<std::vector<double>> trimmed(const AudioBuffer& a, std::size_t offset,
                                         std::size_t length) {
  std::vector<std::vector<double>> out(a.channels());
  for (std::size_t c = 0; c < a.channels(); ++c) {
    const auto ch = a.channel(c);
    out[c].assign(ch.begin() + static_cast<std::ptrdiff_t>(offset),
                  ch.begin() + static_cast<std::ptrdiff_t>(offset + length));
  }
  return out;
}

class Engine {
 public:
  Engine(const PipelineConfig& config, const AudioBuffer& mixture,
         const ProcessOptions& options)
      : config_(config),
        options_(options),
        comps_(options.components),
        length_(mixture.frames()),
        pad_front_(config.stft.fft_size - config.stft.shift),
        analyzer_(config.stft, kSeparationRate),
        separator_(config.geometry(), config.source_set(), config.stft.fft_size,
                   separation_options(config)),
        postfilter_(config.sources.size(), config.stft.fft_size / 2 + 1, config.postfilter),
        mask_bank_(config.stft.fft_size, kSeparationRate, config.features.num_bands,
                   config.features.low_hz, config.features.high_hz) {
    const std::size_t k = config.stft.fft_size;
    const std::size_t s = config.stft.shift;
    num_frames_ = (length_ + pad_front_ - 1) / s + 1;
    const std::size_t padded = (num_frames_ - 1) * s + k;
    x_ = pad(mixture, padded);
    if (comps_) {
      for (const auto& img : comps_->images) xc_.push_back(pad(img, padded));
      xc_.push_back(pad(comps_->noise, padded));
      ds_weights_ = init_delay_and_sum(separator_.steering());
    }
    const std::size_t m = num_sources();
    auto synth = [&] { return OverlapAddSynthesizer(config.stft, kSeparationRate, m); };
    gss_synth_.emplace_back(synth());
    if (config.postfilter_enabled) pf_synth_.emplace_back(synth());
    if (comps_) {
      ds_synth_.emplace_back(synth());
      for (std::size_t c = 0; c < xc_.size(); ++c) {
        ds_c_synth_.push_back(synth());
        gss_c_synth_.push_back(synth());
        if (config.postfilter_enabled) pf_c_synth_.push_back(synth());
      }
    }
    bands_.resize(m);
    band_target_.resize(m);
    band_interference_.resize(m);
    band_noise_.resize(m);
  }

  std::size_t num_sources() const { return config_.sources.size(); }
  std::size_t num_frames() const { return num_frames_; }

  Bundle analyze(std::size_t t) const {
    Bundle b;
    b.t = t;
    b.x = analyzer_.analyze_frame(x_, t);
    for (const auto& c : xc_) b.xc.push_back(analyzer_.analyze_frame(c, t));
    return b;
  }

  void separate(Bundle& b) {
    if (comps_) {
      b.ds = apply_weights(ds_weights_, b.x);
      for (const auto& xc : b.xc) b.ds_c.push_back(apply_weights(ds_weights_, xc));
    }
    if (options_.record_costs) {
      b.j1 = separator_.cost_j1(b.x);
      b.j2 = separator_.cost_j2();
    }
    b.y = separator_.separate(b.x);
    for (const auto& xc : b.xc) b.yc.push_back(separator_.separate(xc));
    separator_.adapt(b.x);

    if (comps_) {
      // Band energies of the target and of the other sources, per output.
      const std::size_t m = num_sources();
      const std::size_t bins = b.y.num_bins();
      b.band_target.resize(m);
      b.band_interference.resize(m);
      b.band_noise.resize(m);
      std::vector<double> pt(bins), pi(bins), pn(bins);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < bins; ++k) {
          Complex other = 0.0;
          for (std::size_t j = 0; j < m; ++j) {
            if (j != i) other += b.yc[j].bins[i][k];
          }
          pt[k] = std::norm(b.yc[i].bins[i][k]);
          pi[k] = std::norm(other);
          pn[k] = std::norm(b.yc[m].bins[i][k]);
        }
        b.band_target[i] = mask_bank_.apply(pt);
        b.band_interference[i] = mask_bank_.apply(pi);
        b.band_noise[i] = mask_bank_.apply(pn);
      }
    }
  }

  void postfilter(Bundle& b) {
    if (!config_.postfilter_enabled) return;
    b.s = postfilter_.process(b.y);
    for (const auto& yc : b.yc) b.sc.push_back(apply_gains(postfilter_.gains(), yc));
    if (config_.mask_enabled) {
      for (const auto& rec : postfilter_.records()) b.bands.push_back(band_energies(rec, mask_bank_));
    }
    if (options_.postfilter_diagnostics) {
      std::ostringstream ss;
      postfilter_.write_diagnostics_csv(ss, static_cast<std::int64_t>(b.t));
      b.pf_text = ss.str();
    }
  }

  void sink(Bundle& b) {
    gss_synth_.front().push(b.y);
    if (config_.postfilter_enabled) pf_synth_.front().push(b.s);
    if (comps_) {
      ds_synth_.front().push(b.ds);
      for (std::size_t c = 0; c < b.xc.size(); ++c) {
        ds_c_synth_[c].push(b.ds_c[c]);
        gss_c_synth_[c].push(b.yc[c]);
        if (config_.postfilter_enabled) pf_c_synth_[c].push(b.sc[c]);
      }
      for (std::size_t i = 0; i < num_sources(); ++i) {
        band_target_[i].push_back(std::move(b.band_target[i]));
        band_interference_[i].push_back(std::move(b.band_interference[i]));
        band_noise_[i].push_back(std::move(b.band_noise[i]));
      }
    }
    for (std::size_t i = 0; i < b.bands.size(); ++i) bands_[i].push_back(std::move(b.bands[i]));
    if (options_.record_costs) {
      cost_j1_.push_back(b.j1);
      cost_j2_.push_back(b.j2);
    }
    if (options_.postfilter_diagnostics) *options_.postfilter_diagnostics << b.pf_text;
  }

  void run_inline(StageTimings& timings) {
    for (std::size_t t = 0; t < num_frames_; ++t) {
      auto t0 = Clock::now();
      Bundle b = analyze(t);
      timings.analysis_s += seconds_since(t0);
      t0 = Clock::now();
      separate(b);
      timings.separation_s += seconds_since(t0);
      t0 = Clock::now();
      postfilter(b);
      timings.postfilter_s += seconds_since(t0);
      t0 = Clock::now();
      sink(b);
      timings.synthesis_s += seconds_since(t0);
    }
  }

  void run_threaded() {
    const std::size_t cap = config_.queue_capacity;
    BoundedQueue<Bundle> q1(cap), q2(cap), q3(cap);
    std::mutex err_mu;
    std::exception_ptr err;
    auto abort_all = [&] {
      {
        std::lock_guard lock(err_mu);
        if (!err) err = std::current_exception();
      }
      q1.close();
      q2.close();
      q3.close();
    };
    std::thread a([&] {
      try {
        for (std::size_t t = 0; t < num_frames_; ++t) {
          if (!q1.push(analyze(t))) break;
        }
      } catch (...) {
        abort_all();
      }
      q1.close();
    });
    std::thread g([&] {
      try {
        while (auto b = q1.pop()) {
          separate(*b);
          if (!q2.push(std::move(*b))) break;
        }
      } catch (...) {
        abort_all();
      }
      q2.close();
    });
    std::thread p([&] {
      try {
        while (auto b = q2.pop()) {
          postfilter(*b);
          if (!q3.push(std::move(*b))) break;
        }
      } catch (...) {
        abort_all();
      }
      q3.close();
    });
    try {
      while (auto b = q3.pop()) sink(*b);
    } catch (...) {
      abort_all();
    }
    a.join();
    g.join();
    p.join();
    if (err) std::rethrow_exception(err);
  }

  void finish(PipelineResult& r) {
    for (const auto& s : config_.sources) r.source_ids.push_back(s.id);
    r.input_frames = length_;
    r.stft_frames = num_frames_;
    r.gss_output = trimmed(gss_synth_.front().finish(), pad_front_, length_);
    if (config_.postfilter_enabled) {
      r.postfiltered = trimmed(pf_synth_.front().finish(), pad_front_, length_);
      r.separated = r.postfiltered;
    } else {
      r.separated = r.gss_output;
    }
    if (comps_) {
      r.delay_and_sum = trimmed(ds_synth_.front().finish(), pad_front_, length_);
      r.stage_names = {"delay-and-sum", "gss"};
      std::vector<std::vector<OverlapAddSynthesizer>*> stages = {&ds_c_synth_, &gss_c_synth_};
      if (config_.postfilter_enabled) {
        r.stage_names.push_back("gss+pf");
        stages.push_back(&pf_c_synth_);
      }
      for (auto* st : stages) {
        std::vector<std::vector<std::vector<double>>> per_source(num_sources());
        for (auto& synth : *st) {
          auto out = trimmed(synth.finish(), pad_front_, length_);
          for (std::size_t m = 0; m < num_sources(); ++m) per_source[m].push_back(std::move(out[m]));
        }
        r.shadows.push_back(std::move(per_source));
      }
      r.band_target = std::move(band_target_);
      r.band_interference = std::move(band_interference_);
      r.band_noise = std::move(band_noise_);
    }
    r.cost_j1 = std::move(cost_j1_);
    r.cost_j2 = std::move(cost_j2_);
    r.rejected_updates = separator_.rejected_updates();
    r.gain_incidents = postfilter_.gains().incidents;
    if (options_.weight_diagnostics) separator_.write_weight_magnitudes_csv(*options_.weight_diagnostics);
  }

  std::vector<std::vector<BandEnergies>>& bands() { return bands_; }

  // Centre of STFT frame j in input samples.
  double frame_centre(std::size_t j) const {
    return static_cast<double>((j + 1) * config_.stft.shift) -
           static_cast<double>(config_.stft.fft_size) / 2.0;
  }

 private:
  static GssOptions separation_options(const PipelineConfig& c) {
    GssOptions o = c.gss;
    if (c.mode == SeparationMode::kDelayAndSum) o.mu = 0.0;
    return o;
  }

  AudioBuffer pad(const AudioBuffer& a, std::size_t padded) const {
    std::vector<std::vector<double>> ch(a.channels(), std::vector<double>(padded, 0.0));
    for (std::size_t c = 0; c < a.channels(); ++c) {
      const auto src = a.channel(c);
      std::copy(src.begin(), src.end(), ch[c].begin() + static_cast<std::ptrdiff_t>(pad_front_));
    }
    return AudioBuffer(kSeparationRate, std::move(ch));
  }

  const PipelineConfig& config_;
  ProcessOptions options_;
  const MixtureComponents* comps_;
  std::size_t length_;
  std::size_t pad_front_;
  std::size_t num_frames_ = 0;
  StftAnalyzer analyzer_;
  GeometricSeparator separator_;
  MultiSourcePostfilter postfilter_;
  MelFilterbank mask_bank_;
  std::vector<gss::Matrix> ds_weights_;
  AudioBuffer x_;
  std::vector<AudioBuffer> xc_;
  std::vector<OverlapAddSynthesizer> gss_synth_, pf_synth_, ds_synth_;
  std::vector<OverlapAddSynthesizer> ds_c_synth_, gss_c_synth_, pf_c_synth_;
  std::vector<std::vector<BandEnergies>> bands_;
  std::vector<std::vector<std::vector<double>>> band_target_, band_interference_, band_noise_;
  std::vector<double> cost_j1_, cost_j2_;
};

void check_components(const PipelineConfig& config, const AudioBuffer& mixture,
                      const MixtureComponents& comps) {
  if (comps.images.size() != config.sources.size()) {
    fail(ErrorKind::kStream, "reference count does not match the configured sources");
  }
  auto same_shape = [&](const AudioBuffer& a) {
    return a.rate() == mixture.rate() && a.channels() == mixture.channels() &&
           a.frames() == mixture.frames();
  };
  for (const auto& img : comps.images) {
    if (!same_shape(img)) fail(ErrorKind::kStream, "reference image shape differs from the mixture");
  }
  if (!same_shape(comps.noise)) fail(ErrorKind::kStream, "noise reference shape differs from the mixture");
}

}  // namespace

PipelineResult process_mixture(const PipelineConfig& config, const AudioBuffer& mixture,
                               const ProcessOptions& options) {
  config.validate();
  if (mixture.rate() != kSeparationRate) {
    fail(ErrorKind::kInvalidInput, "separation runs at 48 kHz; input is " +
                                       std::to_string(mixture.rate()) + " Hz");
  }
  if (mixture.channels() != config.mics.size()) {
    fail(ErrorKind::kStream, "input has " + std::to_string(mixture.channels()) +
                                 " channels, geometry has " + std::to_string(config.mics.size()));
  }
  if (mixture.frames() == 0) fail(ErrorKind::kInvalidInput, "input has no samples");
  if (options.components) check_components(config, mixture, *options.components);

  if (options.postfilter_diagnostics) {
    *options.postfilter_diagnostics << "frame,source,bin,lambda_stat,lambda_leak,xi,p,gain\n";
  }

  PipelineResult result;
  Engine engine(config, mixture, options);
  if (config.threaded) {
    engine.run_threaded();
  } else {
    engine.run_inline(result.timings);
  }
  engine.finish(result);

  if (config.features_enabled) {
    const auto t0 = Clock::now();
    const FeatureExtractor extractor(config.features);
    const std::size_t k16 = config.features.stft.fft_size;
    for (const auto& sep : result.separated) {
      const AudioBuffer low = resample_48k_to_16k(AudioBuffer(kSeparationRate, {sep}));
      if (low.frames() < k16) {
        spdlog::warn("separated output shorter than one feature frame; no features");
        result.features.emplace_back();
        continue;
      }
      result.features.push_back(extractor.extract(low));
    }
    result.timings.features_s += seconds_since(t0);
  }

  if (config.mask_enabled) {
    const auto t0 = Clock::now();
    const std::size_t frames = result.features.empty() ? 0 : result.features.front().frames.size();
    // Feature frame t is centred on 16 kHz sample shift16*t + K16/2, which is
    // three times that at 48 kHz.
    const double hop16 = static_cast<double>(config.features.stft.shift);
    const double first16 = static_cast<double>(config.features.stft.fft_size) / 2.0;
    const double first_sep = engine.frame_centre(0);
    const double hop_sep = static_cast<double>(config.stft.shift);
    result.mask_frame_map = nearest_frame_map(frames, 3.0 * first16, 3.0 * hop16,
                                              result.stft_frames, first_sep, hop_sep);
    MaskOptions static_only = config.mask;
    for (std::size_t m = 0; m < config.sources.size(); ++m) {
      const MaskMatrix full = build_mask(engine.bands()[m], static_only);
      MaskMatrix aligned;
      aligned.threshold = full.threshold;
      aligned.num_bands = full.num_bands;
      for (std::size_t j : result.mask_frame_map) aligned.rows.push_back(full.rows.at(j));
      fill_delta_masks(aligned, config.mask.delta_half_width);
      result.masks.push_back(std::move(aligned));
    }
    result.timings.mask_s += seconds_since(t0);
  }

  if (options.components) {
    result.quality = evaluate_quality(result, mixture, *options.components);
  }
  return result;
}

QualityReport evaluate_quality(const PipelineResult& result, const AudioBuffer& mixture,
                               const MixtureComponents& components, std::size_t skip) {
  QualityReport report;
  const std::size_t n = result.input_frames;
  if (skip >= n) fail(ErrorKind::kInvalidInput, "quality window is empty");
  const std::size_t len = n - skip;
  const std::size_t s = components.images.size();
  auto window = [&](std::span<const double> x) { return x.subspan(skip, len); };

  std::vector<double> input_sir(s);
  {
    std::vector<std::span<const double>> comps;
    for (const auto& img : components.images) comps.push_back(window(img.channel(0)));
    for (std::size_t i = 0; i < s; ++i) {
      input_sir[i] =
          measure_quality(window(mixture.channel(0)), comps, window(components.noise.channel(0)), i)
              .output_sir_db;
    }
  }

  for (std::size_t st = 0; st < result.stage_names.size(); ++st) {
    const auto& name = result.stage_names[st];
    const auto& outputs = name == "delay-and-sum" ? result.delay_and_sum
                          : name == "gss"         ? result.gss_output
                                                  : result.postfiltered;
    StageReport sr;
    sr.stage = name;
    for (std::size_t m = 0; m < result.source_ids.size(); ++m) {
      const auto& parts = result.shadows[st][m];
      std::vector<std::span<const double>> comps;
      for (std::size_t c = 0; c < s; ++c) comps.push_back(window(parts[c]));
      SourceQuality q = measure_quality(window(outputs[m]), comps, window(parts[s]), m);
      q.id = result.source_ids[m];
      q.input_sir_db = input_sir[m];
      sr.sources.push_back(std::move(q));
    }
    report.stages.push_back(std::move(sr));
  }
  return report;
}

void log_run_header(const PipelineConfig& c) {
  const auto& pf = c.postfilter;
  spdlog::info("gssfront: {} mics, {} sources, K={} shift={}, mode={}", c.mics.size(),
               c.sources.size(), c.stft.fft_size, c.stft.shift, to_string(c.mode));
  spdlog::info("gss: mu={} energy_floor={}", c.gss.mu, c.gss.energy_floor);
  spdlog::info(
      "postfilter: enabled={} alpha_s={} eta={} alpha={} alpha_p={} "
      "mcra(alpha_d={} power_smoothing={} L={} presence={} delta={})",
      c.postfilter_enabled, pf.spectrum_smoothing, pf.leakage, pf.alpha, pf.dd_weight,
      pf.mcra.noise_smoothing, pf.mcra.power_smoothing, pf.mcra.window_frames,
      pf.mcra.presence_smoothing, pf.mcra.onset_ratio);
  spdlog::info("prior: smoothing={} widths={}/{} ramp={}..{} dB q=[{}, {}]", pf.prior_smoothing,
               pf.local_half_width, pf.global_half_width, pf.prior_xi_min_db,
               pf.prior_xi_max_db, pf.prior_q_min, pf.prior_q_max);
  spdlog::info("features: enabled={} format={} | mask: enabled={} T={}", c.features_enabled,
               to_string(c.feature_format), c.mask_enabled, c.mask.threshold);
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  namespace fs = std::filesystem;
  config.validate();
  if (config.input_wav.empty()) fail(ErrorKind::kInvalidConfig, "no input WAV given");
  if (config.output_dir.empty()) fail(ErrorKind::kInvalidConfig, "no output directory given");

  // Everything is read and checked before the first output exists.
  const AudioBuffer mixture = read_wav(config.input_wav);
  if (mixture.channels() != config.mics.size()) {
    fail(ErrorKind::kStream, "input has " + std::to_string(mixture.channels()) +
                                 " channels, geometry has " + std::to_string(config.mics.size()));
  }
  std::optional<MixtureComponents> comps;
  if (!config.reference_dir.empty()) {
    std::vector<std::string> ids;
    for (const auto& s : config.sources) ids.push_back(s.id);
    SceneReferences refs = read_scene_references(config.reference_dir, ids);
    comps = MixtureComponents{std::move(refs.images), std::move(refs.noise)};
    check_components(config, mixture, *comps);
  }

  log_run_header(config);
  std::ostringstream pf_diag, w_diag;
  ProcessOptions opts;
  opts.components = comps ? &*comps : nullptr;
  if (config.dump_diagnostics) {
    opts.postfilter_diagnostics = &pf_diag;
    opts.weight_diagnostics = &w_diag;
    opts.record_costs = true;
  }
  PipelineResult result = process_mixture(config, mixture, opts);

  const fs::path out = config.output_dir;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create '" + out.string() + "': " + ec.message());
  {
    std::ofstream f(out / "effective_config.json");
    if (!f) fail(ErrorKind::kIo, "cannot write effective_config.json");
    f << config_to_json(config);
  }
  for (std::size_t m = 0; m < result.source_ids.size(); ++m) {
    const std::string& id = result.source_ids[m];
    write_wav(out / ("separated_" + id + ".wav"),
              AudioBuffer(kSeparationRate, {result.separated[m]}));
    auto emit = [&](const std::string& stem, auto&& save_bin, auto&& save_csv) {
      if (config.feature_format != FileFormat::kCsv) save_bin(out / (stem + ".bin"));
      if (config.feature_format != FileFormat::kBinary) save_csv(out / (stem + ".csv"));
    };
    if (config.features_enabled) {
      const auto& f = result.features[m];
      auto save = [&](const fs::path& p) { save_features(p, f); };
      emit("features_" + id, save, save);
    }
    if (config.mask_enabled) {
      const auto& mk = result.masks[m];
      auto save = [&](const fs::path& p) { save_mask(p, mk); };
      emit("mask_" + id, save, save);
    }
  }
  if (result.quality) {
    std::ofstream f(out / "quality.csv");
    if (!f) fail(ErrorKind::kIo, "cannot write quality.csv");
    write_quality_csv(f, *result.quality);
  }
  if (config.dump_diagnostics) {
    fs::create_directories(out / "diagnostics", ec);
    if (ec) fail(ErrorKind::kIo, "cannot create diagnostics directory");
    std::ofstream(out / "diagnostics" / "postfilter.csv") << pf_diag.str();
    std::ofstream(out / "diagnostics" / "weights.csv") << w_diag.str();
    std::ofstream costs(out / "diagnostics" / "costs.csv");
    costs << "frame,j1,j2\n";
    for (std::size_t t = 0; t < result.cost_j1.size(); ++t) {
      costs << t << ',' << result.cost_j1[t] << ',' << result.cost_j2[t] << '\n';
    }
  }
  return result;
}

}  // namespace gssfront
