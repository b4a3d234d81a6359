// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// gssfront command-line tool: separate, features, score, simulate, bench.

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gssfront/config.hpp"
#include "gssfront/error.hpp"
#include "gssfront/feature_io.hpp"
#include "gssfront/features.hpp"
#include "gssfront/gmm.hpp"
#include "gssfront/pipeline.hpp"
#include "gssfront/resample.hpp"
#include "gssfront/scene.hpp"
#include "gssfront/wav.hpp"

namespace fs = std::filesystem;
using namespace gssfront;

namespace {

// Distinct exit status per failure class.
enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kConfigParseExit = 3,
  kInvalidConfigExit = 4,
  kIoExit = 5,
  kShapeExit = 6,
  kInvalidInputExit = 7,
  kOverDeterminedExit = 8,
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfigParse: return kConfigParseExit;
    case ErrorKind::kInvalidConfig: return kInvalidConfigExit;
    case ErrorKind::kIo: return kIoExit;
    case ErrorKind::kStream: return kShapeExit;
    case ErrorKind::kInvalidInput: return kInvalidInputExit;
    case ErrorKind::kOverDetermined: return kOverDeterminedExit;
  }
  return kInternal;
}

// Command-line mirrors of PipelineConfig fields; unset ones leave the
// config untouched.
struct Overrides {
  std::string config_file;
  std::string preset;
  std::string input, output_dir, reference_dir;
  std::vector<std::string> sources;  // id:azimuth_deg[:elevation_deg]
  std::optional<double> mu, eta, alpha, alpha_p, alpha_s, threshold;
  std::optional<std::size_t> fft_size, shift, queue_capacity;
  std::string mode, format;
  bool no_postfilter = false, no_features = false, no_mask = false;
  bool threaded = false, dump_diagnostics = false, print_config = false;

  void attach(CLI::App& app, bool io) {
    app.add_option("--config", config_file, "pipeline config (JSON)");
    app.add_option("--preset", preset, "scene preset providing geometry and sources");
    if (io) {
      app.add_option("-i,--input", input, "multichannel 48 kHz WAV");
      app.add_option("-o,--output-dir", output_dir, "output directory");
      app.add_option("--reference-dir", reference_dir,
                     "scene directory with ref_<id>.wav and noise.wav");
    }
    app.add_option("--source", sources, "id:azimuth_deg[:elevation_deg], repeatable");
    app.add_option("--mu", mu, "separation adaptation rate");
    app.add_option("--eta", eta, "leakage power ratio");
    app.add_option("--alpha", alpha, "gain exponent");
    app.add_option("--alpha-p", alpha_p, "decision-directed weight");
    app.add_option("--alpha-s", alpha_s, "output spectrum smoothing");
    app.add_option("--threshold", threshold, "mask threshold T");
    app.add_option("--fft-size", fft_size, "separation FFT size");
    app.add_option("--shift", shift, "separation frame shift");
    app.add_option("--mode", mode, "gss or delay_and_sum");
    app.add_option("--format", format, "feature/mask files: binary, csv or both");
    app.add_flag("--no-postfilter", no_postfilter, "GSS output only");
    app.add_flag("--no-features", no_features, "skip features and masks");
    app.add_flag("--no-mask", no_mask, "skip the missing-feature mask");
    app.add_flag("--threaded", threaded, "one worker thread per stage");
    app.add_option("--queue-capacity", queue_capacity, "frames buffered between stages");
    app.add_flag("--dump-diagnostics", dump_diagnostics, "write post-filter and GSS CSV dumps");
    app.add_flag("--print-config", print_config, "print the effective config and exit");
  }

  PipelineConfig build() const {
    PipelineConfig c;
    if (!config_file.empty()) c = load_config(config_file, false);
    if (!preset.empty()) apply_preset(c, preset);
    if (!sources.empty()) {
      c.sources.clear();
      for (const auto& s : sources) {
        std::vector<std::string> parts;
        std::stringstream ss(s);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() < 2 || parts.size() > 3) {
          fail(ErrorKind::kConfigParse, "--source expects id:azimuth_deg[:elevation_deg]");
        }
        try {
          c.sources.push_back({parts[0], std::stod(parts[1]),
                               parts.size() == 3 ? std::stod(parts[2]) : 0.0});
        } catch (const std::exception&) {
          fail(ErrorKind::kConfigParse, "bad angle in --source '" + s + "'");
        }
      }
    }
    if (!input.empty()) c.input_wav = input;
    if (!output_dir.empty()) c.output_dir = output_dir;
    if (!reference_dir.empty()) c.reference_dir = reference_dir;
    if (mu) c.gss.mu = *mu;
    if (eta) c.postfilter.leakage = *eta;
    if (alpha) c.postfilter.alpha = *alpha;
    if (alpha_p) c.postfilter.dd_weight = *alpha_p;
    if (alpha_s) c.postfilter.spectrum_smoothing = *alpha_s;
    if (threshold) c.mask.threshold = *threshold;
    if (fft_size) c.stft.fft_size = *fft_size;
    if (shift) c.stft.shift = *shift;
    if (queue_capacity) c.queue_capacity = *queue_capacity;
    if (mode == "gss") {
      c.mode = SeparationMode::kGss;
    } else if (mode == "delay_and_sum") {
      c.mode = SeparationMode::kDelayAndSum;
    } else if (!mode.empty()) {
      fail(ErrorKind::kConfigParse, "--mode must be gss or delay_and_sum");
    }
    if (format == "binary") {
      c.feature_format = FileFormat::kBinary;
    } else if (format == "csv") {
      c.feature_format = FileFormat::kCsv;
    } else if (format == "both") {
      c.feature_format = FileFormat::kBoth;
    } else if (!format.empty()) {
      fail(ErrorKind::kConfigParse, "--format must be binary, csv or both");
    }
    if (no_postfilter) {
      c.postfilter_enabled = false;
      c.mask_enabled = false;
    }
    if (no_features) {
      c.features_enabled = false;
      c.mask_enabled = false;
    }
    if (no_mask) c.mask_enabled = false;
    if (threaded) c.threaded = true;
    if (dump_diagnostics) c.dump_diagnostics = true;
    c.validate();
    return c;
  }
};

int cmd_separate(const Overrides& ov) {
  const PipelineConfig c = ov.build();
  if (ov.print_config) {
    std::cout << config_to_json(c);
    return kOk;
  }
  const PipelineResult r = run_pipeline(c);
  if (r.quality) {
    for (const auto& st : r.quality->stages) {
      std::printf("%-14s mean SIR %7.2f dB\n", st.stage.c_str(),
                  r.quality->mean_output_sir(st.stage));
    }
  }
  if (r.rejected_updates) spdlog::warn("{} separator updates rejected", r.rejected_updates);
  if (r.gain_incidents) spdlog::warn("{} non-finite gain evaluations clamped", r.gain_incidents);
  return kOk;
}

struct FeaturesArgs {
  std::string input, output, mask_out;
  std::string format = "binary";
};

int cmd_features(const FeaturesArgs& a) {
  AudioBuffer audio = read_wav(a.input);
  if (audio.channels() != 1) fail(ErrorKind::kStream, "features expect a mono WAV");
  if (audio.rate() == kSeparationRate) audio = resample_48k_to_16k(audio);
  const FeatureStream fs = extract_features(audio);
  if (!fs.deltas_available) spdlog::warn("utterance too short for delta features");
  save_features(a.output, fs);
  std::printf("%zu frames -> %s\n", fs.frames.size(), a.output.c_str());
  return kOk;
}

struct ScoreArgs {
  std::string data, model, features, mask;
  std::size_t components = 4;
  std::uint64_t seed = 1;
};

// Training list: one "label,features_file[,mask_file]" line per utterance.
int cmd_train(const ScoreArgs& a) {
  std::ifstream in(a.data);
  if (!in) fail(ErrorKind::kIo, "cannot open training list '" + a.data + "'");
  LabeledFeatureSet set;
  const fs::path base = fs::path(a.data).parent_path();
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() < 2) fail(ErrorKind::kInvalidInput, "training list line needs label,features");
    auto it = std::find(set.class_names.begin(), set.class_names.end(), cells[0]);
    const std::size_t label = static_cast<std::size_t>(it - set.class_names.begin());
    if (it == set.class_names.end()) set.class_names.push_back(cells[0]);
    fs::path fp = cells[1];
    if (fp.is_relative()) fp = base / fp;
    set.add(load_features(fp), label);
  }
  GmmTrainOptions opt;
  opt.components = a.components;
  opt.seed = a.seed;
  const GmmClassifier clf = train_classifier(set, opt);
  save_classifier(a.model, clf);
  std::printf("%zu classes, %zu frames -> %s\n", clf.models.size(), set.features.size(),
              a.model.c_str());
  return kOk;
}

int cmd_classify(const ScoreArgs& a) {
  const GmmClassifier clf = load_classifier(a.model);
  const FeatureStream fs = load_features(a.features);
  std::vector<std::vector<double>> frames;
  for (const auto& f : fs.frames) frames.push_back(f.concatenated());
  std::vector<std::vector<std::uint8_t>> masks;
  if (!a.mask.empty()) {
    const MaskMatrix m = load_mask(a.mask);
    if (m.rows.size() != frames.size()) fail(ErrorKind::kStream, "mask and features differ in length");
    for (const auto& row : m.rows) masks.push_back(feature_mask(row));
  }
  const ClassScores s = classify(clf, frames, masks);
  std::printf("class %s\n", clf.class_names[s.best].c_str());
  for (std::size_t c = 0; c < s.scores.size(); ++c) {
    std::printf("%s,%.10g\n", clf.class_names[c].c_str(), s.scores[c]);
  }
  return kOk;
}

struct SimulateArgs {
  std::string preset, scene, output_dir;
  bool list = false, sweep = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
};

int cmd_simulate(const SimulateArgs& a) {
  if (a.list) {
    for (const auto& n : preset_names()) std::printf("%s\n", n.c_str());
    return kOk;
  }
  if (a.output_dir.empty()) fail(ErrorKind::kInvalidConfig, "--output-dir is required");
  auto tune = [&](SceneSpec s) {
    if (a.seed) s.seed = *a.seed;
    if (a.duration) s.duration_s = *a.duration;
    return s;
  };
  std::vector<SceneSpec> specs;
  if (a.sweep) {
    for (const auto& n : preset_names()) specs.push_back(tune(preset(n)));
  } else if (!a.scene.empty()) {
    specs.push_back(tune(load_scene_file(a.scene)));
  } else if (!a.preset.empty()) {
    specs.push_back(tune(preset(a.preset)));
  } else {
    fail(ErrorKind::kInvalidConfig, "give --preset, --scene, --sweep or --list");
  }
  for (const auto& s : specs) s.validate();
  for (const auto& s : specs) {
    const fs::path dir = a.sweep ? fs::path(a.output_dir) / s.name : fs::path(a.output_dir);
    write_scene(dir, s, synthesize(s));
    std::printf("%s -> %s\n", s.name.c_str(), dir.string().c_str());
  }
  return kOk;
}

struct BenchArgs {
  std::string preset = "fig4-90deg";
  double duration = 10.0;
  bool threaded = false;
};

int cmd_bench(const BenchArgs& a) {
  if (!(a.duration > 0.0)) {
    std::printf("audio_s,wall_s,rtf\n");  // nothing to time
    return kOk;
  }
  SceneSpec spec = preset(a.preset);
  spec.duration_s = a.duration;
  const SceneAudio scene = synthesize(spec);
  PipelineConfig c;
  apply_preset(c, a.preset);
  c.threaded = a.threaded;
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineResult r = process_mixture(c, scene.mixture);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double audio = scene.mixture.duration_seconds();
  const auto& t = r.timings;
  const double core = t.separation_s + t.postfilter_s + t.mask_s;
  std::printf("audio_s,wall_s,rtf,gss_pf_mask_rtf,analysis_s,gss_s,pf_s,mask_s,synthesis_s,features_s\n");
  std::printf("%.3f,%.3f,%.4f,%.4f,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f\n", audio, wall, wall / audio,
              (t.analysis_s + core) / audio, t.analysis_s, t.separation_s, t.postfilter_s,
              t.mask_s, t.synthesis_s, t.features_s);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gssfront: microphone-array separation front-end for missing-feature ASR"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

  Overrides sep;
  auto* separate = app.add_subcommand("separate", "run GSS, post-filter, features and masks");
  sep.attach(*separate, true);

  FeaturesArgs fa;
  auto* features = app.add_subcommand("features", "log-mel features of a mono WAV");
  features->add_option("-i,--input", fa.input, "mono WAV at 16 or 48 kHz")->required();
  features->add_option("-o,--output", fa.output, "output file (.csv or binary)")->required();

  ScoreArgs sa;
  auto* score = app.add_subcommand("score", "train and apply the missing-feature GMM classifier");
  score->require_subcommand(1);
  auto* train = score->add_subcommand("train", "train one GMM per class on clean features");
  train->add_option("--data", sa.data, "list of label,features_file lines")->required();
  train->add_option("--model", sa.model, "output model file")->required();
  train->add_option("--components", sa.components, "mixture components per class");
  train->add_option("--seed", sa.seed, "k-means seed");
  auto* cls = score->add_subcommand("classify", "score one utterance");
  cls->add_option("--model", sa.model, "model file")->required();
  cls->add_option("--features", sa.features, "feature file")->required();
  cls->add_option("--mask", sa.mask, "mask file; all dimensions reliable when absent");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "synthesize array scenes");
  simulate->add_option("--preset", sim.preset, "preset name (see --list)");
  simulate->add_option("--scene", sim.scene, "scene file (JSON)");
  simulate->add_option("-o,--output-dir", sim.output_dir, "output directory");
  simulate->add_option("--seed", sim.seed, "override the scene seed");
  simulate->add_option("--duration", sim.duration, "override the duration in seconds");
  simulate->add_flag("--list", sim.list, "list presets");
  simulate->add_flag("--sweep", sim.sweep, "every fig4 preset, one subdirectory each");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "real-time factor of the front-end");
  bench->add_option("--preset", ba.preset, "scene preset");
  bench->add_option("--duration", ba.duration, "audio seconds");
  bench->add_flag("--threaded", ba.threaded, "one worker thread per stage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*separate) return cmd_separate(sep);
    if (*features) return cmd_features(fa);
    if (*train) return cmd_train(sa);
    if (*cls) return cmd_classify(sa);
    if (*simulate) return cmd_simulate(sim);
    if (*bench) return cmd_bench(ba);
  } catch (const Error& e) {
    std::fprintf(stderr, "gssfront: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gssfront: %s\n", e.what());
    return kInternal;
  }
  return kUsage;
}
