// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/gmm.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "byte_io.hpp"
#include "gssfront/error.hpp"

namespace gssfront {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

}  // namespace

double log_sum_exp(std::vector<double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  std::sort(v.begin(), v.end());
  const double hi = v.back();
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

GmmModel::GmmModel(std::vector<double> priors, std::vector<std::vector<double>> means,
                   std::vector<std::vector<double>> variances)
    : priors_(std::move(priors)),
      means_(std::move(means)),
      variances_(std::move(variances)) {
  const std::size_t m = priors_.size();
  if (m == 0 || means_.size() != m || variances_.size() != m) {
    fail(ErrorKind::kInvalidInput, "mixture needs matching priors, means and variances");
  }
  dims_ = means_.front().size();
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (!(priors_[j] >= 0.0) || !std::isfinite(priors_[j])) {
      fail(ErrorKind::kInvalidInput, "mixture prior must be finite and >= 0");
    }
    if (means_[j].size() != dims_ || variances_[j].size() != dims_) {
      fail(ErrorKind::kInvalidInput, "mixture component dimension mismatch");
    }
    for (double v : variances_[j]) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        fail(ErrorKind::kInvalidInput, "mixture variances must be positive");
      }
    }
    total += priors_[j];
  }
  if (!(total > 0.0)) fail(ErrorKind::kInvalidInput, "mixture priors sum to zero");
  for (double& p : priors_) p /= total;

  log_priors_.resize(m);
  log_norm_.assign(m, std::vector<double>(dims_));
  inv_var_.assign(m, std::vector<double>(dims_));
  for (std::size_t j = 0; j < m; ++j) {
    log_priors_[j] = std::log(priors_[j]);
    for (std::size_t d = 0; d < dims_; ++d) {
      log_norm_[j][d] = -0.5 * (kLog2Pi + std::log(variances_[j][d]));
      inv_var_[j][d] = 1.0 / variances_[j][d];
    }
  }
}

void GmmModel::check(std::span<const double> x) const {
  if (x.size() != dims_) {
    fail(ErrorKind::kInvalidInput, "feature has " + std::to_string(x.size()) +
                                       " dims, model expects " + std::to_string(dims_));
  }
}

double GmmModel::log_likelihood(std::span<const double> x) const {
  return marginal_log_likelihood(x, full_mask(dims_));
}

double GmmModel::marginal_log_likelihood(std::span<const double> x,
                                         std::span<const std::uint8_t> mask) const {
  check(x);
  if (mask.size() != dims_) fail(ErrorKind::kInvalidInput, "mask width mismatch");
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t b) { return b != 0; })) {
    return 0.0;
  }
  std::vector<double> terms(num_components());
  for (std::size_t j = 0; j < num_components(); ++j) {
    terms[j] = component_log_term(j, x, mask);
  }
  return log_sum_exp(std::move(terms));
}

double GmmModel::component_log_term(std::size_t j, std::span<const double> x,
                                    std::span<const std::uint8_t> mask) const {
  double acc = log_priors_.at(j);
  const auto& mu = means_[j];
  const auto& ln = log_norm_[j];
  const auto& iv = inv_var_[j];
  for (std::size_t d = 0; d < dims_; ++d) {
    if (!mask[d]) continue;
    const double e = x[d] - mu[d];
    acc += ln[d] - 0.5 * e * e * iv[d];
  }
  return acc;
}

void GmmTrainOptions::validate() const {
  if (components == 0) fail(ErrorKind::kInvalidConfig, "mixture needs >= 1 component");
  if (!(variance_floor > 0.0)) fail(ErrorKind::kInvalidConfig, "variance floor must be positive");
  if (!(tolerance > 0.0)) fail(ErrorKind::kInvalidConfig, "EM tolerance must be positive");
  if (max_iterations == 0) fail(ErrorKind::kInvalidConfig, "EM needs >= 1 iteration");
}

namespace {

using Frames = std::span<const std::vector<double>>;

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double e = a[d] - b[d];
    s += e * e;
  }
  return s;
}

void moments(Frames x, std::vector<double>& mean, std::vector<double>& var) {
  const std::size_t dims = x.front().size();
  mean.assign(dims, 0.0);
  var.assign(dims, 0.0);
  for (const auto& f : x) {
    for (std::size_t d = 0; d < dims; ++d) mean[d] += f[d];
  }
  for (double& v : mean) v /= static_cast<double>(x.size());
  for (const auto& f : x) {
    for (std::size_t d = 0; d < dims; ++d) {
      const double e = f[d] - mean[d];
      var[d] += e * e;
    }
  }
  for (double& v : var) v /= static_cast<double>(x.size());
}

// k-means++ picks; may return fewer centres than asked when the data has
// fewer distinct points.
std::vector<std::vector<double>> seed_centres(Frames x, std::size_t k,
                                              std::mt19937_64& rng) {
  std::vector<std::vector<double>> centres;
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  centres.push_back(x[pick(rng)]);
  std::vector<double> d2(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d2[i] = sq_dist(x[i], centres[0]);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  while (centres.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0)) break;
    const double target = unif(rng) * total;
    double run = 0.0;
    std::size_t chosen = x.size() - 1;
    for (std::size_t i = 0; i < x.size(); ++i) {
      run += d2[i];
      if (run >= target && d2[i] > 0.0) {
        chosen = i;
        break;
      }
    }
    centres.push_back(x[chosen]);
    for (std::size_t i = 0; i < x.size(); ++i) {
      d2[i] = std::min(d2[i], sq_dist(x[i], centres.back()));
    }
  }
  return centres;
}

std::vector<std::size_t> assign(Frames x, const std::vector<std::vector<double>>& c) {
  std::vector<std::size_t> a(x.size(), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c.size(); ++j) {
      const double d = sq_dist(x[i], c[j]);
      if (d < best) {
        best = d;
        a[i] = j;
      }
    }
  }
  return a;
}

}  // namespace

GmmModel train_gmm(Frames frames, const GmmTrainOptions& options) {
  options.validate();
  if (frames.empty()) fail(ErrorKind::kInvalidInput, "no training frames");
  const std::size_t dims = frames.front().size();
  for (const auto& f : frames) {
    if (f.size() != dims) fail(ErrorKind::kInvalidInput, "training frames differ in width");
  }
  if (frames.size() < 10 * options.components) {
    fail(ErrorKind::kInvalidInput,
         "need >= " + std::to_string(10 * options.components) +
             " training frames, got " + std::to_string(frames.size()));
  }
  const double floor = options.variance_floor;
  const auto n = static_cast<double>(frames.size());

  std::vector<double> gmean, gvar;
  moments(frames, gmean, gvar);
  const bool spread = std::any_of(gvar.begin(), gvar.end(), [&](double v) { return v > floor; });
  if (!spread || options.components == 1) {
    if (!spread && options.components > 1) {
      spdlog::warn("training class has no spread; using a single component");
    }
    for (double& v : gvar) v = std::max(v, floor);
    return GmmModel({1.0}, {gmean}, {gvar});
  }

  std::mt19937_64 rng(options.seed);
  auto centres = seed_centres(frames, options.components, rng);
  if (centres.size() < options.components) {
    spdlog::warn("only {} distinct training points; reducing components", centres.size());
  }
  const std::size_t m = centres.size();
  std::vector<std::size_t> labels = assign(frames, centres);
  for (std::size_t it = 0; it < options.kmeans_iterations; ++it) {
    std::vector<std::vector<double>> sum(m, std::vector<double>(dims, 0.0));
    std::vector<std::size_t> count(m, 0);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      ++count[labels[i]];
      for (std::size_t d = 0; d < dims; ++d) sum[labels[i]][d] += frames[i][d];
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (count[j] == 0) continue;  // keep an empty cluster's centre
      for (std::size_t d = 0; d < dims; ++d) {
        centres[j][d] = sum[j][d] / static_cast<double>(count[j]);
      }
    }
    auto next = assign(frames, centres);
    if (next == labels) break;
    labels = std::move(next);
  }

  // EM from the hard partition.
  std::vector<double> w(m, 0.0);
  std::vector<std::vector<double>> mu = centres;
  std::vector<std::vector<double>> var(m, gvar);
  {
    std::vector<std::vector<double>> acc(m, std::vector<double>(dims, 0.0));
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const std::size_t j = labels[i];
      w[j] += 1.0;
      for (std::size_t d = 0; d < dims; ++d) {
        const double e = frames[i][d] - mu[j][d];
        acc[j][d] += e * e;
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (w[j] >= 2.0) {
        for (std::size_t d = 0; d < dims; ++d) var[j][d] = acc[j][d] / w[j];
      }
      for (double& v : var[j]) v = std::max(v, floor);
      w[j] = std::max(w[j], 1.0) / n;
    }
  }

  GmmModel model(w, mu, var);
  double previous = -std::numeric_limits<double>::infinity();
  std::vector<double> resp(m);
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    std::vector<double> nk(m, 0.0);
    std::vector<std::vector<double>> s1(m, std::vector<double>(dims, 0.0));
    std::vector<std::vector<double>> s2(m, std::vector<double>(dims, 0.0));
    double total_ll = 0.0;
    const auto mask = full_mask(dims);
    for (const auto& x : frames) {
      for (std::size_t j = 0; j < m; ++j) {
        resp[j] = model.component_log_term(j, x, mask);
      }
      const double ll = log_sum_exp(resp);
      total_ll += ll;
      for (std::size_t j = 0; j < m; ++j) {
        const double r = std::exp(resp[j] - ll);
        nk[j] += r;
        for (std::size_t d = 0; d < dims; ++d) {
          s1[j][d] += r * x[d];
          s2[j][d] += r * x[d] * x[d];
        }
      }
    }
    const double avg = total_ll / n;
    if (avg - previous < options.tolerance) break;
    previous = avg;

    for (std::size_t j = 0; j < m; ++j) {
      if (nk[j] < 1e-8) {
        w[j] = 1e-8;
        continue;  // starved component keeps its parameters
      }
      w[j] = nk[j] / n;
      for (std::size_t d = 0; d < dims; ++d) {
        const double mean = s1[j][d] / nk[j];
        mu[j][d] = mean;
        var[j][d] = std::max(s2[j][d] / nk[j] - mean * mean, floor);
      }
    }
    model = GmmModel(w, mu, var);
  }
  return model;
}

std::vector<std::uint8_t> feature_mask(const MaskRow& row) {
  std::vector<std::uint8_t> bits(row.reliable.begin(), row.reliable.end());
  bits.insert(bits.end(), row.delta_reliable.begin(), row.delta_reliable.end());
  return bits;
}

std::vector<std::uint8_t> full_mask(std::size_t dims) {
  return std::vector<std::uint8_t>(dims, 1);
}

void LabeledFeatureSet::add(const FeatureStream& stream, std::size_t label,
                            const MaskMatrix* mask) {
  if (mask && mask->rows.size() != stream.frames.size()) {
    fail(ErrorKind::kInvalidInput, "mask and feature frame counts differ");
  }
  for (std::size_t t = 0; t < stream.frames.size(); ++t) {
    features.push_back(stream.frames[t].concatenated());
    labels.push_back(label);
    if (mask) masks.push_back(feature_mask(mask->rows[t]));
  }
}

void LabeledFeatureSet::validate() const {
  if (labels.size() != features.size()) {
    fail(ErrorKind::kInvalidInput, "labels and features differ in count");
  }
  if (!masks.empty() && masks.size() != features.size()) {
    fail(ErrorKind::kInvalidInput, "masks and features differ in count");
  }
  const std::size_t dims = features.empty() ? 0 : features.front().size();
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != dims) fail(ErrorKind::kInvalidInput, "feature width mismatch");
    if (!masks.empty() && masks[i].size() != dims) {
      fail(ErrorKind::kInvalidInput, "feature and mask dimensions disagree");
    }
    if (labels[i] >= class_names.size()) fail(ErrorKind::kInvalidInput, "label out of range");
  }
}

GmmClassifier train_classifier(const LabeledFeatureSet& data,
                               const GmmTrainOptions& options) {
  data.validate();
  GmmClassifier out;
  out.class_names = data.class_names;
  for (std::size_t c = 0; c < data.class_names.size(); ++c) {
    std::vector<std::vector<double>> frames;
    for (std::size_t i = 0; i < data.features.size(); ++i) {
      if (data.labels[i] == c) frames.push_back(data.features[i]);
    }
    if (frames.empty()) {
      fail(ErrorKind::kInvalidInput, "class '" + data.class_names[c] + "' has no frames");
    }
    GmmTrainOptions per_class = options;
    per_class.seed = options.seed + c;
    out.models.push_back(train_gmm(frames, per_class));
  }
  return out;
}

ClassScores classify(std::span<const GmmModel> models,
                     std::span<const std::vector<double>> frames,
                     std::span<const std::vector<std::uint8_t>> masks) {
  if (models.empty()) fail(ErrorKind::kInvalidInput, "no models to classify against");
  if (frames.empty()) fail(ErrorKind::kInvalidInput, "classification needs >= 1 frame");
  if (!masks.empty() && masks.size() != frames.size()) {
    fail(ErrorKind::kInvalidInput, "masks and frames differ in count");
  }
  ClassScores out;
  out.scores.assign(models.size(), 0.0);
  const auto ones = full_mask(models.front().dims());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& mask = masks.empty() ? ones : masks[t];
    for (std::size_t c = 0; c < models.size(); ++c) {
      out.scores[c] += models[c].marginal_log_likelihood(frames[t], mask);
    }
  }
  out.best = static_cast<std::size_t>(
      std::max_element(out.scores.begin(), out.scores.end()) - out.scores.begin());
  return out;
}

ClassScores classify(const GmmClassifier& classifier,
                     std::span<const std::vector<double>> frames,
                     std::span<const std::vector<std::uint8_t>> masks) {
  return classify(classifier.models, frames, masks);
}

void write_classifier(std::ostream& out, const GmmClassifier& c) {
  out << "gssfront-gmm 1\n";
  out << "classes " << c.models.size() << '\n';
  out << "dims " << c.dims() << '\n';
  for (std::size_t i = 0; i < c.models.size(); ++i) {
    const std::string& name = c.class_names.at(i);
    if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
      fail(ErrorKind::kInvalidInput, "class names must be non-empty without whitespace");
    }
    out << "class " << name << ' ' << c.models[i].num_components() << '\n';
  }
  out << "end\n";
  detail::LeWriter w;
  for (const auto& m : c.models) {
    for (std::size_t j = 0; j < m.num_components(); ++j) {
      w.f64(m.prior(j));
      for (double v : m.mean(j)) w.f64(v);
      for (double v : m.variance(j)) w.f64(v);
    }
  }
  out.write(reinterpret_cast<const char*>(w.data().data()),
            static_cast<std::streamsize>(w.data().size()));
}

GmmClassifier read_classifier(std::istream& in) {
  auto expect_line = [&](std::istringstream& ss, const char* what) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::kInvalidInput, std::string("model file: missing ") + what);
    ss = std::istringstream(line);
    std::string key;
    ss >> key;
    if (key != what) fail(ErrorKind::kInvalidInput, std::string("model file: expected ") + what);
  };
  std::istringstream ss;
  expect_line(ss, "gssfront-gmm");
  int version = 0;
  ss >> version;
  if (version != 1) fail(ErrorKind::kInvalidInput, "model file: unsupported version");
  std::size_t classes = 0, dims = 0;
  expect_line(ss, "classes");
  ss >> classes;
  expect_line(ss, "dims");
  ss >> dims;
  GmmClassifier out;
  std::vector<std::size_t> comps(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    expect_line(ss, "class");
    std::string name;
    ss >> name >> comps[c];
    if (!ss || comps[c] == 0) fail(ErrorKind::kInvalidInput, "model file: bad class line");
    out.class_names.push_back(name);
  }
  expect_line(ss, "end");
  std::vector<std::uint8_t> rest((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  detail::LeReader r(rest);
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<double> priors(comps[c]);
    std::vector<std::vector<double>> mu(comps[c], std::vector<double>(dims));
    std::vector<std::vector<double>> var(comps[c], std::vector<double>(dims));
    for (std::size_t j = 0; j < comps[c]; ++j) {
      priors[j] = r.f64();
      for (double& v : mu[j]) v = r.f64();
      for (double& v : var[j]) v = r.f64();
    }
    out.models.emplace_back(std::move(priors), std::move(mu), std::move(var));
  }
  if (!r.at_end()) fail(ErrorKind::kInvalidInput, "model file: trailing bytes");
  return out;
}

void save_classifier(const std::filesystem::path& path, const GmmClassifier& c) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot create '" + path.string() + "'");
  write_classifier(out, c);
  if (!out) fail(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

GmmClassifier load_classifier(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  return read_classifier(in);
}

}  // namespace gssfront
