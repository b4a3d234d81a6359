// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Diagonal-covariance Gaussian mixtures scored over the reliable dimensions
// of a missing-feature mask, plus a frame-level classifier built on them.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gssfront/features.hpp"
#include "gssfront/mask.hpp"

namespace gssfront {

class GmmModel {
 public:
  GmmModel() = default;
  // Priors are renormalised; variances must be positive.
  GmmModel(std::vector<double> priors, std::vector<std::vector<double>> means,
           std::vector<std::vector<double>> variances);

  std::size_t num_components() const noexcept { return priors_.size(); }
  std::size_t dims() const noexcept { return dims_; }
  double prior(std::size_t j) const { return priors_.at(j); }
  const std::vector<double>& mean(std::size_t j) const { return means_.at(j); }
  const std::vector<double>& variance(std::size_t j) const { return variances_.at(j); }

  double log_likelihood(std::span<const double> x) const;
  // log sum_j P(j) prod_{d : mask[d] != 0} N(x_d; mu_jd, var_jd).
  // An empty mask gives exactly 0.
  double marginal_log_likelihood(std::span<const double> x,
                                 std::span<const std::uint8_t> mask) const;
  // log P(j) + log density of component j over the masked dims.
  double component_log_term(std::size_t j, std::span<const double> x,
                            std::span<const std::uint8_t> mask) const;

  friend bool operator==(const GmmModel&, const GmmModel&) = default;

 private:
  void check(std::span<const double> x) const;

  std::size_t dims_ = 0;
  std::vector<double> priors_;
  std::vector<std::vector<double>> means_;
  std::vector<std::vector<double>> variances_;
  // Cached per component: log prior, per-dim log normaliser, per-dim 1/var.
  std::vector<double> log_priors_;
  std::vector<std::vector<double>> log_norm_;
  std::vector<std::vector<double>> inv_var_;
};

// log(sum exp(v)) with the terms summed in sorted order, so the result does
// not depend on the order of v.
double log_sum_exp(std::vector<double> v);

struct GmmTrainOptions {
  std::size_t components = 4;
  std::uint64_t seed = 1;
  double variance_floor = 1e-4;
  double tolerance = 1e-5;  // average log-likelihood gain per frame
  std::size_t max_iterations = 200;
  std::size_t kmeans_iterations = 25;

  void validate() const;
};

// k-means++ seeding, Lloyd refinement, then EM. Needs >= 10 frames per
// component. A class without spread falls back to a single component.
GmmModel train_gmm(std::span<const std::vector<double>> frames,
                   const GmmTrainOptions& options);

struct LabeledFeatureSet {
  std::vector<std::string> class_names;
  std::vector<std::vector<double>> features;  // statics then deltas
  std::vector<std::size_t> labels;
  std::vector<std::vector<std::uint8_t>> masks;  // optional, same widths

  void add(const FeatureStream& stream, std::size_t label,
           const MaskMatrix* mask = nullptr);
  void validate() const;
};

// Static bits then delta bits, matching FeatureVector::concatenated().
std::vector<std::uint8_t> feature_mask(const MaskRow& row);
std::vector<std::uint8_t> full_mask(std::size_t dims);

struct GmmClassifier {
  std::vector<std::string> class_names;
  std::vector<GmmModel> models;

  std::size_t dims() const { return models.empty() ? 0 : models.front().dims(); }
};

// One model per class, trained only on that class's frames.
GmmClassifier train_classifier(const LabeledFeatureSet& data,
                               const GmmTrainOptions& options);

struct ClassScores {
  std::size_t best = 0;
  std::vector<double> scores;  // summed per-frame marginal log-likelihoods
};

ClassScores classify(std::span<const GmmModel> models,
                     std::span<const std::vector<double>> frames,
                     std::span<const std::vector<std::uint8_t>> masks);
ClassScores classify(const GmmClassifier& classifier,
                     std::span<const std::vector<double>> frames,
                     std::span<const std::vector<std::uint8_t>> masks);

// Model file: a text header
//   gssfront-gmm 1
//   classes <C>
//   dims <D>
//   class <name> <components>     (C lines)
//   end
// followed by, per class and component, f64 prior, D f64 means, D f64
// variances, little-endian.
void write_classifier(std::ostream& out, const GmmClassifier& classifier);
GmmClassifier read_classifier(std::istream& in);
void save_classifier(const std::filesystem::path& path, const GmmClassifier& c);
GmmClassifier load_classifier(const std::filesystem::path& path);

}  // namespace gssfront
