// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/quality.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "gssfront/error.hpp"

namespace gssfront {

double power_ratio_db(double num, double den) {
  if (!(num > 0.0)) return -kMetricCapDb;
  if (!(den > 0.0)) return kMetricCapDb;
  return std::clamp(10.0 * std::log10(num / den), -kMetricCapDb, kMetricCapDb);
}

Projection project(std::span<const double> output,
                   const std::vector<std::span<const double>>& components,
                   std::span<const double> noise, std::size_t target) {
  const std::size_t n = output.size();
  const std::size_t s = components.size();
  if (target >= s) fail(ErrorKind::kInvalidInput, "target component out of range");
  for (const auto& c : components) {
    if (c.size() != n) fail(ErrorKind::kInvalidInput, "component length differs from output");
  }
  const bool with_noise = !noise.empty();
  if (with_noise && noise.size() != n) {
    fail(ErrorKind::kInvalidInput, "noise length differs from output");
  }
  const std::size_t p = s + (with_noise ? 1 : 0);
  auto column = [&](std::size_t i) { return i < s ? components[i] : noise; };

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                               static_cast<Eigen::Index>(p));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (std::size_t a = 0; a < p; ++a) {
    const auto ca = column(a);
    double r = 0.0;
    for (std::size_t t = 0; t < n; ++t) r += ca[t] * output[t];
    rhs(static_cast<Eigen::Index>(a)) = r;
    for (std::size_t b = a; b < p; ++b) {
      const auto cb = column(b);
      double g = 0.0;
      for (std::size_t t = 0; t < n; ++t) g += ca[t] * cb[t];
      gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = g;
      gram(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = g;
    }
  }
  // Silent components get a zero coefficient rather than a singular solve.
  Eigen::VectorXd coef = gram.completeOrthogonalDecomposition().solve(rhs);

  Projection out;
  out.coefficients.assign(coef.data(), coef.data() + coef.size());
  std::vector<double> interference(n, 0.0);
  double tp = 0.0, ip = 0.0, np = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double tv = coef(static_cast<Eigen::Index>(target)) * components[target][t];
    double iv = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      if (j != target) iv += coef(static_cast<Eigen::Index>(j)) * components[j][t];
    }
    const double nv = with_noise ? coef(static_cast<Eigen::Index>(s)) * noise[t] : 0.0;
    tp += tv * tv;
    ip += iv * iv;
    np += nv * nv;
  }
  out.target_power = tp;
  out.interference_power = ip;
  out.noise_power = np;
  return out;
}

SourceQuality measure_quality(std::span<const double> output,
                              const std::vector<std::span<const double>>& components,
                              std::span<const double> noise, std::size_t target) {
  SourceQuality q;
  double ref = 0.0;
  for (double v : components.at(target)) ref += v * v;
  if (!(ref > 0.0)) {
    q.defined = false;
    q.output_sir_db = std::numeric_limits<double>::quiet_NaN();
    q.output_snr_db = std::numeric_limits<double>::quiet_NaN();
    return q;
  }
  const Projection p = project(output, components, noise, target);
  q.output_sir_db = power_ratio_db(p.target_power, p.interference_power);
  q.output_snr_db = power_ratio_db(p.target_power, p.noise_power);
  return q;
}

const StageReport* QualityReport::find(const std::string& stage) const {
  for (const auto& s : stages) {
    if (s.stage == stage) return &s;
  }
  return nullptr;
}

double QualityReport::mean_output_sir(const std::string& stage) const {
  const StageReport* s = find(stage);
  if (!s || s->sources.empty()) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (const auto& q : s->sources) acc += q.output_sir_db;
  return acc / static_cast<double>(s->sources.size());
}

double QualityReport::mean_input_sir() const {
  if (stages.empty() || stages.front().sources.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double acc = 0.0;
  for (const auto& q : stages.front().sources) acc += q.input_sir_db;
  return acc / static_cast<double>(stages.front().sources.size());
}

void write_quality_csv(std::ostream& out, const QualityReport& report) {
  out << "stage,source,input_sir_db,output_sir_db,output_snr_db\n";
  for (const auto& st : report.stages) {
    for (const auto& q : st.sources) {
      out << st.stage << ',' << q.id << ',';
      if (q.defined) {
        out << q.input_sir_db << ',' << q.output_sir_db << ',' << q.output_snr_db;
      } else {
        out << "undefined,undefined,undefined";
      }
      out << '\n';
    }
  }
}

}  // namespace gssfront
