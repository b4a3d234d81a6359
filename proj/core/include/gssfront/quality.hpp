// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace gssfront {

inline constexpr double kMetricCapDb = 99.0;

struct Projection {
  std::vector<double> coefficients;  // one per component, then noise
  double target_power = 0.0;
  double interference_power = 0.0;
  double noise_power = 0.0;
};

// Least-squares fit of `output` on the source components plus the noise
// component (pass an empty span to leave noise out).
Projection project(std::span<const double> output,
                   const std::vector<std::span<const double>>& components,
                   std::span<const double> noise, std::size_t target);

struct SourceQuality {
  std::string id;
  double input_sir_db = 0.0;
  double output_sir_db = 0.0;
  double output_snr_db = 0.0;
  bool defined = true;  // false when the target reference has no power
};

// SIR is target over the summed other-source residual, SNR target over the
// noise residual, both in dB and capped at +-99.
SourceQuality measure_quality(std::span<const double> output,
                              const std::vector<std::span<const double>>& components,
                              std::span<const double> noise, std::size_t target);

struct StageReport {
  std::string stage;  // delay-and-sum, gss, gss+pf
  std::vector<SourceQuality> sources;
};

struct QualityReport {
  std::vector<StageReport> stages;

  const StageReport* find(const std::string& stage) const;
  double mean_output_sir(const std::string& stage) const;
  double mean_input_sir() const;
};

double power_ratio_db(double num, double den);

// stage,source,input_sir_db,output_sir_db,output_snr_db
void write_quality_csv(std::ostream& out, const QualityReport& report);

}  // namespace gssfront
