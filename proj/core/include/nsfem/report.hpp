#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nsfem/errors.hpp"

namespace nsfem {

struct ErrorRow {
  std::string mode;
  int level = 0;
  double h = 0.0;
  double dt = 0.0;
  double gamma = 0.0;
  double k = 0.0;
  int replicates = 0;
  double error = 0.0;
  double stderr_ = 0.0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// log(error) - (intercept + slope log(x)), one per point.
  std::vector<double> residuals;
};

/// Ordinary least squares of log(errors) on log(x). Requires at least two
/// strictly positive pairs and two distinct x values.
RateFit fit_rate(std::span<const double> x, std::span<const double> errors);

struct ErrorReport {
  std::vector<ErrorRow> rows;  // sorted by h (or dt) descending
  RateFit fit;
  /// True if the rate is fitted against dt rather than h.
  bool against_dt = false;
};

/// Root mean of per-sample squared errors, sqrt(mean(q)), with its
/// delete-one jackknife standard error (0 for a single sample).
struct RmsEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};
RmsEstimate jackknife_rms(std::span<const double> squared_errors);

/// Sample mean with the usual standard error.
struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};
MeanEstimate sample_mean(std::span<const double> values);

/// `mode,level,h,dt,gamma,k,replicates,error,stderr` rows followed by
/// `# slope=<s> intercept=<i>`.
void write_csv(std::ostream& out, const ErrorReport& report);

}  // namespace nsfem
