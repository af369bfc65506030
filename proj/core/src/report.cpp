#include "nsfem/report.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "nsfem/errors.hpp"

namespace nsfem {

RateFit fit_rate(std::span<const double> x, std::span<const double> errors) {
  if (x.size() != errors.size()) throw ShapeError("fit_rate: x and errors differ in length");
  if (x.size() < 2) throw DomainError("fit_rate needs at least two points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(errors[i] > 0.0)) {
      throw DomainError(fmt::format("fit_rate needs positive data, got ({}, {})", x[i], errors[i]));
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(errors[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_rate needs at least two distinct abscissae");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) fit.residuals[i] = ly[i] - (fit.intercept + fit.slope * lx[i]);
  return fit;
}

RmsEstimate jackknife_rms(std::span<const double> q) {
  if (q.empty()) throw DomainError("jackknife_rms needs at least one sample");
  const auto n = static_cast<double>(q.size());
  const double total = std::accumulate(q.begin(), q.end(), 0.0);
  RmsEstimate est;
  est.value = std::sqrt(std::max(0.0, total / n));
  if (q.size() == 1) return est;
  std::vector<double> leave_one(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    leave_one[i] = std::sqrt(std::max(0.0, (total - q[i]) / (n - 1.0)));
  }
  const double mean = std::accumulate(leave_one.begin(), leave_one.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : leave_one) ss += (v - mean) * (v - mean);
  est.stderr_ = std::sqrt((n - 1.0) / n * ss);
  return est;
}

MeanEstimate sample_mean(std::span<const double> values) {
  if (values.empty()) throw DomainError("sample_mean needs at least one value");
  const auto n = static_cast<double>(values.size());
  MeanEstimate est;
  est.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return est;
  double ss = 0.0;
  for (double v : values) ss += (v - est.mean) * (v - est.mean);
  est.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  return est;
}

void write_csv(std::ostream& out, const ErrorReport& report) {
  out << "mode,level,h,dt,gamma,k,replicates,error,stderr\n";
  for (const ErrorRow& r : report.rows) {
    out << fmt::format("{},{},{:.10g},{:.10g},{:.10g},{:.10g},{},{:.10e},{:.10e}\n", r.mode, r.level,
                       r.h, r.dt, r.gamma, r.k, r.replicates, r.error, r.stderr_);
  }
  out << fmt::format("# slope={:.6f} intercept={:.6f}\n", report.fit.slope, report.fit.intercept);
}

}  // namespace nsfem
