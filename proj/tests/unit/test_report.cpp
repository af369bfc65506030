#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "nsfem/report.hpp"

using namespace nsfem;

TEST(FitRate, ExactPowerLaw) {
  const std::vector<double> h{0.5, 0.25, 0.125, 0.0625};
  std::vector<double> e;
  for (double x : h) e.push_back(x * x);
  const RateFit fit = fit_rate(h, e);
  EXPECT_NEAR(fit.slope, 2.0, 1e-12);
  EXPECT_NEAR(fit.intercept, 0.0, 1e-12);
  ASSERT_EQ(fit.residuals.size(), 4u);
  for (double r : fit.residuals) EXPECT_NEAR(r, 0.0, 1e-12);
}

TEST(FitRate, ConstantErrors) {
  const std::vector<double> h{1.0, 0.1, 0.01};
  const std::vector<double> e{3.0, 3.0, 3.0};
  EXPECT_NEAR(fit_rate(h, e).slope, 0.0, 1e-14);
}

TEST(FitRate, PerturbedPowerLaw) {
  std::vector<double> h, e;
  for (int i = 0; i < 6; ++i) {
    h.push_back(std::pow(0.5, i));
    e.push_back(3.0 * std::pow(h.back(), 1.5) * (1.0 + 0.01 * (i % 2 == 0 ? 1 : -1)));
  }
  EXPECT_NEAR(fit_rate(h, e).slope, 1.5, 0.05);
}

TEST(FitRate, RejectsBadInput) {
  const std::vector<double> one{1.0};
  EXPECT_THROW(fit_rate(one, one), DomainError);
  const std::vector<double> h{0.5, 0.25};
  EXPECT_THROW(fit_rate(h, std::vector<double>{1.0, 0.0}), DomainError);
  EXPECT_THROW(fit_rate(h, std::vector<double>{1.0, -1.0}), DomainError);
  EXPECT_THROW(fit_rate(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 2.0}),
               DomainError);
  EXPECT_THROW(fit_rate(h, std::vector<double>{1.0}), ShapeError);
}

TEST(Jackknife, MatchesDirectComputation) {
  const std::vector<double> q{1.0, 4.0, 9.0, 2.0, 0.5};
  const RmsEstimate est = jackknife_rms(q);
  double total = 0.0;
  for (double v : q) total += v;
  EXPECT_DOUBLE_EQ(est.value, std::sqrt(total / 5.0));
  std::vector<double> loo;
  for (double v : q) loo.push_back(std::sqrt((total - v) / 4.0));
  double mean = 0.0;
  for (double v : loo) mean += v / 5.0;
  double var = 0.0;
  for (double v : loo) var += (v - mean) * (v - mean);
  EXPECT_NEAR(est.stderr_, std::sqrt(4.0 / 5.0 * var), 1e-14);
}

TEST(Jackknife, DegenerateSamples) {
  EXPECT_EQ(jackknife_rms(std::vector<double>{2.0}).stderr_, 0.0);
  EXPECT_EQ(jackknife_rms(std::vector<double>{2.0, 2.0, 2.0}).stderr_, 0.0);
  EXPECT_THROW(jackknife_rms(std::vector<double>{}), DomainError);
}

TEST(SampleMean, Basic) {
  const MeanEstimate m = sample_mean(std::vector<double>{1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(m.mean, 2.0);
  EXPECT_NEAR(m.stderr_, std::sqrt(1.0 / 3.0), 1e-15);
}

TEST(Csv, Format) {
  ErrorReport report;
  report.rows.push_back({"converge", 2, 0.35355339059327379, 0.25, 1.0, 0.5, 10, 0.125, 0.01});
  report.fit.slope = 2.0;
  report.fit.intercept = -1.5;
  std::ostringstream out;
  write_csv(out, report);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "mode,level,h,dt,gamma,k,replicates,error,stderr");
  EXPECT_NE(text.find("\nconverge,2,"), std::string::npos);
  EXPECT_NE(text.find("# slope=2.000000 intercept=-1.500000\n"), std::string::npos);
  std::ostringstream again;
  write_csv(again, report);
  EXPECT_EQ(again.str(), text);
}
