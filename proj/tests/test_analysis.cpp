#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ahbt/analysis.hpp"
#include "ahbt/moments.hpp"
#include "ahbt/scenario.hpp"
#include "oracles.hpp"

using namespace ahbt;

namespace {

std::vector<DataPoint> noiseless(double alpha, double sigma = 0.05) {
  std::vector<DataPoint> pts;
  for (double n : reference_mean_photon_numbers()) pts.push_back({n, 0.0, model_g(n, alpha), sigma});
  return pts;
}

}  // namespace

TEST(Model, Values) {
  EXPECT_EQ(model_g(0.0, 1.0), 2.0);
  EXPECT_NEAR(model_g(1.09, 0.45), 1.32760, 5e-6);
  EXPECT_NEAR(model_g(10.61, 0.45), 1.07418, 5e-6);
  EXPECT_EQ(model_g(0.0, 0.45), 1.45);
}

// Property: alpha = 1 reproduces the single-mode closed form and the excess
// decays monotonically to zero.
TEST(Model, ConsistentWithClosedFormAndMonotone) {
  double previous = 3.0;
  for (int i = 0; i < 1000; ++i) {
    const double n = 0.05 * i;
    const double closed = (n * n + 4 * n + 2) / ((n + 1) * (n + 1));
    EXPECT_NEAR(model_g(n, 1.0), closed, 1e-12);
    EXPECT_NEAR(model_g(n, 1.0), antinormal_g2_coherent(n), 1e-12);
    const double g = model_g(n, 0.45);
    EXPECT_LT(g, previous);
    EXPECT_GT(g, 1.0);
    previous = g;
  }
  EXPECT_NEAR(model_g(1e9, 0.7), 1.0, 1e-8);
}

TEST(Fit, NoiselessRecovery) {
  const auto fit = fit_alpha(noiseless(0.45));
  EXPECT_NEAR(fit.alpha_hat, 0.45, 1e-12);
  EXPECT_NEAR(fit.s_min, 0.0, 1e-20);
  EXPECT_EQ(fit.dof, 6);
  EXPECT_TRUE(fit.passed);
  EXPECT_TRUE(fit.alpha_in_range);
  EXPECT_EQ(fit.residuals.size(), 7u);
}

TEST(Fit, FlatDataGivesZeroAlpha) {
  std::vector<DataPoint> pts;
  for (double n : reference_mean_photon_numbers()) pts.push_back({n, 0.0, 1.0, 0.01 + n});
  EXPECT_EQ(fit_alpha(pts).alpha_hat, 0.0);
}

TEST(Fit, OutOfRangeAlphaIsFlagged) {
  const auto fit = fit_alpha(noiseless(1.3));
  EXPECT_NEAR(fit.alpha_hat, 1.3, 1e-12);
  EXPECT_FALSE(fit.alpha_in_range);
}

TEST(Fit, Errors) {
  EXPECT_THROW(fit_alpha({{0.0, 0.0, 1.5, 0.1}}), std::invalid_argument);
  EXPECT_THROW(fit_alpha({{0.0, 0.0, 1.5, 0.1}, {1.0, 0.0, 1.5, 0.0}}), std::invalid_argument);
  // f(n)^2 underflows for huge n, leaving no leverage on alpha.
  EXPECT_THROW(fit_alpha({{1e300, 0.0, 1.0, 0.1}, {1e300, 0.0, 1.0, 0.1}}), DegenerateDesign);
  EXPECT_THROW(fit_alpha({{0.0, 0.0, 1.5, 0.1}, {std::nan(""), 0.0, 1.5, 0.1}}), std::invalid_argument);
}

// Property: closed form equals the numerical minimizer and s is a convex
// parabola around it.
TEST(Fit, ClosedFormMatchesNumericalMinimizer) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.005, 0.2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<DataPoint> pts;
    for (double n : reference_mean_photon_numbers()) {
      const double s = u(rng);
      pts.push_back({n, 0.0, model_g(n, 0.45) + s * z(rng), s});
    }
    const auto fit = fit_alpha(pts);
    EXPECT_NEAR(fit_alpha_numeric(pts), fit.alpha_hat, 1e-10);
    for (double d : {-0.3, -0.01, 0.01, 0.3}) {
      EXPECT_GE(fit_statistic(pts, fit.alpha_hat + d), fit.s_min);
      const double expected = fit.s_min + d * d / (fit.alpha_sigma * fit.alpha_sigma);
      EXPECT_NEAR(fit_statistic(pts, fit.alpha_hat + d), expected, 1e-9 * expected);
    }
  }
}

TEST(ChiSquare, SixDegreeThresholdAndTail) {
  EXPECT_NEAR(chi2_quantile(0.05, 6), 12.5916, 1e-4);
  EXPECT_EQ(std::round(chi2_quantile(0.05, 6) * 10.0) / 10.0, 12.6);
  EXPECT_EQ(chi2_tail(0.0, 6), 1.0);
  EXPECT_NEAR(chi2_tail(10.2, 6), oracle::chi2_tail_by_quadrature(10.2, 6), 1e-9);
  EXPECT_NEAR(chi2_tail(10.2, 6), 0.116, 5e-4);
}

TEST(ChiSquare, AgainstQuadratureOnBothBranches) {
  for (int k : {1, 2, 3, 6, 11}) {
    for (double s : {0.3, 2.0, 5.0, 9.0, 20.0, 45.0}) {
      EXPECT_NEAR(chi2_tail(s, k), oracle::chi2_tail_by_quadrature(s, k), 1e-8) << "k=" << k << " s=" << s;
      EXPECT_NEAR(chi2_tail(s, k) + chi2_cdf(s, k), 1.0, 1e-14);
    }
    const double q = chi2_quantile(0.05, k);
    EXPECT_NEAR(chi2_tail(q, k), 0.05, 1e-10);
  }
  // Even dof has the finite Poisson-sum tail.
  const double s = 7.3;
  EXPECT_NEAR(chi2_tail(s, 4), std::exp(-s / 2) * (1 + s / 2), 1e-14);
}

TEST(ChiSquare, DomainErrors) {
  EXPECT_THROW(chi2_tail(-1.0, 3), std::domain_error);
  EXPECT_THROW(chi2_tail(1.0, 0), std::domain_error);
  EXPECT_THROW(chi2_quantile(0.0, 3), std::domain_error);
  EXPECT_THROW(chi2_quantile(1.0, 3), std::domain_error);
}

TEST(Goodness, Boundaries) {
  const auto at_10_2 = goodness_of_fit(10.2, 6);
  EXPECT_TRUE(at_10_2.passed);
  EXPECT_NEAR(at_10_2.threshold, 12.5916, 1e-4);
  const auto over = goodness_of_fit(at_10_2.threshold + 1e-6, 6);
  EXPECT_FALSE(over.passed);
  const auto zero = goodness_of_fit(0.0, 6);
  EXPECT_TRUE(zero.passed);
  EXPECT_EQ(zero.p_value, 1.0);
}

// Property: under Gaussian noise with the stated sigmas, s_min follows
// chi-square with dof = points - 1.
TEST(Goodness, StatisticIsChiSquareDistributed) {
  std::mt19937_64 rng(2006);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> s;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<DataPoint> pts;
    for (double n : reference_mean_photon_numbers()) {
      const double sigma = 0.02 + 0.1 / (1.0 + n);
      pts.push_back({n, 0.0, model_g(n, 0.45) + sigma * z(rng), sigma});
    }
    s.push_back(fit_alpha(pts).s_min);
  }
  EXPECT_LT(oracle::ks_distance(s, [](double x) { return chi2_cdf(x, 6); }), 0.05);
}

TEST(DataCsv, RoundTripAndErrors) {
  const auto pts = noiseless(0.45);
  std::stringstream ss;
  write_data_points(ss, pts);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "n,sigma_n,g,sigma_g");
  ss.seekg(0);
  const auto back = read_data_points(ss);
  ASSERT_EQ(back.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(back[i].n, pts[i].n);
    EXPECT_EQ(back[i].g, pts[i].g);
    EXPECT_EQ(back[i].sigma_g, pts[i].sigma_g);
  }
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_data_points(in);
  };
  EXPECT_THROW(parse("n,g\n1,2\n"), std::invalid_argument);
  EXPECT_THROW(parse("n,sigma_n,g,sigma_g\n1,2,3\n"), std::invalid_argument);
  EXPECT_THROW(parse("n,sigma_n,g,sigma_g\n1,2,3,4,5\n"), std::invalid_argument);
  EXPECT_EQ(parse("# seed=1\nn,sigma_n,g,sigma_g\n\n1,0,1.5,0.1\r\n").size(), 1u);
}

TEST(FitReport, ContainsVerdict) {
  const auto pts = noiseless(0.45);
  std::ostringstream out;
  write_fit_report(out, fit_alpha(pts), pts);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("key,value\nalpha_hat,0.45\n", 0), 0u);
  EXPECT_NE(text.find("passed,true"), std::string::npos);
  EXPECT_NE(text.find("threshold,12.5915"), std::string::npos);
  EXPECT_NE(text.find("n,g,sigma_g,model,residual"), std::string::npos);
}
