#include <gtest/gtest.h>

#include <cmath>

#include "benjctl/quadrature.hpp"
#include "oracles.hpp"

using namespace benjctl;

TEST(ExpIntegral, ZeroExponent) {
  EXPECT_EQ(exp_integral(0.0, 2.5), std::complex<double>(2.5));
}

TEST(ExpIntegral, MatchesClosedForm) {
  for (double w : {1e-3, 0.7, 13.0, -250.0}) {
    for (double T : {0.05, 1.0, 5.0}) {
      const auto ref = oracle::exp_integral(w, T);
      EXPECT_NEAR(std::abs(exp_integral({0.0, w}, T) - ref), 0.0, 1e-14 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(ExpIntegral, SeriesBranchIsContinuous) {
  // Straddle the switch between the series and the closed form.
  for (double z : {9.99e-7, 1.001e-6}) {
    EXPECT_NEAR(std::abs(exp_integral({0.0, z}, 1.0) - oracle::exp_integral(z, 1.0)), 0.0, 1e-15);
  }
}

TEST(ExpIntegral, DampedExponent) {
  const std::complex<double> a(-2.0, 3.0);
  const auto ref = (std::exp(a * 0.8) - 1.0) / a;
  EXPECT_NEAR(std::abs(exp_integral(a, 0.8) - ref), 0.0, 1e-15);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  const auto rule = composite_gauss_legendre(0.0, 2.0, 1);
  EXPECT_EQ(rule.size(), 20u);
  EXPECT_NEAR(integrate(rule, [](double x) { return std::pow(x, 39); }), std::pow(2.0, 40) / 40.0, 1e-3);
  EXPECT_NEAR(integrate(rule, [](double x) { return x * x; }), 8.0 / 3.0, 1e-14);
}

TEST(GaussLegendre, OscillatoryIntegral) {
  const double T = 3.0, w = 40.0;
  const auto rule = composite_gauss_legendre(0.0, T, panels_for(T, w));
  const auto val = integrate(rule, [&](double t) { return std::polar(1.0, w * t); });
  EXPECT_NEAR(std::abs(val - oracle::exp_integral(w, T)), 0.0, 1e-14);
}

TEST(GaussLegendre, PanelCount) {
  EXPECT_EQ(panels_for(1.0, 0.0), 1);
  EXPECT_GE(panels_for(1.0, 2 * oracle::pi * 10), 10);
  EXPECT_GE(panels_for(1.0, 0.0, 10000) * 20, 10000);
}
