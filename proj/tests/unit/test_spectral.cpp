#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "benjctl/errors.hpp"
#include "benjctl/spectral.hpp"
#include "oracles.hpp"

using namespace benjctl;

namespace {

TorusFunction random_real(std::uint64_t seed, int n, double mean = 0.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(2 * n + 1);
  c[n] = mean;
  for (int k = 1; k <= n; ++k) {
    c[n + k] = Complex(u(gen), u(gen));
    c[n - k] = std::conj(c[n + k]);
  }
  return TorusFunction::from_coefficients(c, true);
}

}  // namespace

TEST(SobolevNorm, ConstantBasisElementHasUnitNorm) {
  EXPECT_NEAR(sobolev_norm(TorusFunction::basis(0, 3), 0.0), 1.0, 1e-15);
}

TEST(SobolevNorm, FirstModeInH1) {
  EXPECT_NEAR(sobolev_norm(TorusFunction::basis(1, 3), 1.0), std::sqrt(2.0), 1e-15);
}

TEST(SobolevNorm, SecondModePairInH2) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(7);
  c[3 + 2] = 1.0;
  c[3 - 2] = 1.0;
  const auto f = TorusFunction::from_coefficients(c, true);
  EXPECT_NEAR(sobolev_norm(f, 2.0), std::sqrt(100.0 * oracle::pi), 1e-13);
}

TEST(SobolevNorm, MatchesPointwiseQuadratureInL2) {
  const auto f = random_real(3, 6, 0.4);
  const double l2 = std::sqrt(oracle::integrate([&](double x) { return std::norm(f(x)); }, 0.0, 2 * oracle::pi, 32));
  EXPECT_NEAR(sobolev_norm(f, 0.0), l2, 1e-12);
}

TEST(InnerProduct, ReproducesNormSquared) {
  const auto f = random_real(5, 8);
  EXPECT_NEAR(inner_product(f, f, 1.5).real(), std::pow(sobolev_norm(f, 1.5), 2), 1e-10);
}

TEST(HilbertTransform, FirstModeMapsToMinusI) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(5);
  c[2 + 1] = 1.0;
  const auto h = hilbert_transform(TorusFunction::from_coefficients(c, false));
  EXPECT_NEAR(std::abs(h.coefficient(1) - Complex(0.0, -1.0)), 0.0, 1e-15);
}

TEST(HilbertTransform, AnnihilatesMean) {
  const auto h = hilbert_transform(TorusFunction::constant(2.5, 3));
  EXPECT_EQ(h.coefficient(0), Complex(0.0));
}

TEST(HilbertTransform, CosineBecomesSine) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(5);
  c[2 + 1] = 0.5;
  c[2 - 1] = 0.5;
  const auto h = hilbert_transform(TorusFunction::from_coefficients(c, true));
  for (double x : {0.0, 0.3, 1.7, 4.0}) EXPECT_NEAR(std::abs(h(x) - std::sin(x)), 0.0, 1e-15);
}

TEST(Mean, Examples) {
  EXPECT_NEAR(mean(TorusFunction::constant(1.0, 2)).real(), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(mean(TorusFunction::basis(1, 2))), 0.0, 1e-15);
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(3);
  c[1] = 0.25;
  EXPECT_NEAR(mean(TorusFunction::from_coefficients(c, true)).real(), 0.25, 1e-15);
}

TEST(ProjectMeanZero, RemovesConstant) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(3);
  c[1] = 1.0;
  c[0] = c[2] = 0.5;
  const auto p = project_mean_zero(TorusFunction::from_coefficients(c, true));
  for (double x : {0.0, 1.0, 2.0}) EXPECT_NEAR(p(x).real(), std::cos(x), 1e-15);
}

TEST(ProjectMeanZero, IdempotentAndMeanFree) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = random_real(seed, 7, 0.9);
    const auto p = project_mean_zero(f);
    EXPECT_EQ(mean(p), Complex(0.0));
    EXPECT_EQ(project_mean_zero(p).coefficients(), p.coefficients());
  }
}

TEST(Multiply, CosineSquared) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(3);
  c[0] = c[2] = 0.5;
  const auto cosx = TorusFunction::from_coefficients(c, true);
  const auto sq = multiply(cosx, cosx);
  EXPECT_EQ(sq.order(), 2);
  for (double x : {0.1, 2.2, 5.0}) EXPECT_NEAR(sq(x).real(), std::cos(x) * std::cos(x), 1e-15);
}

TEST(Transform, BasisRoundTripIsExact) {
  const auto f = TorusFunction::basis(3, 5);
  const Eigen::VectorXcd v = synthesize(f, 16);
  for (std::size_t j = 0; j < 16; ++j) {
    EXPECT_NEAR(std::abs(v[j] - std::polar(1.0 / kSqrtTwoPi, 3 * grid_node(j, 16))), 0.0, 1e-15);
  }
  const auto back = analyze(std::span<const Complex>(v.data(), v.size()), 5, false);
  EXPECT_LT((back.coefficients() - f.coefficients()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Transform, RandomHermitianRoundTrip) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto f = random_real(seed, 20, 0.3);
    const Eigen::VectorXcd v = synthesize(f, 64);
    std::vector<double> re(64);
    for (int j = 0; j < 64; ++j) re[j] = v[j].real();
    const auto back = analyze(std::span<const double>(re), 20);
    EXPECT_LT((back.coefficients() - f.coefficients()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Transform, SmoothBumpCoefficientsConverge) {
  auto bump = [](double x) {
    const double r = 2.0 * (x - oracle::pi) / (oracle::pi / 2);
    return std::abs(r) < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0;
  };
  auto coefficients = [&](std::size_t m) {
    std::vector<double> s(m);
    for (std::size_t j = 0; j < m; ++j) s[j] = bump(grid_node(j, m));
    return analyze(std::span<const double>(s), 64);
  };
  const auto a = coefficients(4096);
  const auto b = coefficients(8192);
  EXPECT_LT((a.coefficients() - b.coefficients()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Transform, AliasingIsRejected) {
  std::vector<double> s(8, 1.0);
  EXPECT_THROW(analyze(std::span<const double>(s), 4), ValidationError);
}

TEST(TorusFunction, RealFlagRejectsNonHermitianData) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(3);
  c[2] = 1.0;
  EXPECT_THROW(TorusFunction::from_coefficients(c, true), ValidationError);
}

TEST(TorusFunction, PointwiseValueMatchesSeries) {
  const auto f = random_real(11, 4, 0.2);
  const double x = 0.77;
  Complex direct = 0.0;
  for (int k = -4; k <= 4; ++k) direct += f.coefficient(k) * std::polar(1.0, k * x);
  EXPECT_NEAR(std::abs(f(x) - direct), 0.0, 1e-14);
}
