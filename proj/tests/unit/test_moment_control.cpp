#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "benjctl/errors.hpp"
#include "benjctl/moment_control.hpp"
#include "benjctl/random_state.hpp"
#include "oracles.hpp"

using namespace benjctl;

namespace {

ControlProblem problem(double alpha, double mu, double T, int n, std::uint64_t seed, double s = 0.0) {
  ControlProblem p;
  p.system.alpha = alpha;
  p.system.mu = mu;
  p.T = T;
  p.s = s;
  p.n = n;
  p.g = BumpProfile::raised_cosine(2 * n);
  p.u0 = random_state(seed, n, s, 1.0);
  p.u1 = random_state(seed + 1000, n, s, 1.0);
  return p;
}

// integral_0^T (G h(t))_k e^{-i lambda_k (T - t)} dt by an independent Gauss-Legendre rule.
Eigen::VectorXcd moments_reference(const ControlSignal& h, const Spectrum& spec, const MMatrix& m, double T) {
  const int n = spec.order();
  const Eigen::MatrixXcd G = m.operator_matrix();
  double wmax = 0.0;
  for (double l : spec.lambdas()) wmax = std::max(wmax, std::abs(l));
  const int panels = std::max(64, static_cast<int>(wmax * T));
  return oracle::integrate(
      [&](double t) -> Eigen::VectorXcd {
        Eigen::VectorXcd v = G * h.modes(t);
        for (int k = -n; k <= n; ++k) v[k + n] *= std::polar(1.0, -spec.lambda(k) * (T - t));
        return v;
      },
      0.0, T, panels);
}

}  // namespace

TEST(Targets, FreeFlowReachesTargetAlready) {
  // alpha = 0.1: lambda_{+-1} = +-0.9, so U(T) fixes modes +-1 when 0.9 T = 2 pi.
  ControlProblem p = problem(0.1, 0.0, 2 * oracle::pi / 0.9, 2, 0);
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(5);
  c[1] = c[3] = 1.0;
  p.u0 = p.u1 = TorusFunction::from_coefficients(c, true);
  const auto spec = Spectrum::build(p.system, p.n);
  EXPECT_LT(reduce_to_zero_start(p, spec).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Targets, ZeroInitialState) {
  ControlProblem p = problem(1.0, 0.0, 1.0, 6, 1);
  p.u0 = TorusFunction(6);
  const auto c = reduce_to_zero_start(p, Spectrum::build(p.system, p.n));
  EXPECT_LT((c - p.u1.coefficients() * std::sqrt(2 * oracle::pi)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Targets, MeanModeCarriesNoMoment) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ControlProblem p = problem(7.0 / 3, 0.3, 0.5, 8, seed);
    p.u0 = p.u0 + TorusFunction::constant(0.7, 8);
    p.u1 = p.u1 + TorusFunction::constant(0.7, 8);
    EXPECT_EQ(reduce_to_zero_start(p, Spectrum::build(p.system, p.n))[8], Complex(0.0));
  }
}

TEST(Targets, MismatchedMeansAreRejected) {
  ControlProblem p = problem(1.0, 0.0, 1.0, 4, 2);
  p.u1 = p.u1 + TorusFunction::constant(0.1, 4);
  EXPECT_THROW(p.validate(), ValidationError);
  p = problem(1.0, 0.0, 0.0, 4, 2);
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Family, SingleZeroEigenvalue) {
  const auto f = BiorthogonalFamily::build(std::vector<double>{0.0}, 1.0);
  EXPECT_NEAR(std::abs(f.q(0.3)[0] - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(f.gram()(0, 0) - 1.0), 0.0, 1e-15);
}

TEST(Family, GramDiagonalEqualsHorizon) {
  const auto spec = Spectrum::build(SystemParams::from_rationals(Rational::make(7, 3), Rational::make(0, 1)), 8);
  const auto f = BiorthogonalFamily::build(spec, 0.7);
  for (int r = 0; r < f.size(); ++r) EXPECT_NEAR(std::abs(f.gram()(r, r) - 0.7), 0.0, 1e-15);
  EXPECT_EQ(f.size(), static_cast<int>(spec.distinct().size()));
}

TEST(Family, GramEntriesMatchClosedForm) {
  const std::vector<double> lam{-3.0, 0.0, 1.5, 8.0};
  const auto f = BiorthogonalFamily::build(lam, 1.3);
  for (int k = 0; k < 4; ++k) {
    for (int m = 0; m < 4; ++m) {
      EXPECT_NEAR(std::abs(f.gram()(k, m) - oracle::exp_integral(lam[k] - lam[m], 1.3)), 0.0, 1e-14);
    }
  }
}

TEST(Family, BiorthogonalByIndependentQuadrature) {
  const auto spec = Spectrum::build(SystemParams::from_rationals(Rational::make(1, 1), Rational::make(0, 1)), 8);
  const auto f = BiorthogonalFamily::build(spec, 1.0);
  ASSERT_TRUE(f.evaluates_in_double());
  const auto& lam = f.eigenvalues();
  const Eigen::MatrixXcd I = oracle::integrate(
      [&](double t) -> Eigen::MatrixXcd {
        const Eigen::VectorXcd q = f.q(t);
        Eigen::MatrixXcd M(lam.size(), q.size());
        for (std::size_t k = 0; k < lam.size(); ++k) {
          for (Eigen::Index r = 0; r < q.size(); ++r) M(k, r) = std::polar(1.0, lam[k] * t) * std::conj(q[r]);
        }
        return M;
      },
      0.0, 1.0, 625);  // 10^4 nodes
  const Eigen::MatrixXcd Id = Eigen::MatrixXcd::Identity(I.rows(), I.cols());
  EXPECT_LT((I - Id).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(f.biorthogonality_residual(), 1e-12);
}

TEST(Family, DualNormIsDiagonalOfInverse) {
  const auto f = BiorthogonalFamily::build(std::vector<double>{-2.0, 0.5, 4.0}, 2.0);
  for (int r = 0; r < 3; ++r) {
    const double ref = oracle::integrate([&](double t) { return std::norm(f.q(t)[r]); }, 0.0, 2.0, 64);
    EXPECT_NEAR(f.norm_sq(r), ref, 1e-12 * ref);
  }
}

TEST(Family, SingularGramIsReported) {
  const auto spec = Spectrum::build(SystemParams::from_rationals(Rational::make(1, 1), Rational::make(0, 1)), 32);
  try {
    BiorthogonalFamily::build(spec, 1e-3);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("lambda="), std::string::npos);
  }
}

TEST(Coefficients, UniformBumpWithoutClusters) {
  const int n = 6;
  const auto spec = Spectrum::build(SystemParams::from_rationals(Rational::make(1, 10), Rational::make(0, 1)), n);
  const auto m = MMatrix::build(BumpProfile::uniform(2 * n), n);
  Eigen::VectorXcd c = random_state(3, n, 0.0, 1.0).psi_coefficients();
  c[n] = 0.0;
  const double T = 0.8;
  const Eigen::VectorXcd h = solve_coefficients(c, m, spec, T);
  for (int k = -n; k <= n; ++k) {
    const Complex expect = k == 0 ? Complex(0.0) : 2 * oracle::pi * c[k + n] * std::polar(1.0, spec.lambda(k) * T);
    EXPECT_NEAR(std::abs(h[k + n] - expect), 0.0, 1e-14) << k;
  }
}

TEST(Coefficients, ZeroTargetsGiveZeroControl) {
  const auto spec = Spectrum::build(SystemParams::from_rationals(Rational::make(1, 1), Rational::make(0, 1)), 6);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(12), 6);
  EXPECT_EQ(solve_coefficients(Eigen::VectorXcd::Zero(13), m, spec, 1.0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Coefficients, ClusterContainingZeroMode) {
  ControlProblem p = problem(1.0, 0.0, 1.0, 8, 5);
  const auto sol = synthesize_control(p);
  EXPECT_EQ(sol.signal.coefficients()[8], Complex(0.0));
  const Eigen::VectorXcd mom = moments_reference(sol.signal, sol.spectrum, sol.m, p.T);
  EXPECT_LT((mom - sol.targets).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Signal, ZeroCoefficientsGiveZeroSignal) {
  const auto spec = Spectrum::build(SystemParams::from_rationals(Rational::make(1, 1), Rational::make(0, 1)), 4);
  auto fam = std::make_shared<const BiorthogonalFamily>(BiorthogonalFamily::build(spec, 1.0));
  const auto h = assemble_control(Eigen::VectorXcd::Zero(9), fam, spec);
  EXPECT_EQ(h.modes(0.4).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(h.norm(1.0), 0.0);
}

TEST(Signal, SingleModeFollowsItsDualFunction) {
  const auto spec = Spectrum::build(SystemParams::from_rationals(Rational::make(1, 10), Rational::make(0, 1)), 4);
  auto fam = std::make_shared<const BiorthogonalFamily>(BiorthogonalFamily::build(spec, 1.0));
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(9);
  c[4 + 1] = 2.0;
  const auto h = assemble_control(c, fam, spec);
  for (double t : {0.1, 0.5, 0.9}) {
    const Eigen::VectorXcd v = h.modes(t);
    EXPECT_NEAR(std::abs(v[5] - 2.0 * std::conj(fam->q(t)[h.dual_index(1)])), 0.0, 1e-12);
    EXPECT_EQ(v.cwiseAbs().sum(), std::abs(v[5]));
  }
}

TEST(Signal, SymmetrizationKeepsMoments) {
  ControlProblem p = problem(7.0 / 3, 0.3, 1.0, 16, 8);
  const auto sol = synthesize_control(p);
  EXPECT_LT(sol.hermitian_defect, 1e-6);
  EXPECT_LE(sol.symmetrized_moment_change, 1e-9);
  EXPECT_LT(sol.signal.hermitian_defect(), 1e-12);
}

TEST(Moments, ZeroSignal) {
  ControlProblem p = problem(1.0, 0.0, 1.0, 6, 2);
  p.u1 = evolve_free(p.u0, p.T, Spectrum::build(p.system, p.n));
  const auto sol = synthesize_control(p);
  const auto r = verify_moments(sol.signal, sol.targets, sol.spectrum, sol.m);
  EXPECT_LT(r.residual, 1e-15);
  EXPECT_LT(sol.signal.norm(0.0), 1e-12);
}

TEST(Moments, RandomTargets) {
  ControlProblem p = problem(1.0, 0.0, 1.0, 16, 3);
  const auto sol = synthesize_control(p);
  const auto r = verify_moments(sol.signal, sol.targets, sol.spectrum, sol.m);
  EXPECT_LE(r.residual, 1e-9);
  ASSERT_GE(r.closed_vs_quadrature, 0.0);
  EXPECT_LE(r.closed_vs_quadrature, 1e-8);
  EXPECT_GE(r.quadrature_nodes, 10000);
  const Eigen::VectorXcd mom = moments_reference(sol.signal, sol.spectrum, sol.m, p.T);
  EXPECT_LT((mom - sol.targets).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Moments, QuadratureSkippedForHugeDualCoefficients) {
  ControlProblem p = problem(7.0 / 3, 0.3, 0.05, 16, 4);
  const auto sol = synthesize_control(p);
  EXPECT_FALSE(sol.family->evaluates_in_double());
  const auto r = verify_moments(sol.signal, sol.targets, sol.spectrum, sol.m);
  EXPECT_EQ(r.closed_vs_quadrature, -1.0);
  EXPECT_LE(r.residual, 1e-9 * std::max(1.0, sol.targets.cwiseAbs().maxCoeff()));
}

TEST(Evolution, ZeroControlIsFreeFlow) {
  ControlProblem p = problem(1.0, 0.3, 1.0, 8, 6);
  const auto spec = Spectrum::build(p.system, p.n);
  p.u1 = evolve_free(p.u0, p.T, spec);
  const auto sol = synthesize_control(p);
  for (double t : {0.0, 0.4, 1.0}) {
    const auto u = evolve_controlled(p.u0, sol.signal, t, sol.spectrum, sol.m);
    EXPECT_LT((u.coefficients() - evolve_free(p.u0, t, spec).coefficients()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Evolution, ReachesTarget) {
  for (double s : {0.0, 1.0}) {
    ControlProblem p = problem(7.0 / 3, 0.0, 1.0, 16, 7, s);
    const auto sol = synthesize_control(p);
    EXPECT_LE(sol.terminal_residual, 1e-8) << s;
    EXPECT_LE(relative_distance(evolve_controlled(p.u0, sol.signal, p.T, sol.spectrum, sol.m), p.u1, s), 1e-8);
  }
}

TEST(Evolution, MeanIsConserved) {
  ControlProblem p = problem(1.0, 0.3, 0.05, 16, 9);
  p.u0 = p.u0 + TorusFunction::constant(0.25, 16);
  p.u1 = p.u1 + TorusFunction::constant(0.25, 16);
  const auto sol = synthesize_control(p);
  for (double t : {0.0, 0.01, 0.025, 0.05}) {
    const auto u = evolve_controlled(p.u0, sol.signal, t, sol.spectrum, sol.m);
    EXPECT_LE(std::abs(mean(u) - 0.25), 1e-12) << t;
  }
}

TEST(Evolution, ClosedFormMatchesQuadrature) {
  ControlProblem p = problem(1.0, 0.0, 1.0, 8, 10);
  const auto sol = synthesize_control(p);
  for (double t : {0.37, 1.0}) {
    const auto a = evolve_controlled(p.u0, sol.signal, t, sol.spectrum, sol.m);
    const auto b = evolve_controlled_quadrature(p.u0, sol.signal, t, sol.spectrum, sol.m);
    EXPECT_LT(relative_distance(a, b, 0.0), 1e-10);
  }
}

TEST(Control, LinearInTarget) {
  ControlProblem p = problem(1.0, 0.0, 1.0, 12, 11);
  p.u0 = TorusFunction(12);
  const auto a = synthesize_control(p);
  p.u1 = p.u1 * 3.5;
  const auto b = synthesize_control(p);
  const Eigen::VectorXcd ha = a.signal.coefficients(), hb = b.signal.coefficients();
  EXPECT_LT((hb - 3.5 * ha).cwiseAbs().maxCoeff(), 1e-12 * hb.cwiseAbs().maxCoeff());
}

TEST(Control, EmpiricalNormConstant) {
  const int n = 16;
  const auto spec = Spectrum::build(SystemParams::from_rationals(Rational::make(1, 1), Rational::make(0, 1)), n);
  auto fam = std::make_shared<const BiorthogonalFamily>(BiorthogonalFamily::build(spec, 1.0));
  double lo = INFINITY, hi = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ControlProblem p = problem(1.0, 0.0, 1.0, n, 2000 + seed);
    const auto sol = synthesize_control(p, fam);
    const double ratio = sol.signal.norm(0.0) / (sobolev_norm(p.u0, 0.0) + sobolev_norm(p.u1, 0.0));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  RecordProperty("nu_empirical", std::to_string(hi));
  EXPECT_TRUE(std::isfinite(hi));
  EXPECT_LT(hi / lo, 100.0);
}

TEST(Control, AnyPositiveHorizon) {
  for (double T : {0.05, 0.5, 1.0, 5.0}) {
    ControlProblem p = problem(7.0 / 3, 0.3, T, 16, 12);
    const auto sol = synthesize_control(p);
    const double cond = sol.family->condition_number();
    const double tol = cond > 1e4 ? std::min(1e-12 * cond, 1e-6) : 1e-8;
    EXPECT_LE(sol.terminal_residual, tol) << T;
  }
}

TEST(Control, SpilloverIsReported) {
  ControlProblem p = problem(1.0, 0.0, 1.0, 8, 13);
  p.g = BumpProfile::raised_cosine(48);
  const auto sol = synthesize_control(p);
  const double spill = spillover_norm(sol.signal, p.g, p.system, 24, 0.0);
  EXPECT_GT(spill, 0.0);
  EXPECT_TRUE(std::isfinite(spill));
}
