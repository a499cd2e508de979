#include <gtest/gtest.h>

#include <cmath>

#include "benjctl/errors.hpp"
#include "benjctl/random_state.hpp"
#include "benjctl/stabilization.hpp"
#include "oracles.hpp"

#include <Eigen/Eigenvalues>

using namespace benjctl;

namespace {

Spectrum spectrum(double alpha, int n, double mu = 0.0) {
  SystemParams p;
  p.alpha = alpha;
  p.mu = mu;
  return Spectrum::build(p, n);
}

std::vector<double> grid(double t_end, int count) {
  std::vector<double> t(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) t[static_cast<std::size_t>(i)] = t_end * i / (count - 1);
  return t;
}

const double kUniformDiag = 1.0 / (4 * oracle::pi * oracle::pi);

}  // namespace

TEST(LLambda, DiagonalFormula) {
  const int n = 6;
  const auto spec = spectrum(1.0, n);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  const Eigen::MatrixXcd gg = gg_star_matrix(m);
  const double lam = 1.5, T = 0.7;
  const auto L = build_L_lambda(m, spec, lam, T);
  for (int k = -n; k <= n; ++k) {
    const double expect = gg(k + n, k + n).real() * (1 - std::exp(-2 * lam * T)) / (2 * lam);
    EXPECT_NEAR(L.matrix(k + n, k + n).real(), expect, 1e-14) << k;
  }
}

TEST(LLambda, ClosedFormMatchesQuadrature) {
  const int n = 6;
  const auto spec = spectrum(7.0 / 3, n);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  const Eigen::MatrixXcd gg = gg_star_matrix(m);
  const auto L = build_L_lambda(m, spec, 2.0, 1.0);
  const Eigen::MatrixXcd ref = oracle::integrate(
      [&](double tau) -> Eigen::MatrixXcd {
        Eigen::MatrixXcd M = gg * std::exp(-4.0 * tau);
        for (int k = -n; k <= n; ++k) {
          for (int l = -n; l <= n; ++l) M(k + n, l + n) *= std::polar(1.0, (spec.lambda(k) - spec.lambda(l)) * tau);
        }
        return M;
      },
      0.0, 1.0, 200);
  EXPECT_LT((L.matrix - ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((L.matrix - L_lambda_quadrature(gg, spec, 2.0, 1.0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LLambda, SmallLambdaLimit) {
  const int n = 6;
  const auto spec = spectrum(1.0, n);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  const auto L = build_L_lambda(m, spec, 1e-8, 1.0);
  const Eigen::MatrixXcd L0 = L_lambda_quadrature(gg_star_matrix(m), spec, 0.0, 1.0);
  EXPECT_LT((L.matrix - L0).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(LLambda, UniformIsDiagonalWithReciprocalInverse) {
  const int n = 5;
  const auto spec = spectrum(0.1, n);
  const auto m = MMatrix::build(BumpProfile::uniform(2 * n), n);
  const double lam = 1.0, T = 1.0;
  const auto L = build_L_lambda(m, spec, lam, T);
  const double d = kUniformDiag * (1 - std::exp(-2 * lam * T)) / (2 * lam);
  for (int k = -n; k <= n; ++k) {
    for (int l = -n; l <= n; ++l) {
      const double expect = (k == l && k != 0) ? d : 0.0;
      EXPECT_NEAR(std::abs(L.matrix(k + n, l + n) - expect), 0.0, 1e-14);
      EXPECT_NEAR(std::abs(L.inverse(k + n, l + n) - (expect == 0.0 ? 0.0 : 1.0 / d)), 0.0, 1e-9);
    }
  }
}

TEST(LLambda, RejectsBadParameters) {
  const auto spec = spectrum(1.0, 4);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(8), 4);
  EXPECT_THROW(build_L_lambda(m, spec, -1.0, 1.0), ValidationError);
  EXPECT_THROW(build_L_lambda(m, spec, 1.0, 0.0), ValidationError);
}

TEST(Laws, UniformSimpleLawEigenvalues) {
  const int n = 5;
  const auto spec = spectrum(0.1, n);
  const auto m = MMatrix::build(BumpProfile::uniform(2 * n), n);
  const auto law = FeedbackLaw::simple(spec, m);
  for (int k = -n; k <= n; ++k) {
    if (k == 0) continue;
    const Complex expect(-kUniformDiag, -spec.lambda(k));
    EXPECT_NEAR(std::abs(law.generator()(k + n, k + n) - expect), 0.0, 1e-14);
  }
  EXPECT_NEAR(law.spectral_abscissa(), -kUniformDiag, 1e-14);
}

TEST(Laws, UniformGramianLawRate) {
  const int n = 5;
  const auto spec = spectrum(0.1, n);
  const auto m = MMatrix::build(BumpProfile::uniform(2 * n), n);
  for (double lam : {0.5, 1.0, 2.0}) {
    const double T = 1.0;
    const auto law = FeedbackLaw::gramian(build_L_lambda(m, spec, lam, T), spec, m);
    const double rate = 2 * lam / (1 - std::exp(-2 * lam * T));
    for (int k = 1; k <= n; ++k) EXPECT_NEAR(law.generator()(k + n, k + n).real(), -rate, 1e-9 * rate);
    EXPECT_LE(law.spectral_abscissa(), -lam);
  }
}

TEST(Laws, GramianAbscissaBelowMinusLambda) {
  const int n = 8;
  const auto spec = spectrum(7.0 / 3, n);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  const auto law = FeedbackLaw::gramian(build_L_lambda(m, spec, 2.0, 1.0), spec, m);
  EXPECT_LE(law.spectral_abscissa(), -2.0);
}

TEST(Laws, FeedbackIgnoresMean) {
  const int n = 6;
  const auto spec = spectrum(1.0, n);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  for (const auto& law : {FeedbackLaw::simple(spec, m), FeedbackLaw::gramian(build_L_lambda(m, spec, 1.0, 1.0), spec, m)}) {
    EXPECT_EQ(law.matrix().col(n).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LT(law.matrix().row(n).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Laws, SimpleLawIsSelfAdjointDissipation) {
  const int n = 6;
  const auto spec = spectrum(1.0, n);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  const auto law = FeedbackLaw::simple(spec, m);
  const Eigen::MatrixXcd K = law.matrix();
  EXPECT_LT((K - K.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(K);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-15);
}

TEST(ClosedLoop, NoFeedbackIsFreeFlow) {
  const int n = 8;
  const auto spec = spectrum(1.0, n, 0.3);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  const auto u0 = random_state(3, n, 0.0, 1.0) + TorusFunction::constant(0.4, n);
  const auto tr = simulate_closed_loop(u0, FeedbackLaw::none(spec, m), {0.0, 0.5, 2.0});
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const auto ref = evolve_free(u0, tr.times[i], spec);
    EXPECT_LT((tr.states[i].coefficients() - ref.coefficients()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ClosedLoop, ZeroStaysZero) {
  const int n = 6;
  const auto spec = spectrum(1.0, n);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  const auto tr = simulate_closed_loop(TorusFunction(n), FeedbackLaw::simple(spec, m), grid(5.0, 11));
  for (const auto& u : tr.states) EXPECT_EQ(u.coefficients().cwiseAbs().maxCoeff(), 0.0);
}

TEST(ClosedLoop, ConstantStaysPut) {
  const int n = 6;
  const auto spec = spectrum(1.0, n);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  const auto law = FeedbackLaw::gramian(build_L_lambda(m, spec, 1.0, 1.0), spec, m);
  const auto u0 = TorusFunction::constant(1.7, n);
  const auto tr = simulate_closed_loop(u0, law, grid(3.0, 7));
  for (const auto& u : tr.states) EXPECT_LT((u.coefficients() - u0.coefficients()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ClosedLoop, SimpleLawDecaysMonotonically) {
  const int n = 8;
  const auto spec = spectrum(7.0 / 3, n);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  const auto tr = simulate_closed_loop(random_state(4, n, 0.0, 1.0), FeedbackLaw::simple(spec, m), grid(20.0, 201));
  const auto norms = tr.fluctuation_norms(0.0);
  for (std::size_t i = 1; i < norms.size(); ++i) EXPECT_LE(norms[i], norms[i - 1] * (1 + 1e-12)) << i;
  EXPECT_LT(norms.back(), norms.front());
}

TEST(ClosedLoop, EnergyIdentity) {
  const int n = 8;
  const auto spec = spectrum(1.0, n);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  const auto law = FeedbackLaw::simple(spec, m);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto u = random_state(seed, n, 0.0, 1.0);
    EXPECT_LE(energy_identity_defect(law, u), 1e-10) << seed;
  }
}

TEST(DecayFit, SyntheticExponential) {
  const auto t = grid(5.0, 51);
  std::vector<double> v;
  for (double x : t) v.push_back(3.0 * std::exp(-2.0 * x));
  const auto fit = estimate_decay_rate(t, v);
  EXPECT_NEAR(fit.rate, 2.0, 1e-10);
  EXPECT_NEAR(fit.M, 3.0, 1e-9);
  EXPECT_GT(fit.r_squared, 0.999999);
  EXPECT_TRUE(fit.log_linear);
  EXPECT_EQ(fit.first, 0u);
  EXPECT_EQ(fit.last, 50u);
}

TEST(DecayFit, IgnoresNoiseFloor) {
  const auto t = grid(40.0, 81);
  std::vector<double> v;
  for (double x : t) v.push_back(std::max(std::exp(-1.5 * x), 1e-16));
  EXPECT_NEAR(estimate_decay_rate(t, v).rate, 1.5, 1e-8);
}

TEST(DecayFit, FallsBackWhenNothingIsLogLinear) {
  // e^{-t} times a ripple: no window reaches R^2 >= 0.999, the whole history is fitted
  const auto t = grid(10.0, 101);
  std::vector<double> v;
  for (double x : t) v.push_back(std::exp(-x) * (1.0 + 0.9 * std::sin(6.0 * x)));
  const auto fit = estimate_decay_rate(t, v);
  EXPECT_FALSE(fit.log_linear);
  EXPECT_EQ(fit.first, 0u);
  EXPECT_EQ(fit.last, 100u);
  EXPECT_LT(fit.r_squared, 0.999);
  EXPECT_NEAR(fit.rate, 1.0, 0.1);
}

TEST(DecayFit, TooFewSamples) {
  EXPECT_THROW(estimate_decay_rate({0.0, 1.0, 2.0}, {1.0, 0.5, 0.25}), NumericalError);
}

TEST(DecayRate, SimpleLawMatchesAbscissa) {
  const int n = 8;
  const auto spec = spectrum(0.1, n);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  const auto law = FeedbackLaw::simple(spec, m);
  const double a = std::abs(law.spectral_abscissa());
  const auto tr = simulate_closed_loop(random_state(6, n, 0.0, 1.0), law, grid(30.0 / a, 301));
  const auto fit = estimate_decay_rate(tr.times, tr.fluctuation_norms(0.0));
  EXPECT_NEAR(fit.rate, a, 0.05 * a);
}

TEST(DecayRate, GramianLawReachesLambda) {
  const int n = 8;
  const auto spec = spectrum(7.0 / 3, n);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  for (double lam : {0.5, 1.0, 2.0}) {
    const auto law = FeedbackLaw::gramian(build_L_lambda(m, spec, lam, 1.0), spec, m);
    const auto tr = simulate_closed_loop(random_state(7, n, 0.0, 1.0), law, grid(10.0 / lam, 201));
    EXPECT_GE(estimate_decay_rate(tr.times, tr.fluctuation_norms(0.0)).rate, 0.99 * lam) << lam;
  }
}

TEST(Observability, UniformClosedForm) {
  const int n = 6;
  const auto spec = spectrum(0.1, n);
  const auto m = MMatrix::build(BumpProfile::uniform(2 * n), n);
  for (double T : {0.1, 1.0, 4.0}) {
    EXPECT_NEAR(observability_constant(m, spec, T).delta, std::sqrt(T) / (2 * oracle::pi), 1e-12) << T;
  }
}

TEST(Observability, NondecreasingInT) {
  const int n = 8;
  const auto spec = spectrum(1.0, n);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  double prev = 0.0;
  for (double T : {0.05, 0.1, 0.5, 1.0, 2.0}) {
    const auto obs = observability_constant(m, spec, T);
    EXPECT_GT(obs.delta, 0.0);
    EXPECT_GE(obs.delta, prev * (1 - 1e-9)) << T;
    EXPECT_NEAR(obs.minimizer.norm(), 1.0, 1e-12);
    EXPECT_EQ(obs.minimizer[n], Complex(0.0));
    prev = obs.delta;
  }
}

TEST(Observability, DegenerateHorizonFails) {
  const int n = 16;
  const auto spec = spectrum(1.0, n);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  try {
    observability_constant(m, spec, 1e-4);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_FALSE(std::string(e.what()).empty());
  }
}
