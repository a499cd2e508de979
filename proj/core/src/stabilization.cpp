#include "benjctl/stabilization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "benjctl/errors.hpp"
#include "benjctl/hum.hpp"
#include "benjctl/quadrature.hpp"

namespace benjctl {
namespace {

constexpr double kNoiseFloor = 1e-13;
constexpr std::size_t kMinFitSamples = 10;
constexpr double kMinRSquared = 0.999;

Eigen::MatrixXcd mean_zero_block(const Eigen::MatrixXcd& a) {
  const Eigen::Index n = a.rows() / 2;
  Eigen::MatrixXcd out(a.rows() - 1, a.cols() - 1);
  for (Eigen::Index i = 0, r = 0; i < a.rows(); ++i) {
    if (i == n) continue;
    for (Eigen::Index j = 0, c = 0; j < a.cols(); ++j) {
      if (j != n) out(r, c++) = a(i, j);
    }
    ++r;
  }
  return out;
}

Eigen::MatrixXcd embed_mean_zero(const Eigen::MatrixXcd& b) {
  const Eigen::Index n = b.rows() / 2;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(b.rows() + 1, b.cols() + 1);
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) out(i < n ? i : i + 1, j < n ? j : j + 1) = b(i, j);
  }
  return out;
}

Eigen::MatrixXcd free_generator(const Spectrum& spectrum) {
  const int n = spectrum.order();
  Eigen::VectorXcd d(2 * n + 1);
  for (int k = -n; k <= n; ++k) d[k + n] = Complex(0.0, -spectrum.lambda(k));
  return d.asDiagonal();
}

std::string describe_vector(const Eigen::VectorXcd& v) {
  const int n = static_cast<int>(v.size() / 2);
  std::vector<int> idx(v.size());
  for (int i = 0; i < static_cast<int>(v.size()); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return std::abs(v[a]) > std::abs(v[b]); });
  std::ostringstream os;
  os << "dominant modes";
  for (std::size_t i = 0; i < std::min<std::size_t>(3, idx.size()); ++i) {
    os << " k=" << idx[i] - n << " (|c|=" << std::abs(v[idx[i]]) << ")";
  }
  return os.str();
}

}  // namespace

std::string to_string(LawKind kind) {
  switch (kind) {
    case LawKind::none: return "none";
    case LawKind::simple: return "simple";
    case LawKind::gramian: return "gramian";
  }
  return "unknown";
}

std::optional<LawKind> parse_law_kind(std::string_view name) {
  if (name == "none") return LawKind::none;
  if (name == "simple") return LawKind::simple;
  if (name == "gramian") return LawKind::gramian;
  return std::nullopt;
}

GramianWeighted build_L_lambda(const MMatrix& m, const Spectrum& spectrum, double lambda, double T) {
  if (!(lambda > 0.0)) throw ValidationError("decay rate lambda must be > 0");
  if (!(T > 0.0)) throw ValidationError("horizon T must be > 0");
  const int n = m.order();
  const Eigen::MatrixXcd gg = gg_star_matrix(m);
  GramianWeighted L;
  L.lambda = lambda;
  L.T = T;
  L.matrix.resize(2 * n + 1, 2 * n + 1);
  for (int k = -n; k <= n; ++k) {
    for (int l = -n; l <= n; ++l) {
      L.matrix(k + n, l + n) =
          gg(k + n, l + n) * exp_integral(Complex(-2.0 * lambda, spectrum.lambda(k) - spectrum.lambda(l)), T);
    }
  }
  const Eigen::MatrixXcd block = mean_zero_block(L.matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block, Eigen::EigenvaluesOnly);
  L.min_eigenvalue = es.eigenvalues().minCoeff();
  Eigen::LLT<Eigen::MatrixXcd> llt(block);
  if (llt.info() != Eigen::Success || !(L.min_eigenvalue > 0.0)) {
    std::ostringstream os;
    os << "L_lambda is not positive definite on mean-zero modes (lambda=" << lambda << ", T=" << T
       << ", min eigenvalue " << L.min_eigenvalue << "): observability fails at this truncation";
    throw NumericalError(os.str());
  }
  L.condition = es.eigenvalues().maxCoeff() / L.min_eigenvalue;
  L.inverse = embed_mean_zero(llt.solve(Eigen::MatrixXcd::Identity(block.rows(), block.cols())));
  return L;
}

Eigen::MatrixXcd L_lambda_quadrature(const Eigen::MatrixXcd& gg, const Spectrum& spectrum, double lambda, double T,
                                     int nodes) {
  const int n = spectrum.order();
  double wmax = 0.0;
  for (double l : spectrum.lambdas()) wmax = std::max(wmax, std::abs(l));
  const auto rule = composite_gauss_legendre(0.0, T, panels_for(T, 2.0 * wmax, nodes));
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(2 * n + 1, 2 * n + 1);
  Eigen::VectorXcd e(2 * n + 1);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double tau = rule.nodes[i];
    for (int k = -n; k <= n; ++k) e[k + n] = std::polar(1.0, spectrum.lambda(k) * tau);
    L.noalias() += (rule.weights[i] * std::exp(-2.0 * lambda * tau)) * (e.asDiagonal() * gg * e.conjugate().asDiagonal());
  }
  return L;
}

double spectral_abscissa(const Eigen::MatrixXcd& generator) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(mean_zero_block(generator), false);
  if (es.info() != Eigen::Success) throw NumericalError("closed-loop eigenvalue solve did not converge");
  return es.eigenvalues().real().maxCoeff();
}

FeedbackLaw FeedbackLaw::none(const Spectrum& spectrum, const MMatrix& m) {
  if (spectrum.order() != m.order()) throw ValidationError("spectrum and m-matrix orders differ");
  FeedbackLaw f;
  f.kind_ = LawKind::none;
  f.G_ = m.operator_matrix();
  f.K_ = Eigen::MatrixXcd::Zero(f.G_.rows(), f.G_.cols());
  f.generator_ = free_generator(spectrum);
  f.abscissa_ = benjctl::spectral_abscissa(f.generator_);
  return f;
}

FeedbackLaw FeedbackLaw::simple(const Spectrum& spectrum, const MMatrix& m) {
  if (spectrum.order() != m.order()) throw ValidationError("spectrum and m-matrix orders differ");
  FeedbackLaw f;
  f.kind_ = LawKind::simple;
  f.G_ = m.operator_matrix();
  f.K_ = gg_star_matrix(m);
  f.generator_ = free_generator(spectrum) - f.K_;
  f.abscissa_ = benjctl::spectral_abscissa(f.generator_);
  return f;
}

FeedbackLaw FeedbackLaw::gramian(const GramianWeighted& L, const Spectrum& spectrum, const MMatrix& m) {
  if (spectrum.order() != m.order() || L.matrix.rows() != 2 * m.order() + 1) {
    throw ValidationError("spectrum, m-matrix and L_lambda orders differ");
  }
  FeedbackLaw f;
  f.kind_ = LawKind::gramian;
  f.lambda_ = L.lambda;
  f.G_ = m.operator_matrix();
  f.K_ = gg_star_matrix(m) * L.inverse;
  f.generator_ = free_generator(spectrum) - f.K_;
  f.abscissa_ = benjctl::spectral_abscissa(f.generator_);
  if (L.condition > kIllConditioned) {
    std::ostringstream os;
    os << "L_lambda is ill-conditioned (cond " << L.condition << "); decay checks use a degraded tolerance";
    f.warnings_.push_back(os.str());
  }
  return f;
}

std::vector<double> Trajectory::fluctuation_norms(double s) const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& u : states) out.push_back(sobolev_norm(project_mean_zero(u), s));
  return out;
}

Trajectory simulate_closed_loop(const TorusFunction& u0, const FeedbackLaw& law, const std::vector<double>& times) {
  const int n = law.order();
  if (u0.order() > n) throw ValidationError("initial state order exceeds the feedback law order");
  Trajectory tr;
  tr.times = times;
  tr.mean = mean(u0);
  Eigen::VectorXcd a = u0.resized(n).psi_coefficients();
  a[n] = 0.0;
  double now = 0.0;
  double cached_dt = -1.0;
  Eigen::MatrixXcd step;
  for (double t : times) {
    if (t < now) throw ValidationError("simulation times must be non-decreasing and >= 0");
    const double dt = t - now;
    if (dt > 0.0) {
      if (dt != cached_dt) {
        step = (law.generator() * dt).exp();
        cached_dt = dt;
      }
      a = step * a;
    }
    now = t;
    Eigen::VectorXcd out = a;
    // mode 0 is carried exactly
    out[n] = tr.mean * kSqrtTwoPi;
    Eigen::VectorXcd sym = out;
    if (u0.is_real()) {
      for (int k = -n; k <= n; ++k) sym[k + n] = 0.5 * (out[k + n] + std::conj(out[n - k]));
    }
    tr.states.push_back(TorusFunction::from_psi_coefficients(sym, u0.is_real()));
  }
  return tr;
}

double energy_rate(const FeedbackLaw& law, const Eigen::VectorXcd& a, double h) {
  auto centered = [&](double step) {
    const Eigen::MatrixXcd X = law.generator() * step;
    const Eigen::MatrixXcd S = X.sinh();
    const Eigen::MatrixXcd C = X.cosh();
    return (S * a).dot(C * a).real() / step;
  };
  return (4.0 * centered(0.5 * h) - centered(h)) / 3.0;
}

double energy_identity_defect(const FeedbackLaw& law, const TorusFunction& u, double h) {
  const int n = law.order();
  Eigen::VectorXcd a = u.resized(n).psi_coefficients();
  a[n] = 0.0;
  const double rate = energy_rate(law, a, h);
  const double dissipation = (law.g_matrix() * a).squaredNorm();
  return std::abs(rate + dissipation);
}

DecayFit estimate_decay_rate(const std::vector<double>& times, const std::vector<double>& norms) {
  if (times.size() != norms.size()) throw ValidationError("times and norms differ in length");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (norms[i] > kNoiseFloor && std::isfinite(norms[i])) keep.push_back(i);
  }
  if (keep.size() < kMinFitSamples) {
    throw NumericalError("decay fit needs at least 10 samples above the 1e-13 noise floor, got " +
                         std::to_string(keep.size()));
  }
  const std::size_t N = keep.size();
  std::vector<double> St(N + 1, 0.0), Sy(N + 1, 0.0), Stt(N + 1, 0.0), Sty(N + 1, 0.0), Syy(N + 1, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    const double t = times[keep[i]];
    const double y = std::log(norms[keep[i]]);
    St[i + 1] = St[i] + t;
    Sy[i + 1] = Sy[i] + y;
    Stt[i + 1] = Stt[i] + t * t;
    Sty[i + 1] = Sty[i] + t * y;
    Syy[i + 1] = Syy[i] + y * y;
  }
  DecayFit best;
  double best_span = -1.0;
  bool found = false;
  for (std::size_t i = 0; i + kMinFitSamples <= N; ++i) {
    for (std::size_t j = i + kMinFitSamples - 1; j < N; ++j) {
      // consecutive samples only: the kept indices must be contiguous
      if (keep[j] - keep[i] != j - i) break;
      const double m = static_cast<double>(j - i + 1);
      const double st = St[j + 1] - St[i], sy = Sy[j + 1] - Sy[i];
      const double stt = Stt[j + 1] - Stt[i], sty = Sty[j + 1] - Sty[i], syy = Syy[j + 1] - Syy[i];
      const double vt = stt - st * st / m;
      const double cty = sty - st * sy / m;
      const double vy = syy - sy * sy / m;
      if (!(vt > 0.0)) continue;
      const double slope = cty / vt;
      const double intercept = (sy - slope * st) / m;
      const double ss_res = std::max(0.0, vy - slope * cty);
      const double r2 = vy > 0.0 ? 1.0 - ss_res / vy : 1.0;
      if (r2 < kMinRSquared) continue;
      const double span = times[keep[j]] - times[keep[i]];
      if (span >= best_span) {
        best_span = span;
        best.rate = -slope;
        best.M = std::exp(intercept);
        best.r_squared = r2;
        best.first = keep[i];
        best.last = keep[j];
        found = true;
      }
    }
  }
  if (!found) {
    // nothing clears the R^2 bar (beating between modes); fit the longest contiguous stretch instead
    std::size_t a = 0, run_start = 0, run_len = 0;
    for (std::size_t i = 0; i < N; ++i) {
      if (i > 0 && keep[i] != keep[i - 1] + 1) a = i;
      if (i - a + 1 > run_len) {
        run_len = i - a + 1;
        run_start = a;
      }
    }
    if (run_len < kMinFitSamples) {
      throw NumericalError("decay fit needs at least 10 consecutive samples above the 1e-13 noise floor");
    }
    const std::size_t i = run_start, j = run_start + run_len - 1;
    const double m = static_cast<double>(run_len);
    const double st = St[j + 1] - St[i], sy = Sy[j + 1] - Sy[i];
    const double stt = Stt[j + 1] - Stt[i], sty = Sty[j + 1] - Sty[i], syy = Syy[j + 1] - Syy[i];
    const double vt = stt - st * st / m, cty = sty - st * sy / m, vy = syy - sy * sy / m;
    const double slope = cty / vt;
    best.rate = -slope;
    best.M = std::exp((sy - slope * st) / m);
    best.r_squared = vy > 0.0 ? 1.0 - std::max(0.0, vy - slope * cty) / vy : 1.0;
    best.first = keep[i];
    best.last = keep[j];
  }
  best.log_linear = found;
  best.usable = N;
  return best;
}

Observability observability_constant(const MMatrix& m, const Spectrum& spectrum, double T) {
  if (!(T > 0.0)) throw ValidationError("horizon T must be > 0");
  const Eigen::MatrixXcd W = controllability_gramian(gg_star_matrix(m), spectrum, T);
  const Eigen::MatrixXcd block = mean_zero_block(W);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block);
  Observability ob;
  ob.T = T;
  ob.min_eigenvalue = es.eigenvalues()[0];
  ob.tolerance = 16.0 * std::numeric_limits<double>::epsilon() * es.eigenvalues().cwiseAbs().maxCoeff();
  const Eigen::VectorXcd v = es.eigenvectors().col(0);
  const int n = m.order();
  ob.minimizer = Eigen::VectorXcd::Zero(2 * n + 1);
  for (int k = -n, r = 0; k <= n; ++k) {
    if (k != 0) ob.minimizer[k + n] = v[r++];
  }
  if (!(ob.min_eigenvalue > ob.tolerance)) {
    std::ostringstream os;
    os << "observability Gramian is singular at T=" << T << " (min eigenvalue " << ob.min_eigenvalue
       << " <= tolerance " << ob.tolerance << "); near-null vector: " << describe_vector(ob.minimizer);
    throw NumericalError(os.str());
  }
  ob.delta = std::sqrt(ob.min_eigenvalue);
  return ob;
}

}  // namespace benjctl
