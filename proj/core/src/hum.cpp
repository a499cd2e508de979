#include "benjctl/hum.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "benjctl/errors.hpp"
#include "benjctl/quadrature.hpp"

namespace benjctl {
namespace {

using LComplex = std::complex<long double>;
using LMatrix = Eigen::Matrix<LComplex, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<LComplex, Eigen::Dynamic, 1>;

// E(i w, T) in extended precision; the Gramian is solved in long double so the
// residual stays well below cond(W) * 1e-16.
LComplex exp_integral_l(long double w, long double T) {
  const long double z = w * T;
  if (std::fabs(z) < 1e-6L) return T * LComplex(1.0L - z * z / 6.0L, z / 2.0L - z * z * z / 24.0L);
  const long double s = std::sin(0.5L * z);
  return LComplex(std::sin(z), 2.0L * s * s) / w;
}

LMatrix gramian_l(const Eigen::MatrixXcd& gg, const Spectrum& spectrum, long double T) {
  const int n = spectrum.order();
  LMatrix W(2 * n + 1, 2 * n + 1);
  for (int k = -n; k <= n; ++k) {
    for (int l = -n; l <= n; ++l) {
      const long double w = static_cast<long double>(spectrum.lambda(l)) - spectrum.lambda(k);
      W(k + n, l + n) = LComplex(gg(k + n, l + n)) * exp_integral_l(w, T);
    }
  }
  return W;
}

}  // namespace

Eigen::MatrixXcd controllability_gramian(const Eigen::MatrixXcd& gg, const Spectrum& spectrum, double T) {
  return gramian_l(gg, spectrum, T).cast<Complex>();
}

Eigen::MatrixXcd controllability_gramian_quadrature(const Eigen::MatrixXcd& gg, const Spectrum& spectrum, double T,
                                                    int min_nodes) {
  const int n = spectrum.order();
  double wmax = 0.0;
  for (double l : spectrum.lambdas()) wmax = std::max(wmax, std::abs(l));
  const auto rule = composite_gauss_legendre(0.0, T, panels_for(T, 2.0 * wmax, min_nodes));
  Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(2 * n + 1, 2 * n + 1);
  Eigen::VectorXcd e(2 * n + 1);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    // integrand e^{-i l_k tau} (G^2)_{kl} e^{i l_l tau}
    for (int k = -n; k <= n; ++k) e[k + n] = std::polar(1.0, spectrum.lambda(k) * rule.nodes[i]);
    W.noalias() += rule.weights[i] * (e.conjugate().asDiagonal() * gg * e.asDiagonal());
  }
  return W;
}

HumControl HumControl::build(const ControlProblem& p, const Spectrum& spectrum, const MMatrix& m) {
  p.validate();
  const int n = p.n;
  HumControl hc;
  hc.n_ = n;
  hc.T_ = p.T;
  hc.gmat_ = m.operator_matrix();
  hc.lambdas_.resize(2 * n + 1);
  for (int k = -n; k <= n; ++k) hc.lambdas_[k + n] = spectrum.lambda(k);

  const LMatrix W = gramian_l(gg_star_matrix(m), spectrum, p.T);
  LMatrix W0l(2 * n, 2 * n);
  for (Eigen::Index i = 0, r = 0; i < W.rows(); ++i) {
    if (i == n) continue;
    for (Eigen::Index j = 0, c = 0; j < W.cols(); ++j) {
      if (j != n) W0l(r, c++) = W(i, j);
    }
    ++r;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(W0l.cast<Complex>(), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  Eigen::LLT<LMatrix> llt(W0l);
  if (llt.info() != Eigen::Success || !(lo > 0.0)) {
    std::ostringstream os;
    os << "controllability Gramian is not positive definite at T=" << p.T << " (min eigenvalue " << lo << ")";
    throw NumericalError(os.str());
  }
  hc.cond_ = hi / lo;

  const Eigen::VectorXcd d = reduce_to_zero_start(p, spectrum);
  LVector d0(2 * n);
  for (int k = -n, r = 0; k <= n; ++k) {
    if (k != 0) d0[r++] = LComplex(d[k + n]);
  }
  LVector y0 = llt.solve(d0);
  for (int it = 0; it < 2; ++it) y0 += llt.solve(LVector(d0 - W0l * y0));

  LVector y = LVector::Zero(2 * n + 1);
  for (int k = -n, r = 0; k <= n; ++k) {
    if (k != 0) y[k + n] = y0[r++];
  }
  const LVector wy = W * y;
  hc.y_ = y.cast<Complex>();
  hc.norm_ = std::sqrt(std::max(0.0L, (y.adjoint() * wy)(0).real()));
  const Eigen::VectorXcd a0 = evolve_free(p.u0.resized(n), p.T, spectrum).psi_coefficients();
  hc.terminal_.resize(2 * n + 1);
  for (int k = -n; k <= n; ++k) {
    hc.terminal_[k + n] = Complex(LComplex(a0[k + n]) + wy[k + n]);
  }
  return hc;
}

Eigen::VectorXcd HumControl::modes(double t) const {
  Eigen::VectorXcd v(y_.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = std::polar(1.0, lambdas_[k] * (T_ - t)) * y_[k];
  return gmat_ * v;
}

}  // namespace benjctl
