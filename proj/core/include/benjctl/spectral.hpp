#pragma once

// Truncated Fourier representation of 2*pi-periodic functions.
//
// A TorusFunction of order n stores the Fourier coefficients
//   f^(k) = (1/2pi) * integral_0^{2pi} f(x) e^{-ikx} dx,   k = -n..n,
// so that f(x) = sum_k f^(k) e^{ikx}.  The orthonormal basis used by the
// control and stabilization code is psi_k(x) = e^{ikx}/sqrt(2pi); the
// coordinates of f in that basis are sqrt(2pi) * f^(k) (see psi_coefficients).

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>

#include <Eigen/Core>

namespace benjctl {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline const double kSqrtTwoPi = std::sqrt(kTwoPi);

class TorusFunction {
 public:
  /// The zero function of order 0.
  TorusFunction();

  /// The zero function of order n.
  explicit TorusFunction(int n, bool real = true);

  /// Builds from f^(k), k=-n..n (vector of length 2n+1, index k+n).
  /// With real=true the coefficients are symmetrized to f^(-k) = conj(f^(k));
  /// an antisymmetric residue above 1e-10 (relative) throws ValidationError.
  static TorusFunction from_coefficients(Eigen::VectorXcd coeffs, bool real);

  /// Coefficients produced by an operation that preserves real functions:
  /// with real=true they are projected onto Hermitian symmetry without the
  /// residue check, since any residue is rounding.
  static TorusFunction from_operation(Eigen::VectorXcd coeffs, bool real);

  /// Same, from coordinates in the orthonormal psi_k basis.
  static TorusFunction from_psi_coefficients(const Eigen::VectorXcd& psi, bool real);

  /// psi_k = e^{ikx}/sqrt(2pi) at order n (|k| <= n).
  static TorusFunction basis(int k, int n);

  /// The constant function c.
  static TorusFunction constant(double c, int n);

  int order() const { return n_; }
  bool is_real() const { return real_; }

  /// f^(k); zero for |k| > order().
  Complex coefficient(int k) const;
  const Eigen::VectorXcd& coefficients() const { return coeffs_; }
  Eigen::VectorXcd psi_coefficients() const { return coeffs_ * kSqrtTwoPi; }

  /// Zero-padded or truncated copy at order n.
  TorusFunction resized(int n) const;

  /// Pointwise value at x (direct summation).
  Complex operator()(double x) const;

  TorusFunction operator+(const TorusFunction& other) const;
  TorusFunction operator-(const TorusFunction& other) const;
  TorusFunction operator-() const;
  TorusFunction operator*(double a) const;
  TorusFunction operator*(Complex a) const;

 private:
  TorusFunction(int n, Eigen::VectorXcd coeffs, bool real);

  int n_ = 0;
  Eigen::VectorXcd coeffs_;
  bool real_ = true;
};

inline TorusFunction operator*(double a, const TorusFunction& f) { return f * a; }
inline TorusFunction operator*(Complex a, const TorusFunction& f) { return f * a; }

/// sqrt(2pi * sum_k (1+k^2)^s |f^(k)|^2).
double sobolev_norm(const TorusFunction& f, double s);

/// H^s inner product 2pi * sum_k (1+k^2)^s f^(k) conj(g^(k)).
Complex inner_product(const TorusFunction& f, const TorusFunction& g, double s = 0.0);

/// Fourier multiplier -i sgn(k).
TorusFunction hilbert_transform(const TorusFunction& f);

/// [f] = f^(0) = (1/2pi) integral f.
Complex mean(const TorusFunction& f);

TorusFunction project_mean_zero(const TorusFunction& f);

/// Pointwise product; the result has order f.order() + g.order() and is exact.
TorusFunction multiply(const TorusFunction& f, const TorusFunction& g);

/// Max over k of |f^(k) - conj(f^(-k))|, scaled by max |f^(k)| (0 for f = 0).
double hermitian_defect(const Eigen::VectorXcd& coeffs);

/// Values at the m uniform nodes x_j = 2pi j/m.
Eigen::VectorXcd synthesize(const TorusFunction& f, std::size_t m);

/// Uniform-grid quadrature of the Fourier coefficients up to order n.
/// Requires samples.size() >= 2n+1, otherwise the result would alias.
TorusFunction analyze(std::span<const Complex> samples, int n, bool real);
TorusFunction analyze(std::span<const double> samples, int n);

/// Grid node x_j = 2pi j/m.
inline double grid_node(std::size_t j, std::size_t m) {
  return kTwoPi * static_cast<double>(j) / static_cast<double>(m);
}

}  // namespace benjctl
