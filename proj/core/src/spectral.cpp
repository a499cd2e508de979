#include "benjctl/spectral.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "benjctl/errors.hpp"

namespace benjctl {
namespace {

constexpr double kRealResidueTolerance = 1e-10;

Eigen::VectorXcd symmetrize(const Eigen::VectorXcd& c) {
  const Eigen::Index size = c.size();
  Eigen::VectorXcd out(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    out[i] = 0.5 * (c[i] + std::conj(c[size - 1 - i]));
  }
  return out;
}

int order_of(Eigen::Index size) {
  if (size < 1 || size % 2 == 0) {
    throw ValidationError("coefficient vector must have odd length 2n+1, got " +
                          std::to_string(size));
  }
  return static_cast<int>((size - 1) / 2);
}

}  // namespace

TorusFunction::TorusFunction() : TorusFunction(0) {}

TorusFunction::TorusFunction(int n, bool real)
    : n_(n), coeffs_(Eigen::VectorXcd::Zero(2 * n + 1)), real_(real) {
  if (n < 0) throw ValidationError("truncation order must be >= 0");
}

TorusFunction::TorusFunction(int n, Eigen::VectorXcd coeffs, bool real)
    : n_(n), coeffs_(std::move(coeffs)), real_(real) {}

TorusFunction TorusFunction::from_coefficients(Eigen::VectorXcd coeffs, bool real) {
  const int n = order_of(coeffs.size());
  if (!real) return TorusFunction(n, std::move(coeffs), false);
  const double defect = hermitian_defect(coeffs);
  if (defect > kRealResidueTolerance) {
    throw ValidationError("coefficients declared real violate Hermitian symmetry (relative residue " +
                          std::to_string(defect) + ")");
  }
  return TorusFunction(n, symmetrize(coeffs), true);
}

TorusFunction TorusFunction::from_operation(Eigen::VectorXcd coeffs, bool real) {
  const int n = order_of(coeffs.size());
  if (!real) return TorusFunction(n, std::move(coeffs), false);
  return TorusFunction(n, symmetrize(coeffs), true);
}

TorusFunction TorusFunction::from_psi_coefficients(const Eigen::VectorXcd& psi, bool real) {
  return from_coefficients(psi / kSqrtTwoPi, real);
}

TorusFunction TorusFunction::basis(int k, int n) {
  if (std::abs(k) > n) throw ValidationError("basis index outside truncation");
  TorusFunction f(n, k == 0);
  f.coeffs_[k + n] = 1.0 / kSqrtTwoPi;
  return f;
}

TorusFunction TorusFunction::constant(double c, int n) {
  TorusFunction f(n, true);
  f.coeffs_[n] = c;
  return f;
}

Complex TorusFunction::coefficient(int k) const {
  if (std::abs(k) > n_) return {0.0, 0.0};
  return coeffs_[k + n_];
}

TorusFunction TorusFunction::resized(int n) const {
  TorusFunction out(n, real_);
  const int m = std::min(n, n_);
  for (int k = -m; k <= m; ++k) out.coeffs_[k + n] = coeffs_[k + n_];
  return out;
}

Complex TorusFunction::operator()(double x) const {
  Complex sum{0.0, 0.0};
  for (int k = -n_; k <= n_; ++k) sum += coeffs_[k + n_] * std::polar(1.0, k * x);
  return sum;
}

TorusFunction TorusFunction::operator+(const TorusFunction& other) const {
  const int n = std::max(n_, other.n_);
  TorusFunction a = resized(n);
  a.coeffs_ += other.resized(n).coeffs_;
  a.real_ = real_ && other.real_;
  return a;
}

TorusFunction TorusFunction::operator-(const TorusFunction& other) const { return *this + (-other); }

TorusFunction TorusFunction::operator-() const { return TorusFunction(n_, -coeffs_, real_); }

TorusFunction TorusFunction::operator*(double a) const { return TorusFunction(n_, coeffs_ * a, real_); }

TorusFunction TorusFunction::operator*(Complex a) const {
  return TorusFunction(n_, coeffs_ * a, real_ && a.imag() == 0.0);
}

double sobolev_norm(const TorusFunction& f, double s) {
  return std::sqrt(std::max(0.0, inner_product(f, f, s).real()));
}

Complex inner_product(const TorusFunction& f, const TorusFunction& g, double s) {
  const int n = std::min(f.order(), g.order());
  Complex sum{0.0, 0.0};
  for (int k = -n; k <= n; ++k) {
    const double weight = std::pow(1.0 + static_cast<double>(k) * k, s);
    sum += weight * f.coefficient(k) * std::conj(g.coefficient(k));
  }
  return kTwoPi * sum;
}

TorusFunction hilbert_transform(const TorusFunction& f) {
  const int n = f.order();
  Eigen::VectorXcd c = f.coefficients();
  for (int k = -n; k <= n; ++k) {
    const double sgn = (k > 0) - (k < 0);
    c[k + n] *= Complex(0.0, -sgn);
  }
  return TorusFunction::from_operation(std::move(c), f.is_real());
}

Complex mean(const TorusFunction& f) { return f.coefficient(0); }

TorusFunction project_mean_zero(const TorusFunction& f) {
  Eigen::VectorXcd c = f.coefficients();
  c[f.order()] = 0.0;
  return TorusFunction::from_operation(std::move(c), f.is_real());
}

TorusFunction multiply(const TorusFunction& f, const TorusFunction& g) {
  const int nf = f.order();
  const int ng = g.order();
  const int n = nf + ng;
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(2 * n + 1);
  for (int a = -nf; a <= nf; ++a) {
    const Complex fa = f.coefficient(a);
    if (fa == Complex{}) continue;
    for (int b = -ng; b <= ng; ++b) c[a + b + n] += fa * g.coefficient(b);
  }
  return TorusFunction::from_operation(std::move(c), f.is_real() && g.is_real());
}

double hermitian_defect(const Eigen::VectorXcd& coeffs) {
  const double scale = coeffs.size() ? coeffs.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  const Eigen::Index size = coeffs.size();
  for (Eigen::Index i = 0; i < size; ++i) {
    worst = std::max(worst, std::abs(coeffs[i] - std::conj(coeffs[size - 1 - i])));
  }
  return worst / scale;
}

Eigen::VectorXcd synthesize(const TorusFunction& f, std::size_t m) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    Complex v = f(grid_node(j, m));
    if (f.is_real()) v = {v.real(), 0.0};
    out[static_cast<Eigen::Index>(j)] = v;
  }
  return out;
}

TorusFunction analyze(std::span<const Complex> samples, int n, bool real) {
  const std::size_t m = samples.size();
  if (n < 0) throw ValidationError("truncation order must be >= 0");
  if (m < static_cast<std::size_t>(2 * n + 1)) {
    throw ValidationError("aliasing: " + std::to_string(m) + " samples cannot resolve order " +
                          std::to_string(n) + " (need at least " + std::to_string(2 * n + 1) + ")");
  }
  Eigen::VectorXcd c(2 * n + 1);
  for (int k = -n; k <= n; ++k) {
    Complex sum{0.0, 0.0};
    for (std::size_t j = 0; j < m; ++j) sum += samples[j] * std::polar(1.0, -k * grid_node(j, m));
    c[k + n] = sum / static_cast<double>(m);
  }
  return TorusFunction::from_coefficients(std::move(c), real);
}

TorusFunction analyze(std::span<const double> samples, int n) {
  std::vector<Complex> z(samples.begin(), samples.end());
  return analyze(std::span<const Complex>(z), n, true);
}

}  // namespace benjctl
