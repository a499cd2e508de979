#pragma once

// Reference values computed independently of the library code paths.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

namespace oracle {

using Complex = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

/// Fourier coefficient of the normalized raised cosine (2/w) cos^2(pi (x-c)/w)
/// on |x - c| < w/2, by direct integration of the closed-form profile.
inline Complex raised_cosine_coefficient(int k, double center = pi, double width = pi / 2) {
  const double a = 2.0 * pi / width;
  double I = 0.0;
  if (k == 0) {
    I = width / 2.0;
  } else if (std::abs(std::abs(k) - a) < 1e-12) {
    I = width / 4.0;
  } else {
    I = std::sin(k * width / 2.0) * a * a / (k * (a * a - static_cast<double>(k) * k));
  }
  return std::polar(1.0, -k * center) * I / (pi * width);
}

inline double raised_cosine_value(double x, double center = pi, double width = pi / 2) {
  double y = std::remainder(x - center, 2.0 * pi);
  if (std::abs(y) >= width / 2.0) return 0.0;
  const double c = std::cos(pi * y / width);
  return 2.0 / width * c * c;
}

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_m.
inline void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
  x.assign(m, 0.0);
  w.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double z = std::cos(pi * (i + 0.75) / (m + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int j = 2; j <= m; ++j) {
        const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      const double dp = m * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) {
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        break;
      }
    }
  }
}

/// Composite Gauss-Legendre integral of f over [a, b].
template <class F>
auto integrate(F&& f, double a, double b, int panels, int order = 16) {
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  using R = std::decay_t<decltype(f(a))>;
  R acc{};
  bool first = true;  // Eigen results start empty, so seed from the first term
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < order; ++i) {
      R term = (0.5 * h * w[i]) * f(lo + 0.5 * h * (x[i] + 1.0));
      if (first) {
        acc = std::move(term);
        first = false;
      } else {
        acc += term;
      }
    }
  }
  return acc;
}

/// lambda_k = k^3 + 2 mu k - alpha k |k|, evaluated directly.
inline double eigenvalue(int k, double alpha, double mu) {
  const double kd = k;
  return kd * kd * kd + 2.0 * mu * kd - alpha * kd * std::abs(kd);
}

/// integral_0^T e^{i w t} dt.
inline Complex exp_integral(double w, double T) {
  if (w == 0.0) return T;
  // e^{i wT/2} sin(wT/2) / (w/2) has no cancellation for small wT
  return std::polar(1.0, 0.5 * w * T) * (std::sin(0.5 * w * T) / (0.5 * w));
}

}  // namespace oracle
