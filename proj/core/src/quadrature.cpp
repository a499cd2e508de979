#include "benjctl/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "benjctl/errors.hpp"

namespace benjctl {

std::complex<double> exp_integral(std::complex<double> a, double t) {
  const std::complex<double> z = a * t;
  if (std::abs(z) < 1e-6) {
    // t (1 + z/2 + z^2/6 + z^3/24); the next term is below 1e-25 relative.
    return t * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)));
  }
  // exp(z) - 1 without cancellation for small |z|.
  const double x = z.real();
  const double y = z.imag();
  const double s = std::sin(0.5 * y);
  const std::complex<double> em1(std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y));
  return em1 / a;
}

QuadratureRule composite_gauss_legendre(double a, double b, int panels) {
  if (panels < 1) throw ValidationError("quadrature needs at least one panel");
  using GL = boost::math::quadrature::gauss<double, 20>;
  const auto& abscissa = GL::abscissa();
  const auto& weights = GL::weights();
  QuadratureRule rule;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * 20);
  rule.weights.reserve(static_cast<std::size_t>(panels) * 20);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    const double half = 0.5 * h;
    // boost stores the non-negative half of the symmetric rule.
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      if (abscissa[i] == 0.0) {
        rule.nodes.push_back(mid);
        rule.weights.push_back(weights[i] * half);
        continue;
      }
      rule.nodes.push_back(mid - half * abscissa[i]);
      rule.weights.push_back(weights[i] * half);
      rule.nodes.push_back(mid + half * abscissa[i]);
      rule.weights.push_back(weights[i] * half);
    }
  }
  return rule;
}

int panels_for(double length, double max_frequency, int min_nodes) {
  const double periods = length * std::abs(max_frequency) / (2.0 * M_PI);
  const int by_frequency = static_cast<int>(std::ceil(periods));
  const int by_count = (min_nodes + 19) / 20;
  return std::max({1, by_frequency, by_count});
}

}  // namespace benjctl
