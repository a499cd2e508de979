#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace benjctl {

/// E(a, t) = integral_0^t e^{a s} ds, with the a -> 0 limit taken by a
/// Taylor series when |a| t < 1e-6.
std::complex<double> exp_integral(std::complex<double> a, double t);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Composite 20-point Gauss-Legendre rule on [a, b] with the given number of
/// equal panels.
QuadratureRule composite_gauss_legendre(double a, double b, int panels);

/// Panel count so that each panel spans at most one period of the fastest
/// oscillation (max_frequency, in rad per unit time), and at least
/// min_nodes nodes are used overall.
int panels_for(double length, double max_frequency, int min_nodes = 0);

template <class F>
auto integrate(const QuadratureRule& rule, F&& f) {
  using R = decltype(f(0.0));
  R acc{};
  for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.weights[i] * f(rule.nodes[i]);
  return acc;
}

}  // namespace benjctl
