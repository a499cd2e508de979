#include "benjctl/random_state.hpp"

#include <cmath>

#include "benjctl/errors.hpp"

namespace benjctl {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

TorusFunction random_state(std::uint64_t seed, int n, double s, double norm) {
  Rng rng(seed);
  return random_state(rng, n, s, norm);
}

TorusFunction random_state(Rng& rng, int n, double s, double norm) {
  if (n < 1) throw ValidationError("random state needs order n >= 1");
  if (!(s >= 0.0)) throw ValidationError("Sobolev index s must be >= 0");
  if (!(norm >= 0.0) || !std::isfinite(norm)) throw ValidationError("requested norm must be >= 0");
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(2 * n + 1);
  for (int k = 1; k <= n; ++k) {
    const double a = 2.0 * rng.uniform() - 1.0;
    const double b = 2.0 * rng.uniform() - 1.0;
    const Complex v = Complex(a, b) * std::pow(1.0 + k, -s - 1.0);
    c[n + k] = v;
    c[n - k] = std::conj(v);
  }
  TorusFunction f = TorusFunction::from_coefficients(std::move(c), true);
  const double current = sobolev_norm(f, s);
  if (current == 0.0) return f;
  return f * (norm / current);
}

}  // namespace benjctl
