#pragma once

#include <cstdint>
#include <random>

#include "benjctl/spectral.hpp"

namespace benjctl {

/// The toolkit's random stream: std::mt19937_64 seeded with the 64-bit seed;
/// a uniform double in [0, 1) is (x >> 11) * 2^-53 for each raw draw x.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer, used to derive independent per-scenario seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Real mean-zero function of order n: for k = 1..n, f^(k) = (a + i b) (1+k)^(-s-1)
/// with a, b uniform in [-1, 1) drawn in that order, f^(-k) = conj(f^(k)), then
/// rescaled so that sobolev_norm(f, s) = norm.
TorusFunction random_state(std::uint64_t seed, int n, double s, double norm);

/// Same, drawing from an existing stream.
TorusFunction random_state(Rng& rng, int n, double s, double norm);

}  // namespace benjctl
