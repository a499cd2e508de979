#include <benchmark/benchmark.h>

#include "benjctl/hum.hpp"
#include "benjctl/moment_control.hpp"
#include "benjctl/random_state.hpp"
#include "benjctl/stabilization.hpp"

using namespace benjctl;

namespace {

Spectrum spectrum_for(int n) {
  return Spectrum::build(SystemParams::from_rationals(Rational::make(7, 3), Rational::make(3, 10)), n);
}

ControlProblem problem(int n, double T) {
  ControlProblem p;
  p.system = SystemParams::from_rationals(Rational::make(7, 3), Rational::make(3, 10));
  p.T = T;
  p.n = n;
  p.g = BumpProfile::raised_cosine(2 * n);
  p.u0 = random_state(1, n, 0.0, 1.0);
  p.u1 = random_state(2, n, 0.0, 1.0);
  return p;
}

}  // namespace

// Gram matrix factorization and inversion in extended precision.
static void BM_FamilyBuild(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto spec = spectrum_for(n);
  for (auto _ : state) benchmark::DoNotOptimize(BiorthogonalFamily::build(spec, 1.0));
}
BENCHMARK(BM_FamilyBuild)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_MMatrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto g = BumpProfile::raised_cosine(2 * n);
  for (auto _ : state) benchmark::DoNotOptimize(MMatrix::build(g, n));
}
BENCHMARK(BM_MMatrix)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

// Control synthesis with the family prebuilt.
static void BM_Synthesize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto p = problem(n, 1.0);
  auto fam = std::make_shared<const BiorthogonalFamily>(BiorthogonalFamily::build(spectrum_for(n), 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_control(p, fam));
}
BENCHMARK(BM_Synthesize)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_Hum(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto p = problem(n, 1.0);
  const auto spec = spectrum_for(n);
  const auto m = MMatrix::build(p.g, n);
  for (auto _ : state) benchmark::DoNotOptimize(HumControl::build(p, spec, m));
}
BENCHMARK(BM_Hum)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

// Closed-loop simulation by matrix exponential, 101 equally spaced outputs.
static void BM_ClosedLoop(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto spec = spectrum_for(n);
  const auto m = MMatrix::build(BumpProfile::raised_cosine(2 * n), n);
  const auto law = FeedbackLaw::gramian(build_L_lambda(m, spec, 1.0, 1.0), spec, m);
  const auto u0 = random_state(3, n, 0.0, 1.0);
  std::vector<double> times;
  for (int i = 0; i <= 100; ++i) times.push_back(0.1 * i);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_closed_loop(u0, law, times));
}
BENCHMARK(BM_ClosedLoop)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
