#include "benjctl/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "benjctl/errors.hpp"

namespace benjctl {
namespace {

constexpr std::size_t M = BumpProfile::kSamples;
constexpr int kQuadraturePairs = 20;

double periodic_offset(double x, double center) {
  double d = std::remainder(x - center, kTwoPi);
  return d;
}

void check_support(double center, double width) {
  if (!(width > 0.0) || !(width < kTwoPi)) throw ValidationError("bump width must lie in (0, 2pi)");
  if (center - width / 2 < 0.0 || center + width / 2 > kTwoPi) {
    throw ValidationError("bump support (center +- width/2) must lie inside [0, 2pi]");
  }
}

Eigen::VectorXd sample_profile(double center, double width, bool exp_bump) {
  Eigen::VectorXd raw(static_cast<Eigen::Index>(M));
  for (std::size_t i = 0; i < M; ++i) {
    const double r = 2.0 * periodic_offset(grid_node(i, M), center) / width;
    double v = 0.0;
    if (std::abs(r) < 1.0) {
      if (exp_bump) {
        v = std::exp(-1.0 / (1.0 - r * r));
      } else {
        const double c = std::cos(0.5 * std::numbers::pi * r);
        v = c * c;
      }
    }
    raw[static_cast<Eigen::Index>(i)] = v;
  }
  return raw;
}

}  // namespace

std::string to_string(BumpKind kind) {
  switch (kind) {
    case BumpKind::uniform: return "uniform";
    case BumpKind::raised_cosine: return "raised_cosine";
    case BumpKind::smooth_exp_bump: return "smooth_exp_bump";
    case BumpKind::explicit_coefficients: return "explicit";
  }
  return "unknown";
}

std::optional<BumpKind> parse_bump_kind(std::string_view name) {
  if (name == "uniform") return BumpKind::uniform;
  if (name == "raised_cosine") return BumpKind::raised_cosine;
  if (name == "smooth_exp_bump") return BumpKind::smooth_exp_bump;
  if (name == "explicit") return BumpKind::explicit_coefficients;
  return std::nullopt;
}

BumpProfile BumpProfile::from_samples(BumpKind kind, Eigen::VectorXd samples, int order, double center,
                                      double width, double normalization) {
  BumpProfile b;
  b.kind_ = kind;
  b.center_ = center;
  b.width_ = width;
  b.normalization_ = normalization;
  Eigen::FFT<double> fft;
  Eigen::VectorXcd in = samples.cast<Complex>();
  Eigen::VectorXcd out;
  fft.fwd(out, in);
  b.spectrum_ = out / static_cast<double>(M);
  b.samples_ = std::move(samples);
  b.set_order(order);
  return b;
}

void BumpProfile::set_order(int order) {
  if (order < 0 || static_cast<std::size_t>(order) >= M / 2) {
    throw ValidationError("bump coefficient order must lie in [0, " + std::to_string(M / 2 - 1) + "]");
  }
  order_ = order;
  coeffs_.resize(2 * order + 1);
  for (int k = -order; k <= order; ++k) {
    coeffs_[k + order] = spectrum_[static_cast<Eigen::Index>((k + static_cast<long>(M)) % static_cast<long>(M))];
  }
  if (kind_ == BumpKind::uniform) {
    coeffs_.setZero();
    coeffs_[order] = 1.0 / kTwoPi;
  }
  tail_l1_ = 0.0;
  for (int k = order + 1; static_cast<std::size_t>(k) < M / 2; ++k) {
    tail_l1_ += std::abs(spectrum_[k]) + std::abs(spectrum_[static_cast<Eigen::Index>(M) - k]);
  }
  if (kind_ == BumpKind::uniform) tail_l1_ = 0.0;
}

BumpProfile BumpProfile::with_order(int order) const {
  BumpProfile b = *this;
  b.set_order(order);
  return b;
}

BumpProfile BumpProfile::uniform(int order) {
  Eigen::VectorXd s = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(M), 1.0 / kTwoPi);
  return from_samples(BumpKind::uniform, std::move(s), order, std::numbers::pi, kTwoPi, 1.0 / kTwoPi);
}

BumpProfile BumpProfile::raised_cosine(int order, double center, double width) {
  check_support(center, width);
  Eigen::VectorXd raw = sample_profile(center, width, false);
  const double c = 1.0 / (kTwoPi * raw.mean());
  return from_samples(BumpKind::raised_cosine, raw * c, order, center, width, c);
}

BumpProfile BumpProfile::smooth_exp_bump(int order, double center, double width) {
  check_support(center, width);
  Eigen::VectorXd raw = sample_profile(center, width, true);
  const double c = 1.0 / (kTwoPi * raw.mean());
  return from_samples(BumpKind::smooth_exp_bump, raw * c, order, center, width, c);
}

BumpProfile BumpProfile::from_coefficients(const Eigen::VectorXcd& coeffs) {
  if (coeffs.size() % 2 == 0) throw ValidationError("bump coefficients must cover k = -m..m");
  const int m = static_cast<int>(coeffs.size() / 2);
  if (static_cast<std::size_t>(m) >= M / 2) throw ValidationError("too many bump coefficients");
  if (hermitian_defect(coeffs) > 1e-12) throw ValidationError("bump coefficients do not describe a real g");
  if (std::abs(coeffs[m] - 1.0 / kTwoPi) > 1e-12) {
    throw ValidationError("bump must have unit integral: g^(0) = 1/(2pi)");
  }
  Eigen::VectorXcd full = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(M));
  for (int k = -m; k <= m; ++k) full[(k + static_cast<long>(M)) % static_cast<long>(M)] = coeffs[k + m];
  Eigen::FFT<double> fft;
  Eigen::VectorXcd values;
  fft.inv(values, full);
  Eigen::VectorXd samples = (values * static_cast<double>(M)).real();
  if (samples.minCoeff() < -1e-12 * samples.cwiseAbs().maxCoeff()) {
    std::ostringstream os;
    os << "bump from explicit coefficients is negative somewhere (min sample " << samples.minCoeff() << ")";
    throw ValidationError(os.str());
  }
  BumpProfile b;
  b.kind_ = BumpKind::explicit_coefficients;
  b.samples_ = std::move(samples);
  b.spectrum_ = full;
  b.set_order(m);
  return b;
}

Complex BumpProfile::coefficient(int k) const {
  return std::abs(k) > order_ ? Complex(0.0) : coeffs_[k + order_];
}

MMatrix MMatrix::build(const BumpProfile& g, int n) {
  if (n < 1) throw ValidationError("truncation order n must be >= 1");
  if (g.order() < 2 * n) {
    throw ValidationError("bump coefficients needed up to mode 2n = " + std::to_string(2 * n));
  }
  MMatrix mm;
  mm.n_ = n;
  mm.m_.resize(2 * n + 1, 2 * n + 1);
  for (int j = -n; j <= n; ++j) {
    for (int k = -n; k <= n; ++k) {
      mm.m_(j + n, k + n) = g.coefficient(k - j) - kTwoPi * g.coefficient(-j) * g.coefficient(k);
    }
    // g^(-j) (1 - 2 pi g^(0)) vanishes since g has unit integral; store the exact zero
    // so that huge control amplitudes cannot leak rounding into the mean.
    mm.m_(j + n, n) = 0.0;
  }
  mm.beta_ = std::numeric_limits<double>::infinity();
  for (int k = -n; k <= n; ++k) {
    if (k != 0) mm.beta_ = std::min(mm.beta_, mm.m_(k + n, k + n).real());
  }
  if (!(mm.beta_ > 0.0)) {
    std::ostringstream os;
    os << "bump violates m_kk >= beta > 0 at n=" << n << " (beta=" << mm.beta_ << ")";
    throw ValidationError(os.str());
  }

  // Grid sums A(q) = sum_i g(x_i) e^{i q x_i} and B(q) = sum_i g(x_i)^2 e^{i q x_i}
  // give ||G psi_k||^2 and grid-quadrature m entries without per-mode trig loops.
  const auto& s = g.samples();
  const double w = kTwoPi / static_cast<double>(M);
  Eigen::FFT<double> fft;
  Eigen::VectorXcd F1, F2;
  const Eigen::VectorXcd s1 = s.cast<Complex>();
  const Eigen::VectorXcd s2 = s.array().square().matrix().cast<Complex>();
  fft.fwd(F1, s1);
  fft.fwd(F2, s2);
  const int len = static_cast<int>(M);
  const auto wrap = [len](int q) { return static_cast<Eigen::Index>(((-q) % len + len) % len); };
  const auto A = [&](int q) { return F1[wrap(q)]; };
  const auto B = [&](int q) { return F2[wrap(q)]; };
  const auto avg = [&](int k) { return w * A(k) / kSqrtTwoPi; };  // integral of g psi_k

  mm.delta_k_ = Eigen::VectorXd::Zero(2 * n + 1);
  mm.delta_ = std::numeric_limits<double>::infinity();
  const double b0 = B(0).real();
  for (int k = -n; k <= n; ++k) {
    if (k == 0) continue;
    const Complex a = avg(k);
    const double d = w * (b0 / kTwoPi - 2.0 * std::real(std::conj(a) * B(k)) / kSqrtTwoPi + std::norm(a) * b0);
    mm.delta_k_[k + n] = d;
    mm.delta_ = std::min(mm.delta_, d);
  }

  std::mt19937_64 rng(0x6d6d6174ULL + static_cast<unsigned>(n));
  std::uniform_int_distribution<int> pick(-n, n);
  for (int p = 0; p < kQuadraturePairs; ++p) {
    const int j = pick(rng);
    const int k = pick(rng);
    const Complex quad = w * A(j - k) / kTwoPi - avg(j) * w * A(-k) / kSqrtTwoPi;
    mm.quadrature_deviation_ = std::max(mm.quadrature_deviation_, std::abs(mm(j, k) - quad));
  }
  return mm;
}

Complex m_entry_quadrature(const BumpProfile& g, int j, int k) {
  const auto& s = g.samples();
  const double w = kTwoPi / static_cast<double>(M);
  Complex avg = 0.0;
  for (std::size_t i = 0; i < M; ++i) avg += s[i] * std::polar(1.0 / kSqrtTwoPi, j * grid_node(i, M));
  avg *= w;
  Complex acc = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    const double x = grid_node(i, M);
    const Complex g_psi = s[i] * (std::polar(1.0 / kSqrtTwoPi, j * x) - avg);
    acc += g_psi * std::polar(1.0 / kSqrtTwoPi, -k * x);
  }
  return acc * w;
}

namespace {

// Full-band coefficients of g (h - integral g h), modes -(nh + ng)..(nh + ng).
Eigen::VectorXcd apply_G_full(const BumpProfile& g, const TorusFunction& h, int band) {
  const int nh = h.order();
  Complex integral = 0.0;
  for (int j = -nh; j <= nh; ++j) integral += g.coefficient(-j) * h.coefficient(j);
  integral *= kTwoPi;
  Eigen::VectorXcd out(2 * band + 1);
  for (int k = -band; k <= band; ++k) {
    Complex acc = -g.coefficient(k) * integral;
    for (int j = -nh; j <= nh; ++j) acc += g.coefficient(k - j) * h.coefficient(j);
    out[k + band] = acc;
  }
  return out;
}

}  // namespace

TorusFunction apply_G(const BumpProfile& g, const TorusFunction& h, int order) {
  if (order < 0) order = h.order();
  Eigen::VectorXcd c = apply_G_full(g, h, order);
  c[order] = 0.0;  // exact zero mean: g^(0) * 2pi = 1 cancels the product's mean
  return TorusFunction::from_operation(std::move(c), h.is_real());
}

double apply_G_spillover(const BumpProfile& g, const TorusFunction& h, int order) {
  const int band = h.order() + g.order();
  if (order >= band) return 0.0;
  const Eigen::VectorXcd c = apply_G_full(g, h, band);
  double acc = 0.0;
  for (int k = -band; k <= band; ++k) {
    if (std::abs(k) > order) acc += std::norm(c[k + band]);
  }
  return std::sqrt(kTwoPi * acc);
}

Eigen::MatrixXcd gg_star_matrix(const MMatrix& m) {
  const Eigen::MatrixXcd G = m.operator_matrix();
  Eigen::MatrixXcd gg = G * G.adjoint();
  return 0.5 * (gg + gg.adjoint());
}

Eigen::MatrixXcd gg_star_matrix(const BumpProfile& g, int n) { return gg_star_matrix(MMatrix::build(g, n)); }

Complex propagator_multiplier(int k, double t, double alpha, double mu) {
  return std::polar(1.0, -eigenvalue(k, alpha, mu) * t);
}

TorusFunction evolve_free(const TorusFunction& u0, double t, double alpha, double mu) {
  const int n = u0.order();
  Eigen::VectorXcd c = u0.coefficients();
  for (int k = -n; k <= n; ++k) c[k + n] *= propagator_multiplier(k, t, alpha, mu);
  return TorusFunction::from_operation(std::move(c), u0.is_real());
}

TorusFunction evolve_free(const TorusFunction& u0, double t, const Spectrum& spectrum) {
  const int n = u0.order();
  if (spectrum.order() < n) throw ValidationError("spectrum order is below the state's order");
  Eigen::VectorXcd c = u0.coefficients();
  for (int k = -n; k <= n; ++k) c[k + n] *= std::polar(1.0, -spectrum.lambda(k) * t);
  return TorusFunction::from_operation(std::move(c), u0.is_real());
}

}  // namespace benjctl
