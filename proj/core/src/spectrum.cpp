#include "benjctl/spectrum.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "benjctl/errors.hpp"

namespace benjctl {
namespace {

using Wide = __int128;

constexpr double kNearResonanceRatio = 1e-3;

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Scaled integer eigenvalues: lambda_k * den with den = lcm(alpha.den, mu.den).
std::vector<Wide> exact_scaled_lambdas(const SystemParams& p, int n) {
  const Rational& a = *p.alpha_exact;
  const Rational& m = *p.mu_exact;
  const Wide den = std::lcm(a.den, m.den);
  const Wide a_scale = den / a.den;
  const Wide m_scale = den / m.den;
  std::vector<Wide> out;
  out.reserve(static_cast<std::size_t>(2 * n + 1));
  for (int k = -n; k <= n; ++k) {
    const Wide kk = k;
    out.push_back(kk * kk * kk * den + 2 * m.num * m_scale * kk - a.num * a_scale * kk * (k < 0 ? -kk : kk));
  }
  return out;
}

std::vector<Cluster> group_exact(const std::vector<Wide>& scaled, int n) {
  std::map<Wide, Cluster> by_value;
  for (int k = -n; k <= n; ++k) by_value[scaled[static_cast<std::size_t>(k + n)]].push_back(k);
  std::vector<Cluster> out;
  out.reserve(by_value.size());
  for (auto& [value, members] : by_value) out.push_back(std::move(members));
  return out;
}

std::vector<Cluster> group_tolerance(const std::vector<double>& lambdas, int n, double tol) {
  std::vector<int> order(static_cast<std::size_t>(2 * n + 1));
  std::iota(order.begin(), order.end(), -n);
  auto lam = [&](int k) { return lambdas[static_cast<std::size_t>(k + n)]; };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return lam(a) < lam(b); });
  std::vector<Cluster> out;
  for (int k : order) {
    if (!out.empty()) {
      const double head = lam(out.back().front());
      const double scale = std::max({1.0, std::abs(head), std::abs(lam(k))});
      if (std::abs(lam(k) - head) <= tol * scale) {
        out.back().push_back(k);
        continue;
      }
    }
    out.push_back({k});
  }
  for (auto& c : out) std::sort(c.begin(), c.end());
  return out;
}

void check_sizes(const std::vector<Cluster>& cs, const SystemParams& p) {
  for (const auto& c : cs) {
    if (c.size() > 3) {
      std::ostringstream os;
      os << "cluster of " << c.size() << " modes with equal eigenvalue (alpha=" << p.alpha
         << ", mu=" << p.mu << "): {";
      for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
      os << "}; at most 3 modes can share an eigenvalue";
      throw NumericalError(os.str());
    }
  }
}

double min_gap(const std::vector<double>& sorted_distinct) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sorted_distinct.size(); ++i) {
    g = std::min(g, sorted_distinct[i] - sorted_distinct[i - 1]);
  }
  return g;
}

}  // namespace

Rational Rational::make(std::int64_t num, std::int64_t den) {
  if (den == 0) throw ValidationError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  return g > 1 ? Rational{num / g, den / g} : Rational{num, den};
}

std::optional<Rational> Rational::parse(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = parse_int(trim(text.substr(0, slash)));
    auto den = parse_int(trim(text.substr(slash + 1)));
    if (!num || !den || *den == 0) return std::nullopt;
    return make(*num, *den);
  }
  bool negative = false;
  if (text.front() == '+' || text.front() == '-') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  const auto dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (frac.size() > 15 || whole.size() > 12 || (whole.empty() && frac.empty())) return std::nullopt;
  std::int64_t num = 0;
  std::int64_t den = 1;
  for (char ch : whole) {
    if (ch < '0' || ch > '9') return std::nullopt;
    num = num * 10 + (ch - '0');
  }
  for (char ch : frac) {
    if (ch < '0' || ch > '9') return std::nullopt;
    num = num * 10 + (ch - '0');
    den *= 10;
  }
  return make(negative ? -num : num, den);
}

std::string Rational::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

SystemParams SystemParams::from_rationals(Rational alpha, Rational mu) {
  return SystemParams{alpha.value(), mu.value(), alpha, mu};
}

void SystemParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be > 0");
  if (!std::isfinite(mu)) throw ValidationError("mu must be finite");
  if (alpha_exact && alpha_exact->num <= 0) throw ValidationError("alpha must be > 0");
}

double eigenvalue(int k, double alpha, double mu) {
  const double kd = k;
  return kd * kd * kd + 2.0 * mu * kd - alpha * kd * std::abs(kd);
}

Spectrum Spectrum::build(const SystemParams& params, int n) {
  params.validate();
  if (n < 1) throw ValidationError("truncation order n must be >= 1");
  Spectrum s;
  s.params_ = params;
  s.n_ = n;
  s.exact_ = params.has_exact();
  s.lambdas_.resize(static_cast<std::size_t>(2 * n + 1));
  for (int k = -n; k <= n; ++k) s.lambdas_[static_cast<std::size_t>(k + n)] = eigenvalue(k, params.alpha, params.mu);

  if (s.exact_) {
    const auto scaled = exact_scaled_lambdas(params, n);
    s.clusters_ = group_exact(scaled, n);
    // Snap every eigenvalue to the correctly rounded exact value so that
    // cluster members are bit-identical.
    const Wide den = std::lcm(params.alpha_exact->den, params.mu_exact->den);
    for (int k = -n; k <= n; ++k) {
      const Wide v = scaled[static_cast<std::size_t>(k + n)];
      s.lambdas_[static_cast<std::size_t>(k + n)] =
          static_cast<double>(static_cast<long double>(v) / static_cast<long double>(den));
    }
  } else {
    s.clusters_ = group_tolerance(s.lambdas_, n, kDefaultRelTol);
  }
  check_sizes(s.clusters_, params);

  s.cluster_of_.assign(static_cast<std::size_t>(2 * n + 1), -1);
  s.distinct_.reserve(s.clusters_.size());
  for (std::size_t c = 0; c < s.clusters_.size(); ++c) {
    const double value = s.lambdas_[static_cast<std::size_t>(s.clusters_[c].front() + n)];
    s.distinct_.push_back(value);
    for (int k : s.clusters_[c]) {
      s.cluster_of_[static_cast<std::size_t>(k + n)] = static_cast<int>(c);
      s.lambdas_[static_cast<std::size_t>(k + n)] = value;
    }
  }

  s.window_bound_ = static_cast<int>(std::floor(1.5 * params.alpha)) + 1;
  if (s.distinct_.size() >= 2) {
    s.gap_gamma_ = benjctl::gap_gamma(s);
    std::vector<double> windowed;
    for (std::size_t c = 0; c < s.clusters_.size(); ++c) {
      const bool inside = std::any_of(s.clusters_[c].begin(), s.clusters_[c].end(),
                                      [&](int k) { return std::abs(k) <= s.window_bound_; });
      if (inside) windowed.push_back(s.distinct_[c]);
    }
    s.gap_gamma_window_ = windowed.size() >= 2 ? min_gap(windowed) : s.gap_gamma_;

    std::vector<double> gaps;
    for (std::size_t i = 1; i < s.distinct_.size(); ++i) gaps.push_back(s.distinct_[i] - s.distinct_[i - 1]);
    std::vector<double> sorted_gaps = gaps;
    std::nth_element(sorted_gaps.begin(), sorted_gaps.begin() + sorted_gaps.size() / 2, sorted_gaps.end());
    const double typical = sorted_gaps[sorted_gaps.size() / 2];
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      if (gaps[i] < kNearResonanceRatio * typical) {
        std::ostringstream os;
        os << "near-resonant eigenvalues " << s.distinct_[i] << " (modes " << s.clusters_[i].front() << ") and "
           << s.distinct_[i + 1] << " (modes " << s.clusters_[i + 1].front() << ") differ by " << gaps[i]
           << "; the Gram matrix of exponentials will be ill-conditioned";
        s.warnings_.push_back(os.str());
      }
    }
  }
  return s;
}

std::vector<Cluster> clusters(const Spectrum& spectrum, double tol) {
  if (tol < 0.0) throw ValidationError("cluster tolerance must be >= 0");
  const int n = spectrum.order();
  std::vector<Cluster> out;
  if (tol == 0.0 && spectrum.exact_clustering()) {
    out = group_exact(exact_scaled_lambdas(spectrum.params(), n), n);
  } else {
    std::vector<double> raw(static_cast<std::size_t>(2 * n + 1));
    for (int k = -n; k <= n; ++k) raw[static_cast<std::size_t>(k + n)] = eigenvalue(k, spectrum.alpha(), spectrum.mu());
    out = group_tolerance(raw, n, tol);
  }
  check_sizes(out, spectrum.params());
  return out;
}

double gap_gamma(const Spectrum& spectrum) {
  const auto& d = spectrum.distinct();
  if (d.size() < 2) throw ValidationError("gap requires at least two distinct eigenvalues");
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = i + 1; j < d.size(); ++j) g = std::min(g, std::abs(d[i] - d[j]));
  }
  return g;
}

}  // namespace benjctl
