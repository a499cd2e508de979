#pragma once

// Eigenvalues lambda_k = k^3 + 2 mu k - alpha k|k| of the (mu-shifted)
// linearized Benjamin generator, their clusters of repeated values, and the
// gap between distinct eigenvalues.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace benjctl {

/// Exact rational number num/den with den > 0, in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  /// Accepts "p/q", integers and finite decimals ("0.15" -> 3/20).
  static std::optional<Rational> parse(std::string_view text);
  static Rational make(std::int64_t num, std::int64_t den);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Physical parameters of the linear system.  When alpha_exact / mu_exact are
/// both present, eigenvalue ties are decided in integer arithmetic.
struct SystemParams {
  double alpha = 1.0;
  double mu = 0.0;
  std::optional<Rational> alpha_exact;
  std::optional<Rational> mu_exact;

  static SystemParams from_rationals(Rational alpha, Rational mu);
  bool has_exact() const { return alpha_exact.has_value() && mu_exact.has_value(); }
  void validate() const;
};

/// k^3 + 2 mu k - alpha k|k|.
double eigenvalue(int k, double alpha, double mu);

using Cluster = std::vector<int>;

class Spectrum {
 public:
  /// Default relative clustering tolerance used when no exact rationals are given.
  static constexpr double kDefaultRelTol = 1e-9;

  /// Builds the spectrum for modes -n..n.  Throws NumericalError if a cluster
  /// of more than three modes is found.
  static Spectrum build(const SystemParams& params, int n);

  const SystemParams& params() const { return params_; }
  double alpha() const { return params_.alpha; }
  double mu() const { return params_.mu; }
  int order() const { return n_; }

  /// lambda_k.  Members of a cluster share one bit-identical value.
  double lambda(int k) const { return lambdas_[static_cast<std::size_t>(k + n_)]; }
  const std::vector<double>& lambdas() const { return lambdas_; }

  /// Partition of -n..n, sorted by eigenvalue; indices ascending inside each cluster.
  const std::vector<Cluster>& clusters() const { return clusters_; }
  /// Index into clusters() of the cluster containing mode k.
  int cluster_of(int k) const { return cluster_of_[static_cast<std::size_t>(k + n_)]; }
  /// One eigenvalue per cluster, aligned with clusters().
  const std::vector<double>& distinct() const { return distinct_; }

  double gap_gamma() const { return gap_gamma_; }
  /// Minimum gap restricted to clusters touching |k| <= window_bound.
  double gap_gamma_window() const { return gap_gamma_window_; }
  /// floor(3 alpha / 2) + 1.
  int window_bound() const { return window_bound_; }
  bool window_verified() const { return gap_gamma_ == gap_gamma_window_; }
  bool exact_clustering() const { return exact_; }

  /// Near-resonance diagnostics (pairs that are distinct but nearly equal).
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  SystemParams params_;
  int n_ = 0;
  std::vector<double> lambdas_;
  std::vector<Cluster> clusters_;
  std::vector<int> cluster_of_;
  std::vector<double> distinct_;
  double gap_gamma_ = 0.0;
  double gap_gamma_window_ = 0.0;
  int window_bound_ = 0;
  bool exact_ = false;
  std::vector<std::string> warnings_;
};

/// Groups modes with |lambda_j - lambda_k| <= tol * max(1, |lambda_j|, |lambda_k|).
/// tol = 0 asks for exact equality, decided in integer arithmetic when the
/// spectrum carries exact rationals.  Throws NumericalError on a cluster of
/// size > 3.
std::vector<Cluster> clusters(const Spectrum& spectrum, double tol);

/// Min |lambda_k - lambda_m| over distinct eigenvalues with |k|,|m| <= n,
/// computed by a full pairwise scan.  Requires at least two distinct values.
double gap_gamma(const Spectrum& spectrum);

}  // namespace benjctl
