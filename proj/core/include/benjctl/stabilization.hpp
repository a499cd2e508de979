#pragma once

// Feedback laws for the closed loop u' = A u - K u on psi coordinates, where
// A = diag(-i lambda_k):
//   simple   K = G G*
//   gramian  K = G G* L_lambda^{-1},
//     L_lambda = integral_0^T e^{-2 lambda tau} U(-tau) G G* U(-tau)* dtau,
// plus closed-loop simulation, decay-rate fitting and the observability constant.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "benjctl/operators.hpp"
#include "benjctl/spectral.hpp"
#include "benjctl/spectrum.hpp"

namespace benjctl {

enum class LawKind { none, simple, gramian };

std::string to_string(LawKind kind);
std::optional<LawKind> parse_law_kind(std::string_view name);

struct GramianWeighted {
  double lambda = 0.0;
  double T = 0.0;
  Eigen::MatrixXcd matrix;   // L_lambda, zero row and column at mode 0
  Eigen::MatrixXcd inverse;  // inverse on the mean-zero modes, zero at mode 0
  double condition = 0.0;
  double min_eigenvalue = 0.0;
};

/// Entries (G G*)_{kl} E(-2 lambda + i (lambda_k - lambda_l), T).  Throws
/// NumericalError if L is not positive definite on the mean-zero modes.
GramianWeighted build_L_lambda(const MMatrix& m, const Spectrum& spectrum, double lambda, double T);

/// L_lambda by composite Gauss-Legendre quadrature with about `nodes` nodes.
Eigen::MatrixXcd L_lambda_quadrature(const Eigen::MatrixXcd& gg, const Spectrum& spectrum, double lambda, double T,
                                     int nodes = 1024);

class FeedbackLaw {
 public:
  /// Condition number of L above which the gramian law carries a warning.
  static constexpr double kIllConditioned = 1e12;

  static FeedbackLaw none(const Spectrum& spectrum, const MMatrix& m);
  static FeedbackLaw simple(const Spectrum& spectrum, const MMatrix& m);
  static FeedbackLaw gramian(const GramianWeighted& L, const Spectrum& spectrum, const MMatrix& m);

  LawKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  int order() const { return static_cast<int>(K_.rows() / 2); }
  /// K on psi coordinates.
  const Eigen::MatrixXcd& matrix() const { return K_; }
  /// A - K.
  const Eigen::MatrixXcd& generator() const { return generator_; }
  /// Matrix of G on psi coordinates.
  const Eigen::MatrixXcd& g_matrix() const { return G_; }
  /// Largest real part of the closed-loop eigenvalues on the mean-zero modes.
  double spectral_abscissa() const { return abscissa_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  LawKind kind_ = LawKind::none;
  double lambda_ = 0.0;
  Eigen::MatrixXcd K_;
  Eigen::MatrixXcd generator_;
  Eigen::MatrixXcd G_;
  double abscissa_ = 0.0;
  std::vector<std::string> warnings_;
};

/// Max real part of the eigenvalues of a (2n+1)-square generator with row and
/// column 0 removed.
double spectral_abscissa(const Eigen::MatrixXcd& generator);

struct Trajectory {
  std::vector<double> times;
  std::vector<TorusFunction> states;
  Complex mean;  // [u0], carried unchanged

  /// ||u(t) - [u0]||_{H^s} at every time.
  std::vector<double> fluctuation_norms(double s) const;
};

/// The mean-zero part of u0 evolves by e^{t (A - K)}; [u0] is re-added.
/// times must be non-decreasing and >= 0.
Trajectory simulate_closed_loop(const TorusFunction& u0, const FeedbackLaw& law, const std::vector<double>& times);

/// Centered difference of (1/2)||u||^2 at the state with psi coordinates a,
/// (||e^{hB}a||^2 - ||e^{-hB}a||^2) / (4h) = Re<sinh(hB)a, cosh(hB)a> / h with
/// B the generator, Richardson-extrapolated from steps h and h/2.
double energy_rate(const FeedbackLaw& law, const Eigen::VectorXcd& a, double h);

/// |energy_rate + ||G u||^2| at the state u (its mean-zero part).
double energy_identity_defect(const FeedbackLaw& law, const TorusFunction& u, double h = 1e-5);

struct DecayFit {
  double rate = 0.0;
  double M = 0.0;
  double r_squared = 0.0;
  std::size_t first = 0;  // window of samples used, inclusive
  std::size_t last = 0;
  std::size_t usable = 0;
  bool log_linear = true;  // false when no window reached R^2 >= 0.999
};

/// Least-squares fit of log(norm) = log(M) - rate t over the longest window of
/// at least 10 consecutive samples above the 1e-13 noise floor with R^2 >= 0.999
/// (ties go to the later window).  If none qualifies, the longest contiguous
/// stretch above the floor is fitted and log_linear is false.  Throws
/// NumericalError when fewer than 10 consecutive samples clear the floor.
DecayFit estimate_decay_rate(const std::vector<double>& times, const std::vector<double>& norms);

struct Observability {
  double T = 0.0;
  double delta = 0.0;         // sqrt(min eigenvalue)
  double min_eigenvalue = 0.0;
  double tolerance = 0.0;     // eigenvalues at or below this count as zero
  Eigen::VectorXcd minimizer; // psi coordinates of the minimizing phi, ||phi|| = 1
};

/// Min eigenvalue of integral_0^T U(-tau)* G G* U(-tau) dtau on mean-zero modes.
/// Throws NumericalError naming the near-null vector if it is not positive.
Observability observability_constant(const MMatrix& m, const Spectrum& spectrum, double T);

}  // namespace benjctl
