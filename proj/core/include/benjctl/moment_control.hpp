#pragma once

// Exact control by the moment method.  The target u1 - U(T) u0 is expanded in
// psi_k; each coordinate becomes a moment equation against e^{i lambda_k t},
// solved with a family q_r biorthogonal to the distinct exponentials on [0, T].
// The control is h(x, t) = sum_j h_j conj(q_{r(j)}(t)) psi_j(x).

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "benjctl/operators.hpp"
#include "benjctl/spectral.hpp"
#include "benjctl/spectrum.hpp"

namespace benjctl {

struct ControlProblem {
  SystemParams system;
  double T = 1.0;
  double s = 0.0;
  int n = 16;
  BumpProfile g;  // coefficients needed up to mode 2n
  TorusFunction u0;
  TorusFunction u1;

  /// Throws ValidationError on bad parameters or [u0] != [u1].
  void validate() const;
};

namespace detail {
struct HpFamily;
}

/// q_r(t) = sum_m D_{rm} e^{i lambda_m t} with D = Gamma^{-1}, so that
/// integral_0^T e^{i lambda_k t} conj(q_r(t)) dt = delta_{kr}.
///
/// Gamma is frequently far beyond double precision (condition numbers near
/// 1e50 for short horizons), so it is factored and inverted in 100-digit
/// arithmetic; the double matrices below are rounded copies.
class BiorthogonalFamily {
 public:
  /// Cond above which Gamma counts as singular.
  static constexpr double kSingularCond = 1e80;
  /// Largest |D_{rm}| for which q and its integrals are evaluated in double.
  static constexpr double kDoubleEvaluationLimit = 1e6;

  /// One exponential per cluster of the spectrum.  Throws NumericalError
  /// (naming the closest eigenvalue pair) if Gamma is numerically singular.
  static BiorthogonalFamily build(const Spectrum& spectrum, double T);
  /// Same, from an explicit list of distinct eigenvalues.
  static BiorthogonalFamily build(std::vector<double> eigenvalues, double T);

  double horizon() const { return T_; }
  int size() const { return static_cast<int>(lambdas_.size()); }
  const std::vector<double>& eigenvalues() const { return lambdas_; }

  const Eigen::MatrixXcd& gram() const { return gram_; }
  const Eigen::MatrixXcd& dual() const { return dual_; }
  /// (Gamma D)_{kr} = integral_0^T e^{i lambda_k t} conj(q_r(t)) dt, from the
  /// multiprecision factors.
  const Eigen::MatrixXcd& biorthogonality() const { return biorth_; }
  double biorthogonality_residual() const { return biorth_residual_; }
  double condition_number() const { return cond_; }
  double max_dual() const { return max_dual_; }
  bool evaluates_in_double() const { return max_dual_ <= kDoubleEvaluationLimit; }

  /// ||q_r||^2_{L^2(0,T)} = D_{rr}.
  double norm_sq(int r) const { return dual_(r, r).real(); }

  /// q_r(t) for every r.
  Eigen::VectorXcd q(double t) const;

  /// Row i, column r: integral_0^t e^{i freqs[i] s} conj(q_r(s)) ds.
  Eigen::MatrixXcd transfer(const std::vector<double>& freqs, double t) const;

 private:
  double T_ = 0.0;
  std::vector<double> lambdas_;
  Eigen::MatrixXcd gram_;
  Eigen::MatrixXcd dual_;
  Eigen::MatrixXcd biorth_;
  double biorth_residual_ = 0.0;
  double cond_ = 0.0;
  double max_dual_ = 0.0;
  std::shared_ptr<const detail::HpFamily> hp_;
};

/// Psi coordinates of u1 - U(T) u0 at order n.  Throws ValidationError if the
/// means differ.
Eigen::VectorXcd reduce_to_zero_start(const ControlProblem& p, const Spectrum& spectrum);

/// Moment coefficients h_j (psi index j + n): h_k = c_k e^{i lambda_k T} / m_kk
/// on simple eigenvalues, a block solve against m restricted to the cluster's
/// nonzero indices on repeated ones, and h_0 = 0.
Eigen::VectorXcd solve_coefficients(const Eigen::VectorXcd& c, const MMatrix& m, const Spectrum& spectrum,
                                    double T);

class ControlSignal {
 public:
  ControlSignal() = default;
  ControlSignal(Eigen::VectorXcd h, std::shared_ptr<const BiorthogonalFamily> family, std::vector<int> dual_index);

  int order() const { return static_cast<int>(h_.size() / 2); }
  double horizon() const { return family_->horizon(); }
  const Eigen::VectorXcd& coefficients() const { return h_; }
  const BiorthogonalFamily& family() const { return *family_; }
  std::shared_ptr<const BiorthogonalFamily> family_ptr() const { return family_; }
  /// Index r(j) of the dual function paired with mode j.
  int dual_index(int j) const { return dual_index_[static_cast<std::size_t>(j + order())]; }

  /// Psi coordinates of h(., t).
  Eigen::VectorXcd modes(double t) const;
  TorusFunction at(double t) const;

  /// ||h||_{L^2(0,T; H^s)}.
  double norm(double s) const;

  /// Relative |h_j - conj(h_{-j})|; zero means h(x, t) is real.
  double hermitian_defect() const;
  /// (h_j + conj(h_{-j})) / 2.
  ControlSignal symmetrized() const;

 private:
  Eigen::VectorXcd h_;
  std::shared_ptr<const BiorthogonalFamily> family_;
  std::vector<int> dual_index_;
};

ControlSignal assemble_control(Eigen::VectorXcd h, std::shared_ptr<const BiorthogonalFamily> family,
                               const Spectrum& spectrum);

/// Moments integral_0^T (G h(t))_k e^{-i lambda_k (T - t)} dt, closed form.
Eigen::VectorXcd control_moments(const ControlSignal& signal, const Spectrum& spectrum, const MMatrix& m);

/// Same integrals by composite Gauss-Legendre quadrature (at least min_nodes nodes).
Eigen::VectorXcd control_moments_quadrature(const ControlSignal& signal, const Spectrum& spectrum,
                                            const MMatrix& m, int min_nodes = 10000);

struct MomentReport {
  double residual = 0.0;                 // max_k |moment_k - c_k|, closed form
  double quadrature_residual = -1.0;     // same by quadrature; -1 when skipped
  double closed_vs_quadrature = -1.0;    // max_k |closed - quadrature|; -1 when skipped
  int quadrature_nodes = 0;
};

/// The quadrature pass is skipped when the family cannot be evaluated in
/// double precision (see BiorthogonalFamily::evaluates_in_double).
MomentReport verify_moments(const ControlSignal& signal, const Eigen::VectorXcd& c, const Spectrum& spectrum,
                            const MMatrix& m, bool with_quadrature = true);

/// Variation of constants u(t) = U(t) u0 + integral_0^t U(t - s) G h(s) ds,
/// evaluated mode by mode in closed form.  0 <= t <= T.
TorusFunction evolve_controlled(const TorusFunction& u0, const ControlSignal& signal, double t,
                                const Spectrum& spectrum, const MMatrix& m);

/// Same with the Duhamel integral done by Gauss-Legendre quadrature.
TorusFunction evolve_controlled_quadrature(const TorusFunction& u0, const ControlSignal& signal, double t,
                                           const Spectrum& spectrum, const MMatrix& m, int min_nodes = 10000);

/// H^s norm of the modes n < |k| <= n_sim driven at time T when the order-n
/// control acts through G at order n_sim.  g needs coefficients up to n + n_sim.
double spillover_norm(const ControlSignal& signal, const BumpProfile& g, const SystemParams& system, int n_sim,
                      double s);

/// ||a - b||_{H^s} / ||b||_{H^s}; the plain distance when b = 0.
double relative_distance(const TorusFunction& a, const TorusFunction& b, double s);

struct ControlSolution {
  Spectrum spectrum;
  MMatrix m;
  std::shared_ptr<const BiorthogonalFamily> family;
  Eigen::VectorXcd targets;  // c_k
  ControlSignal signal;
  TorusFunction terminal;    // u(T)
  double terminal_residual = 0.0;  // relative H^s distance to u1
  double hermitian_defect = 0.0;
  double symmetrized_moment_change = 0.0;
};

/// The full pipeline.  If family is given (same spectrum and T) it is reused.
ControlSolution synthesize_control(const ControlProblem& p,
                                   std::shared_ptr<const BiorthogonalFamily> family = nullptr);

}  // namespace benjctl
