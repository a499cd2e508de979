#pragma once

// Minimal-norm control through the controllability Gramian
//   W_T = integral_0^T U(T-s) G G* U(T-s)* ds,
// used as an independent check on the moment-method control.

#include <Eigen/Core>

#include "benjctl/moment_control.hpp"
#include "benjctl/operators.hpp"
#include "benjctl/spectrum.hpp"

namespace benjctl {

/// W_T on psi coordinates, closed form: (G^2)_{kl} E(i (l_l - l_k), T).
/// Row and column 0 vanish.
Eigen::MatrixXcd controllability_gramian(const Eigen::MatrixXcd& gg, const Spectrum& spectrum, double T);

/// Same by composite Gauss-Legendre quadrature.
Eigen::MatrixXcd controllability_gramian_quadrature(const Eigen::MatrixXcd& gg, const Spectrum& spectrum, double T,
                                                    int min_nodes = 10000);

/// h(t) = G U(T-t)* y with W_T y = u1 - U(T) u0 on the mean-zero modes.
class HumControl {
 public:
  /// Throws NumericalError if W_T is not positive definite on mean-zero modes.
  static HumControl build(const ControlProblem& p, const Spectrum& spectrum, const MMatrix& m);

  double horizon() const { return T_; }
  int order() const { return n_; }
  /// Psi coordinates of h(., t).
  Eigen::VectorXcd modes(double t) const;
  /// ||h||_{L^2(0,T; L^2)} = sqrt(y^H W y).
  double norm() const { return norm_; }
  /// Psi coordinates of u(T).
  const Eigen::VectorXcd& terminal() const { return terminal_; }
  double gramian_condition() const { return cond_; }
  const Eigen::VectorXcd& multiplier() const { return y_; }

 private:
  int n_ = 0;
  double T_ = 0.0;
  Eigen::MatrixXcd gmat_;
  Eigen::VectorXd lambdas_;
  Eigen::VectorXcd y_;
  Eigen::VectorXcd terminal_;
  double norm_ = 0.0;
  double cond_ = 0.0;
};

}  // namespace benjctl
