#pragma once

// The localizer g, the control operator G h = g (h - integral g h), its matrix
// in the psi_k basis, and the free propagator U(t).

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "benjctl/spectral.hpp"
#include "benjctl/spectrum.hpp"

namespace benjctl {

enum class BumpKind { uniform, raised_cosine, smooth_exp_bump, explicit_coefficients };

std::string to_string(BumpKind kind);
std::optional<BumpKind> parse_bump_kind(std::string_view name);

/// Non-negative localizer with integral 1.  Coefficients g^(k) are kept for
/// |k| <= order(); the l1 mass of the discarded tail is reported.
class BumpProfile {
 public:
  /// Grid used for sampling g and for its Fourier coefficients.
  static constexpr std::size_t kSamples = 8192;

  static BumpProfile uniform(int order);
  /// c cos^2(pi (x - center)/width) on |x - center| < width/2.
  static BumpProfile raised_cosine(int order, double center = std::numbers::pi,
                                   double width = std::numbers::pi / 2);
  /// c exp(-1 / (1 - r^2)), r = 2 (x - center)/width.
  static BumpProfile smooth_exp_bump(int order, double center = std::numbers::pi,
                                     double width = std::numbers::pi / 2);
  /// g^(k) for k = -m..m.  Must describe a real, non-negative g with unit integral.
  static BumpProfile from_coefficients(const Eigen::VectorXcd& coeffs);

  BumpKind kind() const { return kind_; }
  double center() const { return center_; }
  double width() const { return width_; }
  /// Normalization constant c (1/(2 pi) for uniform, 0 for explicit coefficients).
  double normalization() const { return normalization_; }
  int order() const { return order_; }

  /// g^(k); zero for |k| > order().
  Complex coefficient(int k) const;
  /// Sum of |g^(k)| over order() < |k| < kSamples/2.
  double tail_l1() const { return tail_l1_; }
  double min_sample() const { return samples_.minCoeff(); }

  /// g at the kSamples uniform grid nodes.
  const Eigen::VectorXd& samples() const { return samples_; }
  /// Same profile with coefficients kept up to a different order.
  BumpProfile with_order(int order) const;

 private:
  static BumpProfile from_samples(BumpKind kind, Eigen::VectorXd samples, int order, double center,
                                  double width, double normalization);
  void set_order(int order);

  BumpKind kind_ = BumpKind::uniform;
  double center_ = 0.0;
  double width_ = 0.0;
  double normalization_ = 0.0;
  int order_ = 0;
  Eigen::VectorXd samples_;
  Eigen::VectorXcd spectrum_;  // g^(k) for |k| < kSamples/2, index k mod kSamples
  Eigen::VectorXcd coeffs_;    // g^(k), k = -order..order
  double tail_l1_ = 0.0;
};

/// m_{j,k} = g^(k-j) - 2 pi g^(-j) g^(k): the psi_k coordinate of G(psi_j).
class MMatrix {
 public:
  /// Throws ValidationError if beta <= 0 or g^ is not available up to mode 2n.
  static MMatrix build(const BumpProfile& g, int n);

  int order() const { return n_; }
  Complex operator()(int j, int k) const { return m_(j + n_, k + n_); }
  /// Row j + n, column k + n holds m_{j,k}.
  const Eigen::MatrixXcd& entries() const { return m_; }
  /// Matrix of G on psi coordinates: (Gmat a)_k = sum_j m_{j,k} a_j.  Hermitian.
  Eigen::MatrixXcd operator_matrix() const { return m_.transpose(); }

  /// min over k != 0 of m_{k,k}.
  double beta() const { return beta_; }
  /// ||G psi_k||^2 in L^2, by quadrature on the bump's sample grid (0 at k = 0).
  const Eigen::VectorXd& delta_k() const { return delta_k_; }
  double delta() const { return delta_; }
  /// Largest |closed form - quadrature| over the sampled (j,k) pairs.
  double quadrature_deviation() const { return quadrature_deviation_; }

 private:
  int n_ = 0;
  Eigen::MatrixXcd m_;
  double beta_ = 0.0;
  Eigen::VectorXd delta_k_;
  double delta_ = 0.0;
  double quadrature_deviation_ = 0.0;
};

/// m_{j,k} by direct grid quadrature of integral G(psi_j) conj(psi_k) dx.
Complex m_entry_quadrature(const BumpProfile& g, int j, int k);

/// g (h - integral g h), truncated at the given order (default: h's order).
TorusFunction apply_G(const BumpProfile& g, const TorusFunction& h, int order = -1);

/// L^2 norm of the part of g (h - integral g h) lying above the given order.
double apply_G_spillover(const BumpProfile& g, const TorusFunction& h, int order);

/// Matrix of G G* = G^2 on psi coordinates.
Eigen::MatrixXcd gg_star_matrix(const MMatrix& m);
Eigen::MatrixXcd gg_star_matrix(const BumpProfile& g, int n);

/// e^{-i lambda_k t}.
Complex propagator_multiplier(int k, double t, double alpha, double mu);

/// U(t) u0: mode k multiplied by e^{-i lambda_k t}.
TorusFunction evolve_free(const TorusFunction& u0, double t, double alpha, double mu);
/// Same, with the (possibly snapped) eigenvalues of a spectrum of order >= u0's.
TorusFunction evolve_free(const TorusFunction& u0, double t, const Spectrum& spectrum);

}  // namespace benjctl
