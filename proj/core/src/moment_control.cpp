#include "benjctl/moment_control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "benjctl/errors.hpp"
#include "benjctl/quadrature.hpp"

namespace benjctl {
namespace {

constexpr double kMeanTolerance = 1e-12;

Eigen::VectorXd sobolev_weights(int n, double s) {
  Eigen::VectorXd w(2 * n + 1);
  for (int k = -n; k <= n; ++k) w[k + n] = std::pow(1.0 + double(k) * k, s);
  return w;
}

// u(t)_k = e^{-i l_k t} [u0_k + sum_j m_{jk} h_j X_{c(k), r(j)}] with X the
// transfer matrix of the family at its own eigenvalues and c(k) the cluster of k.
Eigen::VectorXcd duhamel(const Eigen::VectorXcd& a0, const ControlSignal& signal, const Eigen::MatrixXcd& X,
                         const Spectrum& spectrum, const MMatrix& m, double t) {
  const int n = signal.order();
  const Eigen::VectorXcd& h = signal.coefficients();
  Eigen::VectorXcd a(2 * n + 1);
  for (int k = -n; k <= n; ++k) {
    Complex acc = a0[k + n];
    for (int j = -n; j <= n; ++j) {
      if (h[j + n] == 0.0) continue;
      acc += m(j, k) * h[j + n] * X(spectrum.cluster_of(k), signal.dual_index(j));
    }
    a[k + n] = std::polar(1.0, -spectrum.lambda(k) * t) * acc;
  }
  return a;
}

Eigen::VectorXcd psi_at_order(const TorusFunction& f, int n) {
  if (f.order() > n) throw ValidationError("state order exceeds the truncation order n");
  return f.resized(n).psi_coefficients();
}

// Real states stay real when the computed coefficients are Hermitian up to
// rounding; a larger defect means the control itself was complex.
TorusFunction as_state(Eigen::VectorXcd a, bool real) {
  if (real && hermitian_defect(a) < 1e-8) {
    const int n = static_cast<int>(a.size() / 2);
    Eigen::VectorXcd sym(a.size());
    for (int k = -n; k <= n; ++k) sym[k + n] = 0.5 * (a[k + n] + std::conj(a[n - k]));
    return TorusFunction::from_psi_coefficients(sym, true);
  }
  return TorusFunction::from_psi_coefficients(a, false);
}

}  // namespace

void ControlProblem::validate() const {
  system.validate();
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("horizon T must be > 0");
  if (!(s >= 0.0)) throw ValidationError("Sobolev index s must be >= 0");
  if (n < 1) throw ValidationError("truncation order n must be >= 1");
  if (u0.order() > n || u1.order() > n) throw ValidationError("u0/u1 order exceeds the truncation order n");
  const double scale = std::max({1.0, std::abs(mean(u0)), std::abs(mean(u1))});
  if (std::abs(mean(u0) - mean(u1)) > kMeanTolerance * scale) {
    std::ostringstream os;
    os << "u0 and u1 must have equal means (got " << mean(u0).real() << " and " << mean(u1).real() << ")";
    throw ValidationError(os.str());
  }
}

Eigen::VectorXcd reduce_to_zero_start(const ControlProblem& p, const Spectrum& spectrum) {
  p.validate();
  const int n = p.n;
  Eigen::VectorXcd c = psi_at_order(p.u1, n) - psi_at_order(evolve_free(p.u0.resized(n), p.T, spectrum), n);
  c[n] = 0.0;  // equal means; the free flow does not move mode 0
  return c;
}

Eigen::VectorXcd solve_coefficients(const Eigen::VectorXcd& c, const MMatrix& m, const Spectrum& spectrum,
                                    double T) {
  const int n = m.order();
  if (c.size() != 2 * n + 1) throw ValidationError("target vector does not match the truncation order");
  if (!(m.beta() > 0.0)) throw ValidationError("m-matrix has beta <= 0");
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(2 * n + 1);
  auto target = [&](int k) { return c[k + n] * std::polar(1.0, spectrum.lambda(k) * T); };
  for (const auto& cluster : spectrum.clusters()) {
    std::vector<int> idx;
    for (int k : cluster) {
      if (k != 0 && std::abs(k) <= n) idx.push_back(k);
    }
    if (idx.empty()) continue;
    if (idx.size() == 1) {
      const int k = idx.front();
      h[k + n] = target(k) / m(k, k);
      continue;
    }
    // sum_{j in C} m_{j,k} h_j = c_k e^{i l T} for k in C.
    const auto sz = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXcd block(sz, sz);
    Eigen::VectorXcd rhs(sz);
    for (Eigen::Index a = 0; a < sz; ++a) {
      rhs[a] = target(idx[a]);
      for (Eigen::Index b = 0; b < sz; ++b) block(a, b) = m(idx[b], idx[a]);
    }
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(block);
    if (!lu.isInvertible()) {
      std::ostringstream os;
      os << "cluster block of m is singular for modes {";
      for (std::size_t i = 0; i < idx.size(); ++i) os << (i ? "," : "") << idx[i];
      os << "}";
      throw NumericalError(os.str());
    }
    const Eigen::VectorXcd x = lu.solve(rhs);
    for (Eigen::Index a = 0; a < sz; ++a) h[idx[a] + n] = x[a];
  }
  return h;
}

ControlSignal::ControlSignal(Eigen::VectorXcd h, std::shared_ptr<const BiorthogonalFamily> family,
                             std::vector<int> dual_index)
    : h_(std::move(h)), family_(std::move(family)), dual_index_(std::move(dual_index)) {
  if (h_.size() % 2 == 0 || static_cast<std::size_t>(h_.size()) != dual_index_.size()) {
    throw ValidationError("control coefficients and dual index map must cover -n..n");
  }
}

ControlSignal assemble_control(Eigen::VectorXcd h, std::shared_ptr<const BiorthogonalFamily> family,
                               const Spectrum& spectrum) {
  const int n = static_cast<int>(h.size() / 2);
  if (spectrum.order() < n) throw ValidationError("spectrum order is below the control order");
  if (family->size() != static_cast<int>(spectrum.distinct().size())) {
    throw ValidationError("biorthogonal family does not match the spectrum");
  }
  std::vector<int> index(static_cast<std::size_t>(2 * n + 1));
  for (int j = -n; j <= n; ++j) index[static_cast<std::size_t>(j + n)] = spectrum.cluster_of(j);
  return ControlSignal(std::move(h), std::move(family), std::move(index));
}

Eigen::VectorXcd ControlSignal::modes(double t) const {
  const int n = order();
  const Eigen::VectorXcd q = family_->q(t);
  Eigen::VectorXcd out(2 * n + 1);
  for (int j = -n; j <= n; ++j) out[j + n] = h_[j + n] * std::conj(q[dual_index(j)]);
  return out;
}

TorusFunction ControlSignal::at(double t) const {
  return TorusFunction::from_psi_coefficients(modes(t), false);
}

double ControlSignal::norm(double s) const {
  const int n = order();
  const Eigen::VectorXd w = sobolev_weights(n, s);
  double acc = 0.0;
  for (int j = -n; j <= n; ++j) acc += w[j + n] * std::norm(h_[j + n]) * family_->norm_sq(dual_index(j));
  return std::sqrt(acc);
}

double ControlSignal::hermitian_defect() const { return benjctl::hermitian_defect(h_); }

ControlSignal ControlSignal::symmetrized() const {
  const int n = order();
  Eigen::VectorXcd h(2 * n + 1);
  for (int j = -n; j <= n; ++j) h[j + n] = 0.5 * (h_[j + n] + std::conj(h_[n - j]));
  return ControlSignal(std::move(h), family_, dual_index_);
}

Eigen::VectorXcd control_moments(const ControlSignal& signal, const Spectrum& spectrum, const MMatrix& m) {
  const int n = signal.order();
  const double T = signal.horizon();
  return duhamel(Eigen::VectorXcd::Zero(2 * n + 1), signal, signal.family().biorthogonality(), spectrum, m, T);
}

Eigen::VectorXcd control_moments_quadrature(const ControlSignal& signal, const Spectrum& spectrum,
                                            const MMatrix& m, int min_nodes) {
  const int n = signal.order();
  const double T = signal.horizon();
  double wmax = 0.0;
  for (double l : signal.family().eigenvalues()) wmax = std::max(wmax, std::abs(l));
  const auto rule = composite_gauss_legendre(0.0, T, panels_for(T, 2.0 * wmax, min_nodes));
  const Eigen::MatrixXcd G = m.operator_matrix();
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(2 * n + 1);
  const BiorthogonalFamily& fam = signal.family();
  if (!fam.evaluates_in_double()) {
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double t = rule.nodes[i];
      const Eigen::VectorXcd gh = G * signal.modes(t);
      for (int k = -n; k <= n; ++k) {
        acc[k + n] += rule.weights[i] * gh[k + n] * std::polar(1.0, -spectrum.lambda(k) * (T - t));
      }
    }
    return acc;
  }
  // G h(t) = C e^{-i lambda t} with C = G diag(h) conj(D) taken row by dual index
  const auto& lam = fam.eigenvalues();
  const int R = fam.size();
  const Eigen::VectorXcd& h = signal.coefficients();
  Eigen::MatrixXcd H(2 * n + 1, R);
  for (int j = -n; j <= n; ++j) H.row(j + n) = h[j + n] * fam.dual().row(signal.dual_index(j)).conjugate();
  const Eigen::MatrixXcd C = G * H;
  // outer phase e^{i lambda_k t} reuses the family exponentials when lambda_k is a family eigenvalue
  std::vector<int> outer(2 * n + 1, -1);
  for (int k = -n; k <= n; ++k) {
    const int r = signal.dual_index(k);
    if (r >= 0 && r < R && lam[static_cast<std::size_t>(r)] == spectrum.lambda(k)) outer[k + n] = r;
  }
  Eigen::VectorXcd e(R);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double t = rule.nodes[i];
    for (int r = 0; r < R; ++r) e[r] = std::polar(1.0, lam[static_cast<std::size_t>(r)] * t);
    const Eigen::VectorXcd gh = C * e.conjugate();
    for (int k = -n; k <= n; ++k) {
      const Complex ph = outer[k + n] >= 0 ? e[outer[k + n]] : std::polar(1.0, spectrum.lambda(k) * t);
      acc[k + n] += rule.weights[i] * gh[k + n] * ph;
    }
  }
  for (int k = -n; k <= n; ++k) acc[k + n] *= std::polar(1.0, -spectrum.lambda(k) * T);
  return acc;
}

MomentReport verify_moments(const ControlSignal& signal, const Eigen::VectorXcd& c, const Spectrum& spectrum,
                            const MMatrix& m, bool with_quadrature) {
  MomentReport r;
  const Eigen::VectorXcd closed = control_moments(signal, spectrum, m);
  r.residual = (closed - c).cwiseAbs().maxCoeff();
  if (with_quadrature && signal.family().evaluates_in_double()) {
    double wmax = 0.0;
    for (double l : signal.family().eigenvalues()) wmax = std::max(wmax, std::abs(l));
    r.quadrature_nodes = 20 * panels_for(signal.horizon(), 2.0 * wmax, 10000);
    const Eigen::VectorXcd quad = control_moments_quadrature(signal, spectrum, m);
    r.quadrature_residual = (quad - c).cwiseAbs().maxCoeff();
    r.closed_vs_quadrature = (quad - closed).cwiseAbs().maxCoeff();
  }
  return r;
}

TorusFunction evolve_controlled(const TorusFunction& u0, const ControlSignal& signal, double t,
                                const Spectrum& spectrum, const MMatrix& m) {
  const int n = signal.order();
  if (t < 0.0 || t > signal.horizon() * (1 + 1e-14)) throw ValidationError("t must lie in [0, T]");
  const Eigen::MatrixXcd X = t == signal.horizon() ? signal.family().biorthogonality()
                                                   : signal.family().transfer(spectrum.distinct(), t);
  return as_state(duhamel(psi_at_order(u0, n), signal, X, spectrum, m, t), u0.is_real());
}

TorusFunction evolve_controlled_quadrature(const TorusFunction& u0, const ControlSignal& signal, double t,
                                           const Spectrum& spectrum, const MMatrix& m, int min_nodes) {
  const int n = signal.order();
  if (t < 0.0 || t > signal.horizon() * (1 + 1e-14)) throw ValidationError("t must lie in [0, T]");
  Eigen::VectorXcd a = psi_at_order(u0, n);
  if (t > 0.0) {
    double wmax = 0.0;
    for (double l : signal.family().eigenvalues()) wmax = std::max(wmax, std::abs(l));
    const auto rule = composite_gauss_legendre(0.0, t, panels_for(t, 2.0 * wmax, min_nodes));
    const Eigen::MatrixXcd G = m.operator_matrix();
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(2 * n + 1);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double s = rule.nodes[i];
      const Eigen::VectorXcd gh = G * signal.modes(s);
      for (int k = -n; k <= n; ++k) acc[k + n] += rule.weights[i] * gh[k + n] * std::polar(1.0, spectrum.lambda(k) * s);
    }
    a += acc;
  }
  for (int k = -n; k <= n; ++k) a[k + n] *= std::polar(1.0, -spectrum.lambda(k) * t);
  return as_state(a, u0.is_real());
}

double spillover_norm(const ControlSignal& signal, const BumpProfile& g, const SystemParams& system, int n_sim,
                      double s) {
  const int n = signal.order();
  if (n_sim <= n) return 0.0;
  if (g.order() < n + n_sim) throw ValidationError("bump coefficients needed up to mode n + n_sim");
  std::vector<double> freqs;
  std::vector<int> ks;
  for (int k = -n_sim; k <= n_sim; ++k) {
    if (std::abs(k) <= n) continue;
    ks.push_back(k);
    freqs.push_back(eigenvalue(k, system.alpha, system.mu));
  }
  const Eigen::MatrixXcd X = signal.family().transfer(freqs, signal.horizon());
  const Eigen::VectorXcd& h = signal.coefficients();
  double acc = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const int k = ks[i];
    Complex a = 0.0;
    for (int j = -n; j <= n; ++j) {
      const Complex mjk = g.coefficient(k - j) - kTwoPi * g.coefficient(-j) * g.coefficient(k);
      a += mjk * h[j + n] * X(static_cast<Eigen::Index>(i), signal.dual_index(j));
    }
    acc += std::pow(1.0 + double(k) * k, s) * std::norm(a);
  }
  return std::sqrt(acc);
}

double relative_distance(const TorusFunction& a, const TorusFunction& b, double s) {
  const double d = sobolev_norm(a - b, s);
  const double ref = sobolev_norm(b, s);
  return ref > 0.0 ? d / ref : d;
}

ControlSolution synthesize_control(const ControlProblem& p, std::shared_ptr<const BiorthogonalFamily> family) {
  p.validate();
  ControlSolution sol;
  sol.spectrum = Spectrum::build(p.system, p.n);
  sol.m = MMatrix::build(p.g, p.n);
  if (!family) family = std::make_shared<const BiorthogonalFamily>(BiorthogonalFamily::build(sol.spectrum, p.T));
  sol.family = family;
  sol.targets = reduce_to_zero_start(p, sol.spectrum);
  Eigen::VectorXcd h = solve_coefficients(sol.targets, sol.m, sol.spectrum, p.T);
  sol.signal = assemble_control(std::move(h), family, sol.spectrum);
  sol.hermitian_defect = sol.signal.hermitian_defect();
  if (p.u0.is_real() && p.u1.is_real()) {
    const Eigen::VectorXcd before = control_moments(sol.signal, sol.spectrum, sol.m);
    ControlSignal sym = sol.signal.symmetrized();
    const Eigen::VectorXcd after = control_moments(sym, sol.spectrum, sol.m);
    sol.symmetrized_moment_change = (after - before).cwiseAbs().maxCoeff();
    sol.signal = std::move(sym);
  }
  sol.terminal = evolve_controlled(p.u0, sol.signal, p.T, sol.spectrum, sol.m);
  sol.terminal_residual = relative_distance(sol.terminal, p.u1.resized(p.n), p.s);
  return sol;
}

}  // namespace benjctl
