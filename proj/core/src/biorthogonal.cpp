#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "benjctl/errors.hpp"
#include "benjctl/moment_control.hpp"
#include "benjctl/quadrature.hpp"
#include "hp.hpp"

namespace benjctl {
namespace detail {

struct HpFamily {
  std::vector<hp::Real> lambdas;
  hp::Matrix dual;
};

}  // namespace detail

namespace {

std::string closest_pair(const std::vector<double>& lambdas) {
  std::vector<double> sorted = lambdas;
  std::sort(sorted.begin(), sorted.end());
  std::size_t best = 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] - sorted[i - 1] < sorted[best] - sorted[best - 1]) best = i;
  }
  std::ostringstream os;
  os.precision(17);
  if (sorted.size() >= 2) os << "lambda=" << sorted[best - 1] << " and lambda=" << sorted[best];
  return os.str();
}

[[noreturn]] void singular(const std::vector<double>& lambdas, double T, const std::string& why) {
  std::ostringstream os;
  os << "Gram matrix of exponentials is numerically singular at T=" << T << " (" << why
     << "); nearest eigenvalue pair: " << closest_pair(lambdas);
  throw NumericalError(os.str());
}

// Gamma = P^T L L^H P by Cholesky with diagonal pivoting, then
// Gamma^{-1} = P^T L^{-H} L^{-1} P.
hp::Matrix pivoted_cholesky_inverse(hp::Matrix a, const std::vector<double>& lambdas, double T) {
  const int n = a.n;
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  hp::Matrix L(n);
  hp::Real first_pivot = 0;
  const hp::Real rank_floor("1e-95");
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i) {
      if (a(i, i).re > a(p, p).re) p = i;
    }
    if (p != k) {
      std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(p)]);
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      for (int i = 0; i < n; ++i) std::swap(a(i, k), a(i, p));
      for (int j = 0; j < k; ++j) std::swap(L(k, j), L(p, j));
    }
    const hp::Real pivot = a(k, k).re;
    if (k == 0) first_pivot = pivot;
    if (!(pivot > first_pivot * rank_floor)) singular(lambdas, T, "rank deficient at working precision");
    const hp::Real d = sqrt(pivot);
    const hp::Real inv_d = 1 / d;
    L(k, k) = hp::Complex(d);
    for (int i = k + 1; i < n; ++i) L(i, k) = inv_d * a(i, k);
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j <= i; ++j) {
        a(i, j) -= hp::mul_conj(L(i, k), L(j, k));
        if (j != i) a(j, i) = hp::conj(a(i, j));
      }
      a(i, i).im = 0;
    }
  }
  // X = L^{-1}, lower triangular.
  hp::Matrix X(n);
  for (int j = 0; j < n; ++j) {
    X(j, j) = hp::Complex(1 / L(j, j).re);
    for (int i = j + 1; i < n; ++i) {
      hp::Complex acc;
      for (int k = j; k < i; ++k) acc += L(i, k) * X(k, j);
      X(i, j) = (-1 / L(i, i).re) * acc;
    }
  }
  // Y = X^H X in the pivoted ordering, then undo the permutation.
  hp::Matrix inv(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      hp::Complex acc;
      for (int k = i; k < n; ++k) acc += hp::mul_conj(X(k, j), X(k, i));
      // acc = sum_k conj(X(k,i)) X(k,j) = (X^H X)_{ij}
      const int pi = perm[static_cast<std::size_t>(i)];
      const int pj = perm[static_cast<std::size_t>(j)];
      inv(pi, pj) = acc;
      inv(pj, pi) = hp::conj(acc);
    }
  }
  return inv;
}

Eigen::MatrixXcd to_double(const hp::Matrix& m) {
  Eigen::MatrixXcd out(m.n, m.n);
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) out(i, j) = m(i, j).to_double();
  }
  return out;
}

double max_eigenvalue(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

BiorthogonalFamily BiorthogonalFamily::build(const Spectrum& spectrum, double T) {
  return build(spectrum.distinct(), T);
}

BiorthogonalFamily BiorthogonalFamily::build(std::vector<double> eigenvalues, double T) {
  if (!(T > 0.0)) throw ValidationError("horizon T must be > 0");
  if (eigenvalues.empty()) throw ValidationError("biorthogonal family needs at least one eigenvalue");
  const int n = static_cast<int>(eigenvalues.size());
  BiorthogonalFamily f;
  f.T_ = T;
  f.lambdas_ = std::move(eigenvalues);

  auto hpf = std::make_shared<detail::HpFamily>();
  const hp::Real hT(T);
  std::vector<hp::Complex> phase(static_cast<std::size_t>(n));
  hpf->lambdas.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    hpf->lambdas.emplace_back(f.lambdas_[static_cast<std::size_t>(k)]);
    phase[static_cast<std::size_t>(k)] = hp::expi(hpf->lambdas.back() * hT);
  }
  // Gamma_km = (e^{i(l_k - l_m)T} - 1) / (i (l_k - l_m)), T on the diagonal.
  hp::Matrix gram(n);
  for (int k = 0; k < n; ++k) {
    gram(k, k) = hp::Complex(hT);
    for (int m = 0; m < k; ++m) {
      const hp::Real diff = hpf->lambdas[static_cast<std::size_t>(k)] - hpf->lambdas[static_cast<std::size_t>(m)];
      if (diff == 0) singular(f.lambdas_, T, "repeated eigenvalue");
      hp::Complex z = hp::mul_conj(phase[static_cast<std::size_t>(k)], phase[static_cast<std::size_t>(m)]);
      z.re -= 1;
      const hp::Real inv = 1 / diff;
      gram(k, m) = hp::Complex(inv * z.im, -inv * z.re);
      gram(m, k) = hp::conj(gram(k, m));
    }
  }
  hpf->dual = pivoted_cholesky_inverse(gram, f.lambdas_, T);

  hp::Matrix prod(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      hp::Complex acc;
      for (int k = 0; k < n; ++k) acc += gram(i, k) * hpf->dual(k, j);
      prod(i, j) = acc;
    }
  }
  f.gram_ = to_double(gram);
  f.dual_ = to_double(hpf->dual);
  f.biorth_ = to_double(prod);
  f.biorth_residual_ = (f.biorth_ - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  f.max_dual_ = f.dual_.cwiseAbs().maxCoeff();
  f.cond_ = max_eigenvalue(f.gram_) * max_eigenvalue(f.dual_);
  if (!(f.cond_ <= kSingularCond)) {
    std::ostringstream os;
    os << "cond " << f.cond_ << " > " << kSingularCond;
    singular(f.lambdas_, T, os.str());
  }
  f.hp_ = std::move(hpf);
  return f;
}

Eigen::VectorXcd BiorthogonalFamily::q(double t) const {
  const int n = size();
  if (evaluates_in_double()) {
    Eigen::VectorXcd e(n);
    for (int m = 0; m < n; ++m) e[m] = std::polar(1.0, lambdas_[static_cast<std::size_t>(m)] * t);
    return dual_ * e;
  }
  const hp::Real ht(t);
  std::vector<hp::Complex> e(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) e[static_cast<std::size_t>(m)] = hp::expi(hp_->lambdas[static_cast<std::size_t>(m)] * ht);
  Eigen::VectorXcd out(n);
  for (int r = 0; r < n; ++r) {
    hp::Complex acc;
    for (int m = 0; m < n; ++m) acc += hp_->dual(r, m) * e[static_cast<std::size_t>(m)];
    out[r] = acc.to_double();
  }
  return out;
}

Eigen::MatrixXcd BiorthogonalFamily::transfer(const std::vector<double>& freqs, double t) const {
  const int n = size();
  const int nf = static_cast<int>(freqs.size());
  Eigen::MatrixXcd out(nf, n);
  if (evaluates_in_double()) {
    // E(i, m) = integral_0^t e^{i (w_i - l_m) s} ds;  out = E conj(D)^T = E D since D is Hermitian.
    Eigen::MatrixXcd E(nf, n);
    for (int i = 0; i < nf; ++i) {
      for (int m = 0; m < n; ++m) {
        E(i, m) = exp_integral(Complex(0.0, freqs[static_cast<std::size_t>(i)] - lambdas_[static_cast<std::size_t>(m)]), t);
      }
    }
    return E * dual_;
  }
  const hp::Real ht(t);
  std::vector<hp::Complex> em(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) em[static_cast<std::size_t>(m)] = hp::expi(hp_->lambdas[static_cast<std::size_t>(m)] * ht);
  std::vector<hp::Complex> E(static_cast<std::size_t>(n));
  for (int i = 0; i < nf; ++i) {
    const hp::Real w(freqs[static_cast<std::size_t>(i)]);
    const hp::Complex ew = hp::expi(w * ht);
    for (int m = 0; m < n; ++m) {
      const hp::Real a = w - hp_->lambdas[static_cast<std::size_t>(m)];
      if (a == 0) {
        E[static_cast<std::size_t>(m)] = hp::Complex(ht);
        continue;
      }
      hp::Complex z = hp::mul_conj(ew, em[static_cast<std::size_t>(m)]);
      z.re -= 1;
      const hp::Real inv = 1 / a;
      E[static_cast<std::size_t>(m)] = hp::Complex(inv * z.im, -inv * z.re);
    }
    for (int r = 0; r < n; ++r) {
      hp::Complex acc;
      for (int m = 0; m < n; ++m) acc += E[static_cast<std::size_t>(m)] * hp_->dual(m, r);
      out(i, r) = acc.to_double();
    }
  }
  return out;
}

}  // namespace benjctl
