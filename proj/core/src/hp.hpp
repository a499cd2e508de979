#pragma once

// 100-digit real and complex arithmetic for the Gram matrix of exponentials.
// boost's cpp_complex is much slower than a plain pair of reals here, so the
// complex type is hand-rolled.

#include <complex>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace benjctl::hp {

using Real = boost::multiprecision::cpp_bin_float_100;

struct Complex {
  Real re;
  Real im;

  Complex() = default;
  Complex(Real r, Real i = Real(0)) : re(std::move(r)), im(std::move(i)) {}
  explicit Complex(std::complex<double> z) : re(z.real()), im(z.imag()) {}

  std::complex<double> to_double() const { return {re.convert_to<double>(), im.convert_to<double>()}; }

  Complex& operator+=(const Complex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Complex& operator-=(const Complex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
};

inline Complex operator+(Complex a, const Complex& b) { return a += b; }
inline Complex operator-(Complex a, const Complex& b) { return a -= b; }
inline Complex operator*(const Complex& a, const Complex& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline Complex operator*(const Real& s, const Complex& a) { return {s * a.re, s * a.im}; }
inline Complex conj(const Complex& a) { return {a.re, -a.im}; }
inline Real norm(const Complex& a) { return a.re * a.re + a.im * a.im; }
/// a * conj(b)
inline Complex mul_conj(const Complex& a, const Complex& b) {
  return {a.re * b.re + a.im * b.im, a.im * b.re - a.re * b.im};
}
inline Complex expi(const Real& theta) { return {cos(theta), sin(theta)}; }

/// Dense row-major square matrix.
struct Matrix {
  int n = 0;
  std::vector<Complex> a;

  explicit Matrix(int size = 0) : n(size), a(static_cast<std::size_t>(size) * size) {}
  Complex& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  const Complex& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

}  // namespace benjctl::hp
