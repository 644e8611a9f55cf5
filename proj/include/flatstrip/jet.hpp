#pragma once

#include <cmath>
#include <complex>

namespace flatstrip {

/// Complex value carrying its partial derivatives in x and y (z = x + iy).
/// Forward-mode differentiation of closed-form expressions.
template <typename Scalar>
struct Jet {
  using C = std::complex<Scalar>;
  C v{};
  C dx{};
  C dy{};

  static Jet constant(C c) { return {c, C{}, C{}}; }
  static Jet variable(C z) { return {z, C{1, 0}, C{0, 1}}; }

  friend Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.dx + b.dx, a.dy + b.dy}; }
  friend Jet operator-(const Jet& a, const Jet& b) { return {a.v - b.v, a.dx - b.dx, a.dy - b.dy}; }
  friend Jet operator-(const Jet& a) { return {-a.v, -a.dx, -a.dy}; }
  friend Jet operator*(const Jet& a, const Jet& b) {
    return {a.v * b.v, a.dx * b.v + a.v * b.dx, a.dy * b.v + a.v * b.dy};
  }
  friend Jet operator/(const Jet& a, const Jet& b) {
    const C inv = C{1, 0} / b.v;
    const C q = a.v * inv;
    return {q, (a.dx - q * b.dx) * inv, (a.dy - q * b.dy) * inv};
  }
};

// Elementwise functions shared by plain complex values and jets, so expression
// evaluation can be written once over the scalar type.

template <typename S> std::complex<S> fs_exp(const std::complex<S>& a) { return std::exp(a); }
template <typename S> std::complex<S> fs_log(const std::complex<S>& a) { return std::log(a); }
template <typename S> std::complex<S> fs_sqrt(const std::complex<S>& a) { return std::sqrt(a); }
template <typename S> std::complex<S> fs_abs(const std::complex<S>& a) { return {std::abs(a), S(0)}; }
template <typename S> std::complex<S> fs_re(const std::complex<S>& a) { return {a.real(), S(0)}; }
template <typename S> std::complex<S> fs_im(const std::complex<S>& a) { return {a.imag(), S(0)}; }
template <typename S> std::complex<S> fs_conj(const std::complex<S>& a) { return std::conj(a); }

template <typename S> Jet<S> fs_exp(const Jet<S>& a) {
  const auto e = std::exp(a.v);
  return {e, e * a.dx, e * a.dy};
}
template <typename S> Jet<S> fs_log(const Jet<S>& a) { return {std::log(a.v), a.dx / a.v, a.dy / a.v}; }
template <typename S> Jet<S> fs_sqrt(const Jet<S>& a) {
  const auto r = std::sqrt(a.v);
  const auto k = S(0.5) / r;
  return {r, a.dx * k, a.dy * k};
}
template <typename S> Jet<S> fs_abs(const Jet<S>& a) {
  const S r = std::abs(a.v);
  if (r == S(0)) return {{S(0), S(0)}, {S(0), S(0)}, {S(0), S(0)}};
  // d|w| = Re(conj(w) dw) / |w|
  return {{r, S(0)}, {(std::conj(a.v) * a.dx).real() / r, S(0)}, {(std::conj(a.v) * a.dy).real() / r, S(0)}};
}
template <typename S> Jet<S> fs_re(const Jet<S>& a) {
  return {{a.v.real(), S(0)}, {a.dx.real(), S(0)}, {a.dy.real(), S(0)}};
}
template <typename S> Jet<S> fs_im(const Jet<S>& a) {
  return {{a.v.imag(), S(0)}, {a.dx.imag(), S(0)}, {a.dy.imag(), S(0)}};
}
template <typename S> Jet<S> fs_conj(const Jet<S>& a) { return {std::conj(a.v), std::conj(a.dx), std::conj(a.dy)}; }

}  // namespace flatstrip
