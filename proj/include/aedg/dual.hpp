#pragma once

// Forward-mode dual numbers. Nesting Dual<Dual<double>> yields mixed second
// derivatives, which the exact-solution residual audits rely on.

#include <cmath>

namespace aedg {

template <class T>
struct Dual {
  T v{};
  T d{};
  Dual() = default;
  Dual(double c) : v(c), d(0.0) {}  // NOLINT: constants promote implicitly
  Dual(T value, T deriv) : v(value), d(deriv) {}
};

using D1 = Dual<double>;
using D2 = Dual<D1>;

template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }

template <class T> Dual<T> operator+(const Dual<T>& a, double b) { return {a.v + b, a.d}; }
template <class T> Dual<T> operator+(double a, const Dual<T>& b) { return {a + b.v, b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, double b) { return {a.v - b, a.d}; }
template <class T> Dual<T> operator-(double a, const Dual<T>& b) { return {a - b.v, -b.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, double b) { return {a.v * b, a.d * b}; }
template <class T> Dual<T> operator*(double a, const Dual<T>& b) { return {a * b.v, a * b.d}; }
template <class T> Dual<T> operator/(const Dual<T>& a, double b) { return {a.v / b, a.d / b}; }
template <class T> Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }

template <class T> Dual<T> sin(const Dual<T>& x) {
  using std::cos, std::sin;
  return {sin(x.v), cos(x.v) * x.d};
}
template <class T> Dual<T> cos(const Dual<T>& x) {
  using std::cos, std::sin;
  return {cos(x.v), -(sin(x.v) * x.d)};
}
template <class T> Dual<T> exp(const Dual<T>& x) {
  using std::exp;
  const T e = exp(x.v);
  return {e, e * x.d};
}
template <class T> Dual<T> sqrt(const Dual<T>& x) {
  using std::sqrt;
  const T s = sqrt(x.v);
  return {s, x.d / (2.0 * s)};
}

inline double value_of(double x) { return x; }
template <class T> double value_of(const Dual<T>& x) { return value_of(x.v); }

/// Variable seeded for a first derivative.
inline D1 seed1(double x, bool active) { return {x, active ? 1.0 : 0.0}; }

/// Variable seeded for the mixed derivative d^2/(da db): outer seed a, inner seed b.
inline D2 seed2(double x, bool a, bool b) { return {D1{x, b ? 1.0 : 0.0}, D1{a ? 1.0 : 0.0, 0.0}}; }

}  // namespace aedg
