#pragma once

// Bessel functions J0 and J1 of real argument: ascending series for small r,
// Miller's backward recurrence normalized by J0 + 2 sum J_2k = 1 otherwise.
// Overloads for dual numbers use J0' = -J1 and J1' = J0 - J1/r.

#include <cmath>
#include <utility>

#include "aedg/dual.hpp"
#include "aedg/errors.hpp"

namespace aedg {

namespace detail {

inline std::pair<double, double> bessel_series(double r) {
  const double y = 0.25 * r * r;
  double t0 = 1.0, j0 = 1.0;
  double t1 = 0.5 * r, j1 = t1;
  for (int k = 1; k < 60; ++k) {
    t0 *= -y / (double(k) * k);
    t1 *= -y / (double(k) * (k + 1));
    j0 += t0;
    j1 += t1;
    if (std::abs(t0) < 1e-18 && std::abs(t1) < 1e-18) break;
  }
  return {j0, j1};
}

inline std::pair<double, double> bessel_miller(double r) {
  const int start = 2 * (static_cast<int>(r) + 25);
  double fp1 = 0.0, f = 1e-30, sum = 0.0, j0 = 0.0, j1 = 0.0;
  for (int k = start; k >= 1; --k) {
    const double fm1 = 2.0 * k / r * f - fp1;
    fp1 = f;
    f = fm1;  // f is now f_{k-1}
    if ((k - 1) % 2 == 0 && k - 1 > 0) sum += 2.0 * f;
    if (k - 1 == 1) j1 = f;
    if (std::abs(f) > 1e250) {
      f *= 1e-250;
      fp1 *= 1e-250;
      sum *= 1e-250;
      j1 *= 1e-250;
    }
  }
  j0 = f;
  sum += j0;
  return {j0 / sum, j1 / sum};
}

}  // namespace detail

/// (J0(r), J1(r)) for r >= 0.
inline std::pair<double, double> bessel_j01(double r) {
  if (r < 0 || !std::isfinite(r)) throw DomainError("bessel_j01: r must be finite and >= 0");
  return r < 2.0 ? detail::bessel_series(r) : detail::bessel_miller(r);
}

inline double bessel_j0(double r) { return bessel_j01(r).first; }
inline double bessel_j1(double r) { return bessel_j01(r).second; }

template <class T> Dual<T> bessel_j0(const Dual<T>& r) { return {bessel_j0(r.v), -(bessel_j1(r.v) * r.d)}; }

template <class T> Dual<T> bessel_j1(const Dual<T>& r) {
  const T j0 = bessel_j0(r.v), j1 = bessel_j1(r.v);
  return {j1, (j0 - j1 / r.v) * r.d};
}

}  // namespace aedg
