#pragma once

// Exact solutions of the coupled problem, the point source pulse, and the
// residual audit that every exact solution must pass before it is used as a
// reference. Fields are written once as templates over the scalar type so
// that values, gradients and Hessians all come from the same formulas.

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "aedg/bessel.hpp"
#include "aedg/dual.hpp"
#include "aedg/errors.hpp"
#include "aedg/geometry.hpp"
#include "aedg/mesh.hpp"

namespace aedg {

/// Primary fields; p = dpsi/dt and v = du/dt follow by differentiation.
template <class T>
struct Potentials {
  T psi{}, u1{}, u2{};
};

struct FieldSample {
  double psi = 0, p = 0;
  Vec2 u = Vec2::Zero(), v = Vec2::Zero();
};

struct ResidualReport {
  double fluid_pde = 0;
  double solid_pde = 0;
  double interface = 0;
  double max() const { return std::max({fluid_pde, solid_pde, interface}); }
};

class ExactSolution {
 public:
  virtual ~ExactSolution() = default;
  virtual std::string name() const = 0;
  virtual Potentials<double> raw(double x1, double x2, double t) const = 0;
  virtual Potentials<D1> raw(D1 x1, D1 x2, D1 t) const = 0;
  virtual Potentials<D2> raw(D2 x1, D2 x2, D2 t) const = 0;
  virtual FluidMaterial fluid() const = 0;
  virtual SolidMaterial solid() const = 0;
  /// Interface point for s in [0,1] with the fluid's outward normal.
  virtual std::pair<Vec2, Vec2> interface_point(double s) const = 0;
  /// Points filling the fluid / solid regions for (a,b) in [0,1]^2.
  virtual Vec2 fluid_point(double a, double b) const = 0;
  virtual Vec2 solid_point(double a, double b) const = 0;

  FieldSample eval(const Vec2& x, double t) const {
    const auto r = raw(seed1(x.x(), false), seed1(x.y(), false), seed1(t, true));
    return {r.psi.v, r.psi.d, Vec2(r.u1.v, r.u2.v), Vec2(r.u1.d, r.u2.d)};
  }

  Vec2 grad_psi(const Vec2& x, double t) const {
    const auto a = raw(seed1(x.x(), true), seed1(x.y(), false), seed1(t, false));
    const auto b = raw(seed1(x.x(), false), seed1(x.y(), true), seed1(t, false));
    return {a.psi.d, b.psi.d};
  }

  /// (du_i/dx_j)
  Mat2 grad_u(const Vec2& x, double t) const {
    const auto a = raw(seed1(x.x(), true), seed1(x.y(), false), seed1(t, false));
    const auto b = raw(seed1(x.x(), false), seed1(x.y(), true), seed1(t, false));
    Mat2 g;
    g << a.u1.d, b.u1.d, a.u2.d, b.u2.d;
    return g;
  }

  Mat2 stress(const Vec2& x, double t) const {
    const Mat2 g = grad_u(x, t);
    const auto m = solid();
    const double div = g(0, 0) + g(1, 1);
    Mat2 s;
    s(0, 0) = m.lambda * div + 2 * m.mu * g(0, 0);
    s(1, 1) = m.lambda * div + 2 * m.mu * g(1, 1);
    s(0, 1) = s(1, 0) = m.mu * (g(0, 1) + g(1, 0));
    return s;
  }

  /// Second derivative d^2/(da db); variables indexed 0 = x1, 1 = x2, 2 = t.
  Potentials<double> second(const Vec2& x, double t, int a, int b) const {
    const auto r = raw(seed2(x.x(), a == 0, b == 0), seed2(x.y(), a == 1, b == 1), seed2(t, a == 2, b == 2));
    return {r.psi.d.d, r.u1.d.d, r.u2.d.d};
  }

  /// Relative residuals of both wave equations and the three interface
  /// conditions at random points and times.
  ResidualReport audit(int samples = 100, std::uint64_t seed = 7) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto fm = fluid();
    const auto sm = solid();
    const double lam = sm.lambda, mu = sm.mu;
    auto rel = [](double res, double scale) { return std::abs(res) / std::max(1.0, scale); };
    ResidualReport rep;
    for (int k = 0; k < samples; ++k) {
      const double t = 2.0 * unit(rng);
      {
        const Vec2 x = fluid_point(unit(rng), unit(rng));
        const double tt = second(x, t, 2, 2).psi, xx = second(x, t, 0, 0).psi, yy = second(x, t, 1, 1).psi;
        const double a = tt / (fm.c * fm.c);
        rep.fluid_pde = std::max(rep.fluid_pde, rel(a - xx - yy, std::abs(a) + std::abs(xx) + std::abs(yy)));
      }
      {
        const Vec2 x = solid_point(unit(rng), unit(rng));
        const auto tt = second(x, t, 2, 2), xx = second(x, t, 0, 0), xy = second(x, t, 0, 1), yy = second(x, t, 1, 1);
        const double f1[] = {sm.rho * tt.u1, (lam + 2 * mu) * xx.u1, lam * xy.u2, mu * yy.u1, mu * xy.u2};
        const double f2[] = {sm.rho * tt.u2, mu * xy.u1, mu * xx.u2, lam * xy.u1, (lam + 2 * mu) * yy.u2};
        double r1 = f1[0], s1 = 0, r2 = f2[0], s2 = 0;
        for (int i = 0; i < 5; ++i) {
          if (i) r1 -= f1[i], r2 -= f2[i];
          s1 += std::abs(f1[i]);
          s2 += std::abs(f2[i]);
        }
        rep.solid_pde = std::max({rep.solid_pde, rel(r1, s1), rel(r2, s2)});
      }
      {
        const auto [x, n] = interface_point(unit(rng));
        const Vec2 m(-n.y(), n.x());
        const FieldSample f = eval(x, t);
        const Vec2 gp = grad_psi(x, t);
        const Vec2 tr = stress(x, t) * n;
        const double kin = gp.dot(n) - f.v.dot(n);
        const double nrm = f.p - tr.dot(n);
        const double tan = tr.dot(m);
        rep.interface = std::max({rep.interface, rel(kin, std::abs(gp.dot(n)) + std::abs(f.v.dot(n))),
                                  rel(nrm, std::abs(f.p) + std::abs(tr.dot(n))), rel(tan, tr.norm())});
      }
    }
    return rep;
  }
};

namespace detail {

template <class Derived>
class ExactImpl : public ExactSolution {
 public:
  Potentials<double> raw(double x1, double x2, double t) const override { return self().fields(x1, x2, t); }
  Potentials<D1> raw(D1 x1, D1 x2, D1 t) const override { return self().fields(x1, x2, t); }
  Potentials<D2> raw(D2 x1, D2 x2, D2 t) const override { return self().fields(x1, x2, t); }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

/// Fluid [0,2]x[0,2] above solid [0,2]x[-2,0], interface x2 = 0.
template <class Derived>
class FlatInterface : public ExactImpl<Derived> {
 public:
  std::pair<Vec2, Vec2> interface_point(double s) const override { return {Vec2(2.0 * s, 0.0), Vec2(0.0, -1.0)}; }
  Vec2 fluid_point(double a, double b) const override { return {2.0 * a, 2.0 * b}; }
  Vec2 solid_point(double a, double b) const override { return {2.0 * a, -2.0 * b}; }
};

}  // namespace detail

inline Box flat_fluid_box() { return {0.0, 2.0, 0.0, 2.0}; }
inline Box flat_solid_box() { return {0.0, 2.0, -2.0, 0.0}; }

struct StandingWaveSpec {
  double k = std::numbers::pi;
  double a = -std::numbers::pi / 4;
  double b = -std::numbers::pi / 4;
  double c = -std::numbers::pi / 4;  // phase
};

/// Separable standing wave with c = rho = lambda = mu = 1.
class StandingWave final : public detail::FlatInterface<StandingWave> {
 public:
  explicit StandingWave(StandingWaveSpec spec = {}) : s_(spec) {
    if (s_.k == 0) throw ConfigError("standing wave requires k != 0");
  }
  std::string name() const override { return "standing_wave"; }
  FluidMaterial fluid() const override { return {1.0}; }
  SolidMaterial solid() const override { return {1.0, 1.0, 1.0}; }

  template <class T>
  Potentials<T> fields(T x1, T x2, T t) const {
    using std::cos, std::sin;
    const double r2 = std::sqrt(2.0);
    const T om = r2 * s_.k * t + s_.c;
    const T sx = sin(s_.k * x1 + s_.a), cx = cos(s_.k * x1 + s_.a);
    const T sy = sin(s_.k * x2 + s_.b), cy = cos(s_.k * x2 + s_.b);
    return {r2 * sx * sy * sin(om), cx * sy * cos(om), -(sx * cy * cos(om))};
  }

 private:
  StandingWaveSpec s_;
};

struct SnellSpec {
  double c = 1.0, cp = 3.0, cs = 2.0;
  double rho_f = 1.0, rho_s = 1.0;
  double omega = 2.0 * std::numbers::pi;
  double alpha_i = 0.2;
  double A_i = 1.0;
};

/// Derived wave numbers, angles, impedances and amplitudes.
struct SnellCoefficients {
  double k = 0, kp = 0, ks = 0;
  double alpha_r = 0, alpha_p = 0, alpha_s = 0;
  double Z = 0, Zp = 0, Zs = 0;
  double A_r = 0, A_p = 0, A_s = 0;
};

/// Impedances carry the densities (Z_p = rho_s c_p / cos alpha_p, ...) and the
/// transmitted amplitudes the factor rho_f / rho_s; at equal densities this is
/// the classical unit-density formula.
inline SnellCoefficients snell_coefficients(const SnellSpec& s) {
  if (!(s.c > 0 && s.cp > 0 && s.cs > 0 && s.rho_f > 0 && s.rho_s > 0 && s.omega > 0))
    throw ConfigError("Snell configuration requires positive speeds, densities and frequency");
  const double sn = std::sin(s.alpha_i) / s.c;
  if (std::abs(sn * s.cp) >= 1.0 || std::abs(sn * s.cs) >= 1.0)
    throw ConfigError("post-critical incidence is not supported");
  SnellCoefficients k;
  k.k = s.omega / s.c;
  k.kp = s.omega / s.cp;
  k.ks = s.omega / s.cs;
  k.alpha_r = s.alpha_i;
  k.alpha_p = std::asin(sn * s.cp);
  k.alpha_s = std::asin(sn * s.cs);
  k.Z = s.rho_f * s.c / std::cos(s.alpha_i);
  k.Zp = s.rho_s * s.cp / std::cos(k.alpha_p);
  k.Zs = s.rho_s * s.cs / std::cos(k.alpha_s);
  const double c2 = std::cos(2 * k.alpha_s), s2 = std::sin(2 * k.alpha_s);
  const double den = k.Zp * c2 * c2 + k.Zs * s2 * s2 + k.Z;
  const double ratio = s.rho_f / s.rho_s;
  k.A_r = s.A_i * (k.Zp * c2 * c2 + k.Zs * s2 * s2 - k.Z) / den;
  k.A_p = s.A_i * ratio * (s.c / s.cp) * 2 * k.Zp * c2 / den;
  k.A_s = s.A_i * ratio * (s.c / s.cs) * 2 * k.Zs * s2 / den;
  return k;
}

/// Plane pressure wave hitting the flat interface: incident and reflected
/// waves in the fluid, transmitted P and S waves in the solid.
class SnellSolution final : public detail::FlatInterface<SnellSolution> {
 public:
  explicit SnellSolution(SnellSpec spec = {}) : s_(spec), k_(snell_coefficients(spec)) {}
  std::string name() const override { return s_.rho_s == s_.rho_f ? "snell" : "snell_contrast"; }
  FluidMaterial fluid() const override { return {s_.c}; }
  SolidMaterial solid() const override {
    const double mu = s_.rho_s * s_.cs * s_.cs;
    return {s_.rho_s, s_.rho_s * s_.cp * s_.cp - 2 * mu, mu};
  }
  const SnellCoefficients& coefficients() const { return k_; }
  const SnellSpec& spec() const { return s_; }

  template <class T>
  Potentials<T> fields(T x1, T x2, T t) const {
    using std::cos, std::sin;
    const double w = s_.omega;
    const double si = std::sin(s_.alpha_i), ci = std::cos(s_.alpha_i);
    const double sr = std::sin(k_.alpha_r), cr = std::cos(k_.alpha_r);
    const double sp = std::sin(k_.alpha_p), cp = std::cos(k_.alpha_p);
    const double ss = std::sin(k_.alpha_s), cs = std::cos(k_.alpha_s);
    const T psi_i = -(s_.A_i * w / k_.k) * cos(k_.k * (si * x1 + ci * x2) - w * t);
    const T psi_r = -(k_.A_r * w / k_.k) * cos(k_.k * (sr * x1 - cr * x2) - w * t);
    const T ph_p = cos(k_.kp * (sp * x1 + cp * x2) - w * t);
    const T ph_s = cos(k_.ks * (ss * x1 + cs * x2) - w * t);
    return {psi_i + psi_r, k_.A_p * sp * ph_p - k_.A_s * cs * ph_s, k_.A_p * cp * ph_p + k_.A_s * ss * ph_s};
  }

 private:
  SnellSpec s_;
  SnellCoefficients k_;
};

/// Scaled water / aluminum parameters.
inline SnellSpec snell_contrast_spec() {
  SnellSpec s;
  s.c = 1.5;
  s.cp = 6.42;
  s.cs = 3.04;
  s.rho_s = 2.7;
  return s;
}

struct ScholteSpec {
  double omega = 2.0 * std::numbers::pi;
  double c_sch = 0.7110017230197;
  double B1 = -0.3594499773037;
  double B2 = -0.8194642725978;
  double B3 = 1.0;
};

/// Interface wave with c = rho = lambda = mu = 1, decaying away from x2 = 0.
class ScholteWave final : public detail::FlatInterface<ScholteWave> {
 public:
  explicit ScholteWave(ScholteSpec spec = {}) : s_(spec) {
    const double c1 = 1.0, c2p = std::sqrt(3.0), c2s = 1.0;
    const double r = s_.c_sch;
    if (!(r > 0 && r < c2s)) throw ConfigError("Scholte speed must be below every bulk speed");
    k_ = s_.omega / r;
    b1_ = std::sqrt(1 - r * r / (c1 * c1));
    b2p_ = std::sqrt(1 - r * r / (c2p * c2p));
    b2s_ = std::sqrt(1 - r * r / (c2s * c2s));
  }
  std::string name() const override { return "scholte"; }
  FluidMaterial fluid() const override { return {1.0}; }
  SolidMaterial solid() const override { return {1.0, 1.0, 1.0}; }
  double k() const { return k_; }
  double b1() const { return b1_; }
  double b2p() const { return b2p_; }
  double b2s() const { return b2s_; }

  template <class T>
  Potentials<T> fields(T x1, T x2, T t) const {
    using std::cos, std::exp, std::sin;
    const double w = s_.omega, k = k_;
    const T ph = k * x1 - w * t;
    const T ep = exp(k * b2p_ * x2), es = exp(k * b2s_ * x2);
    const T psi = s_.B1 * w * exp(-(k * b1_) * x2) * cos(ph);
    const T u1 = (-(k * s_.B2) * ep - (k * b2s_ * s_.B3) * es) * cos(ph);
    const T u2 = (-(k * s_.B2 * b2p_) * ep - (k * s_.B3) * es) * sin(ph);
    return {psi, u1, u2};
  }

 private:
  ScholteSpec s_;
  double k_ = 0, b1_ = 0, b2p_ = 0, b2s_ = 0;
};

struct AnnulusSpec {
  double r0 = 3.83170597020751;  // J1 root
  double r1 = 7.01558666981561;  // J1 root
  double r2 = 8.65372791291101;  // J0 root
  double rho = 1.0, lambda = 0.5, mu = 0.25;
};

/// Residual of the interface solvability condition in the form it is usually
/// printed; every term carries a factor that vanishes at a root of J1.
inline double annulus_solvability_residual(const AnnulusSpec& s) {
  const double r = s.r1;
  const double j0 = bessel_j0(r), j1 = bessel_j1(r);
  const double dj0 = -j1, dj1 = j0 - j1 / r;
  return (2 * s.mu + s.lambda) * dj1 * dj0 + s.lambda / r * j1 * dj0 + s.lambda / r * j1 * j0;
}

/// Radial breathing mode: solid r0..r1, fluid r1..r2 (c = 1).
class AnnulusMode final : public detail::ExactImpl<AnnulusMode> {
 public:
  explicit AnnulusMode(AnnulusSpec spec = {}) : s_(spec) {
    if (!(0 < s_.r0 && s_.r0 < s_.r1 && s_.r1 < s_.r2)) throw ConfigError("annulus radii out of order");
  }
  std::string name() const override { return "annulus"; }
  FluidMaterial fluid() const override { return {1.0}; }
  SolidMaterial solid() const override { return {s_.rho, s_.lambda, s_.mu}; }
  const AnnulusSpec& spec() const { return s_; }

  std::pair<Vec2, Vec2> interface_point(double s) const override {
    const double th = 2 * std::numbers::pi * s;
    const Vec2 e(std::cos(th), std::sin(th));
    return {s_.r1 * e, -e};
  }
  Vec2 fluid_point(double a, double b) const override { return polar(s_.r1 + a * (s_.r2 - s_.r1), b); }
  Vec2 solid_point(double a, double b) const override { return polar(s_.r0 + a * (s_.r1 - s_.r0), b); }

  template <class T>
  Potentials<T> fields(T x1, T x2, T t) const {
    using std::cos, std::sin, std::sqrt;
    const T r = sqrt(x1 * x1 + x2 * x2);
    const T ur = bessel_j1(r) * cos(t);
    return {bessel_j0(r) * sin(t), ur * x1 / r, ur * x2 / r};
  }

 private:
  static Vec2 polar(double r, double b) {
    const double th = 2 * std::numbers::pi * b;
    return {r * std::cos(th), r * std::sin(th)};
  }
  AnnulusSpec s_;
};

/// Ricker-type pulse A(t) = -2 w0^2 (t - t0) exp(-(w0 (t - t0))^2).
struct PointSource {
  Vec2 x = Vec2(0.1, 1.8);
  double t0 = 1.0;
  double w0 = 6.0;
  double amplitude(double t) const {
    const double s = t - t0;
    return -2.0 * w0 * w0 * s * std::exp(-(w0 * s) * (w0 * s));
  }
};

struct Receiver {
  Vec2 x = Vec2::Zero();
};

}  // namespace aedg
