#pragma once

// Star states at element faces. All kernels are pointwise and pure: they take
// two-sided trace data at one face quadrature point and return single-valued
// numerical fluxes.
//
// Sign conventions:
//  * fluid-solid interface: n is the fluid's outward normal (n = n_f = -n_s);
//    solid tractions are sigma.n with this n.
//  * interior faces: n is the owner's outward normal; both traces are
//    expressed with it, so the neighbor's normal derivative / traction must be
//    negated by the caller.
//  * boundary faces: n is the element's outward normal.

#include <cmath>
#include <string>

#include "aedg/errors.hpp"
#include "aedg/geometry.hpp"
#include "aedg/mesh.hpp"

namespace aedg {

enum class FluxMode { energy_conserving, upwind, alternating0, alternating1 };

inline FluxMode parse_flux_mode(const std::string& s) {
  if (s == "conserving" || s == "energy_conserving") return FluxMode::energy_conserving;
  if (s == "upwind") return FluxMode::upwind;
  if (s == "alt0" || s == "alternating0") return FluxMode::alternating0;
  if (s == "alt1" || s == "alternating1") return FluxMode::alternating1;
  throw ConfigError("unknown flux mode '" + s + "'");
}

inline const char* to_string(FluxMode m) {
  switch (m) {
    case FluxMode::energy_conserving: return "conserving";
    case FluxMode::upwind: return "upwind";
    case FluxMode::alternating0: return "alt0";
    default: return "alt1";
  }
}

struct FluxParams {
  double tau = 0.5;
  double alpha = -1.0;  // interface dissipation on the normal-stress mismatch
  double beta = -1.0;   // interface dissipation on the normal-velocity mismatch
  double gamma_fluid = 0.5;
  double gamma_solid = 0.5;
  FluxMode mode = FluxMode::upwind;

  static FluxParams from_mode(FluxMode mode) {
    FluxParams p;
    p.mode = mode;
    switch (mode) {
      case FluxMode::energy_conserving:
        p.tau = 0.5;
        p.alpha = p.beta = 0.0;
        p.gamma_fluid = p.gamma_solid = 0.0;
        break;
      case FluxMode::upwind: break;
      case FluxMode::alternating0: p.tau = 0.0; break;
      case FluxMode::alternating1: p.tau = 1.0; break;
    }
    return p;
  }

  void validate() const {
    if (alpha > 0 || beta > 0) throw ConfigError("interface flux requires alpha <= 0 and beta <= 0");
    if (gamma_fluid < 0 || gamma_solid < 0) throw ConfigError("dissipation weights must be >= 0");
    if (mode == FluxMode::energy_conserving && (alpha != 0 || beta != 0 || gamma_fluid != 0 || gamma_solid != 0))
      throw ConfigError("energy_conserving mode requires alpha = beta = gamma = 0");
  }
};

struct FluidTrace {
  double p = 0;       // p^h
  double dpsi_n = 0;  // grad psi^h . n
};

struct SolidTrace {
  Vec2 v = Vec2::Zero();         // v^h
  Vec2 traction = Vec2::Zero();  // sigma^h . n
};

struct FluidStar {
  double p = 0;       // p*
  double dpsi_n = 0;  // (grad psi . n)*
};

struct SolidStar {
  Vec2 v = Vec2::Zero();         // v*
  Vec2 traction = Vec2::Zero();  // (sigma . n)*
};

struct StarStates {
  FluidStar fluid;
  SolidStar solid;
};

inline void require_frame(const Vec2& n, const Vec2& m) {
  constexpr double tol = 1e-10;
  if (std::abs(n.squaredNorm() - 1) > tol || std::abs(m.squaredNorm() - 1) > tol || std::abs(n.dot(m)) > tol)
    throw ContractViolation("interface flux needs an orthonormal (n, m) frame");
}

/// Coupling fluxes at the fluid-solid interface. Normal components follow the
/// tau/alpha/beta family; the tangential velocity passes through and the
/// tangential traction vanishes. Vector star states are recomposed in (n, m).
inline StarStates interface_flux(const FluidTrace& f, const SolidTrace& s, const Vec2& n, const Vec2& m,
                                 const FluxParams& prm) {
  require_frame(n, m);
  const double vn = s.v.dot(n), vm = s.v.dot(m);
  const double snn = s.traction.dot(n);
  const double tau = prm.tau;

  const double vel_n = tau * vn + (1 - tau) * f.dpsi_n - prm.alpha * (snn - f.p);
  const double press = tau * f.p + (1 - tau) * snn - prm.beta * (vn - f.dpsi_n);

  StarStates out;
  out.fluid.p = press;
  out.fluid.dpsi_n = vel_n;
  out.solid.v = vel_n * n + vm * m;
  out.solid.traction = press * n;
  return out;
}

/// Interface energy-rate integrand: fluid side plus solid side contributions
/// for the given traces and star states.
inline double interface_energy_rate(const FluidTrace& f, const SolidTrace& s, const StarStates& st) {
  return (st.fluid.p - f.p) * f.dpsi_n + f.p * st.fluid.dpsi_n - s.traction.dot(st.solid.v - s.v) -
         st.solid.traction.dot(s.v);
}

/// alpha (n.sigma.n - p)^2 + beta (grad psi.n - v.n)^2
inline double interface_dissipation(const FluidTrace& f, const SolidTrace& s, const Vec2& n, const FluxParams& prm) {
  const double a = s.traction.dot(n) - f.p;
  const double b = f.dpsi_n - s.v.dot(n);
  return prm.alpha * a * a + prm.beta * b * b;
}

/// Average plus impedance-scaled jump penalty. Both traces use the owner normal.
inline FluidStar interior_flux_fluid(const FluidTrace& owner, const FluidTrace& nb, double c, double gamma) {
  const double jump_p = owner.p - nb.p;
  const double jump_a = owner.dpsi_n - nb.dpsi_n;
  return {0.5 * (owner.p + nb.p) - gamma * c * jump_a, 0.5 * (owner.dpsi_n + nb.dpsi_n) - gamma / c * jump_p};
}

inline SolidStar interior_flux_solid(const SolidTrace& owner, const SolidTrace& nb, double z, double gamma) {
  const Vec2 jump_v = owner.v - nb.v;
  const Vec2 jump_t = owner.traction - nb.traction;
  return {0.5 * (owner.v + nb.v) - gamma / z * jump_t, 0.5 * (owner.traction + nb.traction) - gamma * z * jump_v};
}

/// Owner-plus-neighbor energy rate of an interior fluid face (owner normal convention).
inline double interior_energy_rate(const FluidTrace& o, const FluidTrace& nb, const FluidStar& st) {
  return (st.p - o.p) * o.dpsi_n + o.p * st.dpsi_n - (st.p - nb.p) * nb.dpsi_n - nb.p * st.dpsi_n;
}

inline double interior_energy_rate(const SolidTrace& o, const SolidTrace& nb, const SolidStar& st) {
  return o.traction.dot(st.v - o.v) + o.v.dot(st.traction) - nb.traction.dot(st.v - nb.v) - nb.v.dot(st.traction);
}

/// Boundary data at one point. Dirichlet fluid uses dg_dt = dpsi/dt, Neumann
/// uses g = grad psi.n; Dirichlet solid uses dg_dt = du/dt, traction-free uses
/// traction = sigma.n (zero for a free surface).
struct FluidBoundaryData {
  double dg_dt = 0;
  double g = 0;
};

struct SolidBoundaryData {
  Vec2 dg_dt = Vec2::Zero();
  Vec2 traction = Vec2::Zero();
};

inline FluidStar boundary_flux(const FluidTrace& tr, BoundaryCondition bc, const FluidBoundaryData& data, double c,
                               double gamma) {
  switch (bc) {
    case BoundaryCondition::dirichlet: return {data.dg_dt, tr.dpsi_n - gamma / c * (tr.p - data.dg_dt)};
    case BoundaryCondition::neumann: return {tr.p - gamma * c * (tr.dpsi_n - data.g), data.g};
    default: throw ConfigError("boundary condition not valid for a fluid boundary");
  }
}

inline SolidStar boundary_flux(const SolidTrace& tr, BoundaryCondition bc, const SolidBoundaryData& data, double z,
                               double gamma) {
  switch (bc) {
    case BoundaryCondition::dirichlet: return {data.dg_dt, tr.traction - gamma * z * (tr.v - data.dg_dt)};
    case BoundaryCondition::free_traction: return {tr.v - gamma / z * (tr.traction - data.traction), data.traction};
    default: throw ConfigError("boundary condition not valid for a solid boundary");
  }
}

inline double boundary_energy_rate(const FluidTrace& tr, const FluidStar& st) {
  return (st.p - tr.p) * tr.dpsi_n + tr.p * st.dpsi_n;
}

inline double boundary_energy_rate(const SolidTrace& tr, const SolidStar& st) {
  return tr.traction.dot(st.v - tr.v) + tr.v.dot(st.traction);
}

}  // namespace aedg
