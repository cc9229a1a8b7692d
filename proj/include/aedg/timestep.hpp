#pragma once

// Time-step rules and the classical four-stage Runge-Kutta integrator.

#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "aedg/errors.hpp"

namespace aedg {

enum class DtRule { standing_wave, contrast, inversion_material, manual };

inline DtRule parse_dt_rule(const std::string& s) {
  if (s == "standing_wave") return DtRule::standing_wave;
  if (s == "contrast") return DtRule::contrast;
  if (s == "inversion_material") return DtRule::inversion_material;
  if (s == "manual") return DtRule::manual;
  throw ConfigError("unknown dt rule '" + s + "'");
}

inline const char* to_string(DtRule r) {
  switch (r) {
    case DtRule::standing_wave: return "standing_wave";
    case DtRule::contrast: return "contrast";
    case DtRule::inversion_material: return "inversion_material";
    default: return "manual";
  }
}

struct TimeStepRule {
  DtRule rule = DtRule::standing_wave;
  double h = 0;
  int q = 0;
  double c_max = 1;      // largest wave speed (contrast rule)
  double rho_scale = 1;  // density scaling of the contrast rule
  double mu = 1, lambda = 1;
  double manual_dt = 0;
};

inline double select_dt(const TimeStepRule& r) {
  switch (r.rule) {
    case DtRule::standing_wave:
      if (r.q <= 0) throw ConfigError("standing_wave dt rule requires q >= 1");
      if (!(r.h > 0)) throw ConfigError("dt rule requires h > 0");
      return 0.5 * r.h / (r.q * r.q);
    case DtRule::contrast:
      if (!(r.h > 0 && r.c_max > 0 && r.rho_scale > 0 && r.q >= 0)) throw ConfigError("invalid contrast dt parameters");
      return 1.4 * r.h / (r.c_max * (r.q + 1.5) * (r.q + 1.5) * r.rho_scale);
    case DtRule::inversion_material:
      if (!(r.h > 0 && 2 * r.mu + r.lambda > 0 && r.q >= 0)) throw ConfigError("invalid inversion dt parameters");
      return r.h * 0.15 / (std::sqrt(2 * r.mu + r.lambda) * (r.q + 1.5));
    case DtRule::manual:
      if (!(r.manual_dt > 0)) throw ConfigError("manual dt must be > 0");
      return r.manual_dt;
  }
  throw ConfigError("unknown dt rule");
}

using Rhs = std::function<void(const Eigen::VectorXd& y, double t, Eigen::VectorXd& dydt)>;

/// Reusable stage storage so repeated steps do not allocate.
class Rk4 {
 public:
  explicit Rk4(Rhs rhs) : rhs_(std::move(rhs)) {}

  void step(Eigen::VectorXd& y, double t, double dt) {
    const Eigen::Index n = y.size();
    k1_.resize(n), k2_.resize(n), k3_.resize(n), k4_.resize(n), tmp_.resize(n);
    rhs_(y, t, k1_);
    tmp_ = y + 0.5 * dt * k1_;
    rhs_(tmp_, t + 0.5 * dt, k2_);
    tmp_ = y + 0.5 * dt * k2_;
    rhs_(tmp_, t + 0.5 * dt, k3_);
    tmp_ = y + dt * k3_;
    rhs_(tmp_, t + dt, k4_);
    y += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    if (!y.allFinite()) throw IntegrationError("non-finite state after time step", t + dt);
  }

 private:
  Rhs rhs_;
  Eigen::VectorXd k1_, k2_, k3_, k4_, tmp_;
};

inline Eigen::VectorXd rk4_step(const Eigen::VectorXd& y, double t, double dt, const Rhs& rhs) {
  Eigen::VectorXd out = y;
  Rk4(rhs).step(out, t, dt);
  return out;
}

/// Number of equal steps covering [0, T] with step at most dt_max.
inline int step_count(double T, double dt_max) {
  if (!(T > 0 && dt_max > 0)) throw ConfigError("final time and dt must be > 0");
  return static_cast<int>(std::ceil(T / dt_max - 1e-12));
}

}  // namespace aedg
