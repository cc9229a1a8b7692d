#pragma once

// Misfit-driven parameter recovery: receiver misfit, forward-difference
// gradients, a projected BFGS loop with Armijo backtracking, and the two
// forward models (interface shape, per-element lambda perturbation).

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aedg/analytic.hpp"
#include "aedg/errors.hpp"
#include "aedg/fluxes.hpp"
#include "aedg/mesh.hpp"
#include "aedg/solver.hpp"
#include "aedg/timestep.hpp"

namespace aedg {

using Traces = std::vector<std::vector<double>>;  // receiver x time sample

/// sum over receivers of the trapezoid rule for int (a - b)^2 dt on a uniform grid.
inline double trace_misfit(const Traces& a, const Traces& b, double dt) {
  if (a.size() != b.size()) throw ContractViolation("trace_misfit: receiver count mismatch");
  double j = 0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (a[r].size() != b[r].size()) throw ContractViolation("trace_misfit: sample count mismatch");
    const std::size_t n = a[r].size();
    for (std::size_t k = 0; k < n; ++k) {
      const double d = a[r][k] - b[r][k];
      j += (k == 0 || k + 1 == n ? 0.5 : 1.0) * d * d * dt;
    }
  }
  return j;
}

struct Box1 {
  Eigen::VectorXd lo, hi;
  Eigen::VectorXd project(const Eigen::VectorXd& x) const { return x.cwiseMax(lo).cwiseMin(hi); }
  bool contains(const Eigen::VectorXd& x) const {
    return ((x - lo).array() >= 0).all() && ((hi - x).array() >= 0).all();
  }
};

/// Cost of a parameter vector; empty when the forward solve failed.
using Objective = std::function<std::optional<double>(const Eigen::VectorXd&)>;
using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&, double cost)>;

struct FdOptions {
  double rel_step = 1e-6;
  int max_halvings = 4;
};

/// Forward differences g_i = (J(x + d e_i) - J(x)) / d with d = rel max(1, |x_i|);
/// the step flips sign when x + d e_i would leave the box. A failed probe is
/// retried with a halved step.
inline Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x, double fx, const Box1& box,
                                   const FdOptions& opt = {}) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double d = opt.rel_step * std::max(1.0, std::abs(x(i)));
    bool done = false;
    for (int attempt = 0; attempt <= opt.max_halvings && !done; ++attempt, d *= 0.5) {
      double step = d;
      if (x(i) + step > box.hi(i)) step = -d;
      if (x(i) + step < box.lo(i)) throw ContractViolation("box too narrow for a finite-difference probe");
      Eigen::VectorXd xp = x;
      xp(i) += step;
      if (const auto fp = f(xp)) {
        g(i) = (*fp - fx) / step;
        done = true;
      }
    }
    if (!done) throw IntegrationError("finite-difference probe failed for component " + std::to_string(i), 0.0);
  }
  return g;
}

struct MisfitRecord {
  int iteration = 0;
  double cost = 0;
  double grad_inf = 0;  // max-norm of the projected gradient
  double step = 0;
  Eigen::VectorXd theta;
};

struct MinimizeOptions {
  int max_iterations = 30;
  double grad_tol = 1e-12;
  double cost_tol = 0.0;
  double c1 = 1e-4;
  int max_backtracks = 30;
};

struct MinimizeResult {
  Eigen::VectorXd theta;
  double cost = 0;
  std::vector<MisfitRecord> history;
  std::string reason;
  int evaluations = 0;
};

/// Projected BFGS: inverse-Hessian update on the free variables, projection
/// onto the box, Armijo backtracking by halving. Accepted iterates never
/// increase the cost and every evaluated point lies in the box.
inline MinimizeResult minimize(const Objective& f, const Gradient& grad, const Eigen::VectorXd& x0, const Box1& box,
                               const MinimizeOptions& opt = {},
                               const std::function<void(const MisfitRecord&)>& on_iter = {}) {
  MinimizeResult res;
  const Eigen::Index n = x0.size();
  Eigen::VectorXd x = box.project(x0);
  auto eval = [&](const Eigen::VectorXd& z) {
    ++res.evaluations;
    return f(z);
  };
  const auto f0 = eval(x);
  if (!f0) throw IntegrationError("forward solve failed at the initial guess", 0.0);
  double fx = *f0;
  Eigen::VectorXd g = grad(x, fx);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  auto projected_gradient = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& gz) {
    return Eigen::VectorXd(z - box.project(z - gz));
  };
  auto push = [&](int it, double step) {
    MisfitRecord r{it, fx, projected_gradient(x, g).cwiseAbs().maxCoeff(), step, x};
    res.history.push_back(r);
    if (on_iter) on_iter(r);
  };
  push(0, 0.0);
  res.reason = "max_iterations";
  for (int it = 1; it <= opt.max_iterations; ++it) {
    if (res.history.back().grad_inf <= opt.grad_tol) {
      res.reason = "gradient_tolerance";
      break;
    }
    if (fx <= opt.cost_tol) {
      res.reason = "cost_tolerance";
      break;
    }
    // free variables: not pinned at a bound by the gradient sign
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lo = x(i) <= box.lo(i) && g(i) > 0;
      const bool at_hi = x(i) >= box.hi(i) && g(i) < 0;
      if (!at_lo && !at_hi) free.push_back(i);
    }
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (Eigen::Index a : free) {
      double s = 0;
      for (Eigen::Index b : free) s += H(a, b) * g(b);
      d(a) = -s;
    }
    if (!(g.dot(d) < 0)) {
      H.setIdentity();
      scaled = false;
      d.setZero();
      for (Eigen::Index a : free) d(a) = -g(a);
    }
    if (!(g.dot(d) < 0)) {
      res.reason = "no_descent_direction";
      break;
    }
    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd xn;
    double fn = 0;
    for (int bt = 0; bt <= opt.max_backtracks; ++bt, alpha *= 0.5) {
      xn = box.project(x + alpha * d);
      const auto c = eval(xn);
      if (c && *c <= fx + opt.c1 * g.dot(xn - x)) {
        fn = *c;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.reason = "line_search_failed";
      break;
    }
    const Eigen::VectorXd gn = grad(xn, fn);
    const Eigen::VectorXd s = xn - x, y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        H = (sy / y.squaredNorm()) * Eigen::MatrixXd::Identity(n, n);
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    x = xn;
    fx = fn;
    g = gn;
    push(it, alpha);
  }
  if (res.reason == "max_iterations" && res.history.back().grad_inf <= opt.grad_tol) res.reason = "gradient_tolerance";
  res.theta = x;
  res.cost = fx;
  return res;
}

/// A forward problem with fixed time grid and receivers.
struct ForwardProblem {
  std::function<CoupledSolver(const Eigen::VectorXd& theta)> make_solver;
  std::function<Eigen::VectorXd(const CoupledSolver&)> initial_state;
  std::vector<Vec2> receivers;
  double dt = 0;
  int steps = 0;

  Traces run(const Eigen::VectorXd& theta) const {
    const CoupledSolver solver = make_solver(theta);
    std::vector<PointLocation> loc;
    for (const auto& r : receivers) loc.push_back(solver.locate(r));
    Eigen::VectorXd y = initial_state(solver);
    Traces tr(receivers.size(), std::vector<double>(steps + 1));
    auto sample = [&](int k) {
      for (std::size_t r = 0; r < loc.size(); ++r) tr[r][k] = solver.sample_primary(y, loc[r]);
    };
    sample(0);
    Rk4 rk([&solver](const Eigen::VectorXd& a, double t, Eigen::VectorXd& d) { solver.rhs(a, t, d); });
    for (int s = 0; s < steps; ++s) {
      rk.step(y, s * dt, dt);
      sample(s + 1);
    }
    return tr;
  }
};

struct InversionSetup {
  ForwardProblem forward;
  Eigen::VectorXd theta_true;
  Eigen::VectorXd theta0;
  Box1 box;
};

/// Misfit against synthetic data; solver failures map to an empty cost.
inline Objective make_objective(const ForwardProblem& fp, const Traces& data) {
  return [&fp, &data](const Eigen::VectorXd& th) -> std::optional<double> {
    try {
      return trace_misfit(fp.run(th), data, fp.dt);
    } catch (const IntegrationError&) {
      return std::nullopt;
    } catch (const GeometryError&) {
      return std::nullopt;
    } catch (const AssemblyError&) {
      return std::nullopt;
    }
  };
}

/// Fluid at rest with psi = 100 exp(-72((x1 - 2.5)^2 + x2^2)); zero solid fields.
class GaussianPulse final : public detail::ExactImpl<GaussianPulse> {
 public:
  std::string name() const override { return "gaussian_pulse"; }
  FluidMaterial fluid() const override { return {1.0}; }
  SolidMaterial solid() const override { return {1.0, 2.0, 0.2}; }
  std::pair<Vec2, Vec2> interface_point(double s) const override {
    const double th = 2 * std::numbers::pi * s;
    return {Vec2(std::cos(th), std::sin(th)), Vec2(-std::cos(th), -std::sin(th))};
  }
  Vec2 fluid_point(double a, double b) const override { return polar(1.0 + 2.0 * a, b); }
  Vec2 solid_point(double a, double b) const override { return polar(0.5 + 0.5 * a, b); }

  template <class T>
  Potentials<T> fields(T x1, T x2, T t) const {
    using std::exp;
    const T dx = x1 - 2.5;
    return {100.0 * exp(-72.0 * (dx * dx + x2 * x2)) + 0.0 * t, T(0.0), T(0.0)};
  }

 private:
  static Vec2 polar(double r, double s) {
    const double th = 2 * std::numbers::pi * s;
    return r * Vec2(std::cos(th), std::sin(th));
  }
};

struct InterfaceInversionConfig {
  std::vector<double> coefficients{0.002, 0.050, -0.001, 0.008};
  double bound = 0.1;
  double r_inner = 0.5;
  double r_outer = 3.0;
  int nr_solid = 1, nr_fluid = 2, ntheta = 16;
  int q = 4;
  double final_time = 10.0;
  int receivers = 50;
  int threads = 1;
  double cfl_guard = 2.5;
};

/// Fluid annulus outside a solid ring whose outer edge is 1 + sum A_k sin((k+1) theta).
inline InversionSetup make_interface_inversion(const InterfaceInversionConfig& c) {
  if (c.coefficients.empty()) throw ConfigError("interface inversion needs at least one coefficient");
  const Eigen::Index n = static_cast<Eigen::Index>(c.coefficients.size());
  InversionSetup s;
  s.theta_true = Eigen::Map<const Eigen::VectorXd>(c.coefficients.data(), n);
  s.theta0 = Eigen::VectorXd::Zero(n);
  s.box = {Eigen::VectorXd::Constant(n, -c.bound), Eigen::VectorXd::Constant(n, c.bound)};
  if (!s.box.contains(s.theta_true)) throw ConfigError("true coefficients violate the bounds");
  const FluidMaterial fm{1.0};
  const SolidMaterial sm{1.0, 2.0, 0.2};
  const Degrees deg = Degrees::from_q(c.q);
  const int threads = c.threads;
  auto build = [c, fm, sm, deg, threads](const Eigen::VectorXd& th) {
    RadialInterfaceSpec spec;
    spec.coefficients.assign(th.data(), th.data() + th.size());
    spec.r_inner = c.r_inner;
    spec.r_outer = c.r_outer;
    spec.nr_solid = c.nr_solid;
    spec.nr_fluid = c.nr_fluid;
    spec.ntheta = c.ntheta;
    CoupledMesh m = build_radial_interface(spec, fm, sm);
    m.set_conditions([](RegionKind r, const std::string&) {
      return r == RegionKind::fluid ? BoundaryCondition::neumann : BoundaryCondition::free_traction;
    });
    return CoupledSolver(std::move(m), deg, FluxParams::from_mode(FluxMode::upwind), SolverOptions{threads, false});
  };
  s.forward.make_solver = build;
  s.forward.initial_state = [](const CoupledSolver& solver) { return solver.project(GaussianPulse{}, 0.0); };
  for (int k = 0; k < c.receivers; ++k) {
    const double th = 2 * std::numbers::pi * k / c.receivers;
    s.forward.receivers.push_back(c.r_outer * Vec2(std::cos(th), std::sin(th)));
  }
  // time grid fixed from the reference geometry for every forward solve
  const CoupledSolver ref = build(Eigen::VectorXd::Zero(n));
  double dt = select_dt({DtRule::standing_wave, ref.mesh().h, c.q});
  if (c.cfl_guard > 0) dt = std::min(dt, 0.9 * c.cfl_guard / ref.spectral_radius());
  s.forward.steps = step_count(c.final_time, dt);
  s.forward.dt = c.final_time / s.forward.steps;
  return s;
}

struct MaterialInversionConfig {
  int N = 5;
  int q = 4;
  double final_time = 8.0;
  double mu = 2.0, lambda = 4.0;
  std::uint64_t seed = 3;  // draws the true perturbations in [0, 1]
  std::vector<double> perturbations;  // overrides the random draw when non-empty
  PointSource source{};
  int threads = 1;
  double cfl_guard = 2.5;
};

/// Fluid [-1,1]x[0,2] over solid [-1,1]x[-2,0], lambda = 4 + d_i per solid element.
inline InversionSetup make_material_inversion(const MaterialInversionConfig& c) {
  const int ns = c.N * c.N;
  InversionSetup s;
  s.theta_true.resize(ns);
  if (!c.perturbations.empty()) {
    if (static_cast<int>(c.perturbations.size()) != ns) throw ConfigError("need one perturbation per solid element");
    for (int i = 0; i < ns; ++i) s.theta_true(i) = c.perturbations[i];
  } else {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < ns; ++i) s.theta_true(i) = unit(rng);
  }
  s.theta0 = Eigen::VectorXd::Zero(ns);
  s.box = {Eigen::VectorXd::Zero(ns), Eigen::VectorXd::Ones(ns)};
  if (!s.box.contains(s.theta_true)) throw ConfigError("perturbations must lie in [0, 1]");
  const Degrees deg = Degrees::from_q(c.q);
  auto build = [c, deg](const Eigen::VectorXd& th) {
    CoupledMesh m = build_cartesian_coupled(c.N, {-1, 1, 0, 2}, {-1, 1, -2, 0}, FluidMaterial{1.0},
                                            SolidMaterial{1.0, c.lambda, c.mu});
    const auto solid = m.region(RegionKind::solid);
    for (std::size_t i = 0; i < solid.size(); ++i) m.elements[solid[i]].solid.lambda = c.lambda + th(i);
    m.set_conditions([](RegionKind r, const std::string& side) {
      if (side == "left" || side == "right") return BoundaryCondition::dirichlet;
      return r == RegionKind::fluid ? BoundaryCondition::neumann : BoundaryCondition::free_traction;
    });
    CoupledSolver solver(std::move(m), deg, FluxParams::from_mode(FluxMode::upwind), SolverOptions{c.threads});
    solver.set_point_source(c.source, SourceTarget::both_velocity_components);
    return solver;
  };
  s.forward.make_solver = build;
  s.forward.initial_state = [](const CoupledSolver& solver) { return Eigen::VectorXd::Zero(solver.size()); };
  for (int k = 0; k < 9; ++k) s.forward.receivers.push_back(Vec2(-0.8 + 0.2 * k, 2.0));
  const CoupledSolver ref = build(Eigen::VectorXd::Zero(ns));
  TimeStepRule rule;
  rule.rule = DtRule::inversion_material;
  rule.h = ref.mesh().h;
  rule.q = c.q;
  rule.mu = c.mu;
  rule.lambda = c.lambda;
  double dt = select_dt(rule);
  if (c.cfl_guard > 0) dt = std::min(dt, 0.9 * c.cfl_guard / ref.spectral_radius());
  s.forward.steps = step_count(c.final_time, dt);
  s.forward.dt = c.final_time / s.forward.steps;
  return s;
}

struct InversionOutcome {
  MinimizeResult result;
  Traces data;
  double initial_cost = 0;
};

/// Generates synthetic data at theta_true and minimizes the misfit from theta0.
inline InversionOutcome run_inversion(const InversionSetup& s, const MinimizeOptions& opt, const FdOptions& fd = {},
                                      const std::function<void(const MisfitRecord&)>& on_iter = {}) {
  InversionOutcome out;
  out.data = s.forward.run(s.theta_true);
  const Objective f = make_objective(s.forward, out.data);
  const Gradient g = [&f, &s, &fd](const Eigen::VectorXd& x, double fx) { return fd_gradient(f, x, fx, s.box, fd); };
  out.result = minimize(f, g, s.theta0, s.box, opt, on_iter);
  out.initial_cost = out.result.history.front().cost;
  return out;
}

}  // namespace aedg
