#include <cmath>
#include <memory>
#include <numbers>

#include <gtest/gtest.h>

#include "aedg/analytic.hpp"
#include "aedg/solver.hpp"

using namespace aedg;

namespace {

CoupledMesh flat_mesh(int N, const ExactSolution& ex, double perturb = 0.0) {
  CoupledMesh m = build_cartesian_coupled(N, flat_fluid_box(), flat_solid_box(), ex.fluid(), ex.solid());
  if (perturb > 0) m = perturb_interior_nodes(m, perturb, 4);
  m.set_conditions([](RegionKind, const std::string&) { return BoundaryCondition::dirichlet; });
  return m;
}

CoupledMesh mixed_conditions(CoupledMesh m) {
  m.set_conditions([](RegionKind r, const std::string& side) {
    if (side == "left" || side == "right") return BoundaryCondition::dirichlet;
    return r == RegionKind::fluid ? BoundaryCondition::neumann : BoundaryCondition::free_traction;
  });
  return m;
}

// Pointwise fields of a state: fluid (psi, p), solid (u1, u2, v1, v2).
struct PointFields {
  double a = 0, b = 0, c = 0, d = 0;
};

PointFields eval_state(const CoupledSolver& s, const Eigen::VectorXd& y, int e, double xi, double eta) {
  const Degrees& dg = s.degrees();
  const Eigen::Index off = s.offset(e);
  PointFields f;
  if (s.mesh().elements[e].region == RegionKind::fluid) {
    const Eigen::RowVectorXd a = tensor_modes_at(dg.psi, xi, eta), b = tensor_modes_at(dg.p, xi, eta);
    f.a = a.dot(y.segment(off, a.size()));
    f.b = b.dot(y.segment(off + a.size(), b.size()));
  } else {
    const Eigen::RowVectorXd a = tensor_modes_at(dg.u, xi, eta), b = tensor_modes_at(dg.v, xi, eta);
    const Eigen::Index nu = a.size(), nv = b.size();
    f.a = a.dot(y.segment(off, nu));
    f.b = a.dot(y.segment(off + nu, nu));
    f.c = b.dot(y.segment(off + 2 * nu, nv));
    f.d = b.dot(y.segment(off + 2 * nu + nv, nv));
  }
  return f;
}

// max pointwise error of rhs(projection) against the analytic time derivative, per field
std::array<double, 4> rhs_error(const ExactSolution& ex, int N, int q) {
  auto shared = std::shared_ptr<const ExactSolution>(&ex, [](const ExactSolution*) {});
  CoupledSolver s(flat_mesh(N, ex), Degrees::from_q(q), FluxParams::from_mode(FluxMode::upwind));
  s.set_boundary_data(shared);
  const double t = 0.3;
  const Eigen::VectorXd dy = s.rhs(s.project(ex, t), t);
  std::array<double, 4> err{};
  const double pts[] = {-0.7, 0.1, 0.8};
  for (int e = 0; e < static_cast<int>(s.mesh().elements.size()); ++e)
    for (double xi : pts)
      for (double eta : pts) {
        const Vec2 x = s.mesh().elements[e].map->point(xi, eta);
        const PointFields f = eval_state(s, dy, e, xi, eta);
        const FieldSample ref = ex.eval(x, t);
        const Potentials<double> tt = ex.second(x, t, 2, 2);
        if (s.mesh().elements[e].region == RegionKind::fluid) {
          err[0] = std::max(err[0], std::abs(f.a - ref.p));
          err[1] = std::max(err[1], std::abs(f.b - tt.psi));
        } else {
          err[2] = std::max({err[2], std::abs(f.a - ref.v.x()), std::abs(f.b - ref.v.y())});
          err[3] = std::max({err[3], std::abs(f.c - tt.u1), std::abs(f.d - tt.u2)});
        }
      }
  return err;
}

}  // namespace

TEST(Solver, ZeroStateZeroDataGivesZeroRhs) {
  const StandingWave sw;
  const CoupledSolver s(flat_mesh(3, sw), Degrees::from_q(3), FluxParams::from_mode(FluxMode::upwind));
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(s.size());
  EXPECT_EQ(s.rhs(z, 0.5).cwiseAbs().maxCoeff(), 0.0);
  const Energies e = s.energies(z);
  EXPECT_EQ(e.acoustic, 0.0);
  EXPECT_EQ(e.elastic, 0.0);
}

TEST(Solver, HomogeneousRhsIsLinear) {
  const StandingWave sw;
  const CoupledSolver s(flat_mesh(3, sw, 0.1), Degrees::from_q(3), FluxParams::from_mode(FluxMode::upwind));
  const Eigen::VectorXd a = s.random_state(1), b = s.random_state(2);
  const Eigen::VectorXd lhs = s.rhs_homogeneous(1.5 * a - 0.25 * b);
  const Eigen::VectorXd rhs = 1.5 * s.rhs_homogeneous(a) - 0.25 * s.rhs_homogeneous(b);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * rhs.cwiseAbs().maxCoeff());
}

TEST(Solver, EnergiesNonNegative) {
  const StandingWave sw;
  const CoupledSolver s(flat_mesh(2, sw), Degrees::from_q(4), FluxParams::from_mode(FluxMode::upwind));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Energies e = s.energies(s.random_state(seed));
    EXPECT_GT(e.acoustic, 0.0);
    EXPECT_GT(e.elastic, 0.0);
  }
}

TEST(Solver, EnergyRateEqualsFaceSum) {
  const StandingWave sw;
  for (double perturb : {0.0, 0.15})
    for (FluxMode mode : {FluxMode::upwind, FluxMode::energy_conserving, FluxMode::alternating1}) {
      const CoupledSolver s(mixed_conditions(flat_mesh(3, sw, perturb)), Degrees::from_q(3),
                            FluxParams::from_mode(mode));
      const Eigen::VectorXd y = s.random_state(9);
      const double rate = s.energy_inner(y, s.rhs_homogeneous(y));
      const FaceRates fr = s.face_energy_rates(y);
      const double scale = s.energies(y).total();
      EXPECT_NEAR(rate, fr.total(), 1e-11 * scale) << "perturb " << perturb << " mode " << to_string(mode);
      if (mode == FluxMode::energy_conserving) EXPECT_NEAR(rate, 0.0, 1e-11 * scale);
      else EXPECT_LT(rate, 0.0);
      EXPECT_NEAR(fr.interface, s.interface_dissipation_integral(y), 1e-11 * scale);
    }
}

TEST(Solver, RhsMatchesAnalyticTimeDerivative) {
  const StandingWave sw;
  const auto e2 = rhs_error(sw, 2, 4), e4 = rhs_error(sw, 4, 4), e8 = rhs_error(sw, 8, 4);
  // second derivatives of a degree-4 projection lose at most two orders
  for (int f = 0; f < 4; ++f) {
    EXPECT_GT(e2[f] / e4[f], 4.0) << "field " << f;
    EXPECT_GT(e4[f] / e8[f], 4.0) << "field " << f;
  }
}

namespace {

// 40x40 Gauss over each box of the smooth exact fields
Energies analytic_energy(const StandingWave& sw) {
  const QuadRule r = gauss_rule(40);
  Energies out;
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j) {
      const double w = r.weights[i] * r.weights[j];  // Jacobian 1 for a 2x2 box
      const Vec2 xf(1 + r.nodes[i], 1 + r.nodes[j]), xs(1 + r.nodes[i], -1 + r.nodes[j]);
      const FieldSample f = sw.eval(xf, 0.0);
      out.acoustic += 0.5 * w * (sw.grad_psi(xf, 0.0).squaredNorm() + f.p * f.p);
      const FieldSample g = sw.eval(xs, 0.0);
      const Mat2 gu = sw.grad_u(xs, 0.0);
      const Mat2 eps = 0.5 * (gu + gu.transpose());
      const double div = eps.trace();
      out.elastic += 0.5 * w * (div * div + 2 * (eps.array() * eps.array()).sum() + g.v.squaredNorm());
    }
  return out;
}

}  // namespace

TEST(Solver, ProjectedEnergyConvergesToAnalyticIntegral) {
  const StandingWave sw;
  const Energies ref = analytic_energy(sw);
  EXPECT_NEAR(ref.acoustic, 2 * std::numbers::pi * std::numbers::pi, 1e-12);
  auto gap = [&](int N) {
    const CoupledSolver s(flat_mesh(N, sw), Degrees::from_q(4), FluxParams::from_mode(FluxMode::upwind));
    const Energies e = s.energies(s.project(sw, 0.0));
    return std::array<double, 2>{std::abs(e.acoustic - ref.acoustic), std::abs(e.elastic - ref.elastic)};
  };
  const auto a = gap(4), b = gap(8);  // N = 2 is pre-asymptotic
  for (int k = 0; k < 2; ++k) {
    EXPECT_GT(a[k] / b[k], 8.0);
    EXPECT_LT(b[k], 1e-4 * ref.acoustic);
  }
}

TEST(Solver, OperatorSharingOnUniformMesh) {
  const StandingWave sw;
  const CoupledSolver a(flat_mesh(4, sw), Degrees::from_q(3), FluxParams::from_mode(FluxMode::upwind));
  EXPECT_EQ(a.operator_sets(), 2);
  const CoupledSolver b(flat_mesh(4, sw, 0.1), Degrees::from_q(3), FluxParams::from_mode(FluxMode::upwind));
  EXPECT_GT(b.operator_sets(), 2);
  const CoupledSolver c(flat_mesh(4, sw), Degrees::from_q(3), FluxParams::from_mode(FluxMode::upwind),
                        SolverOptions{1, false});
  const Eigen::VectorXd y = a.random_state(3);
  EXPECT_LT((a.rhs_homogeneous(y) - c.rhs_homogeneous(y)).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Solver, ThreadCountDoesNotChangeResult) {
  const StandingWave sw;
  const CoupledSolver a(flat_mesh(4, sw, 0.1), Degrees::from_q(3), FluxParams::from_mode(FluxMode::upwind));
  const CoupledSolver b(flat_mesh(4, sw, 0.1), Degrees::from_q(3), FluxParams::from_mode(FluxMode::upwind),
                        SolverOptions{3});
  const Eigen::VectorXd y = a.random_state(5);
  EXPECT_EQ(a.rhs_homogeneous(y), b.rhs_homogeneous(y));
}

TEST(Solver, LocateAndSample) {
  const StandingWave sw;
  const CoupledSolver s(flat_mesh(2, sw), Degrees::from_q(3), FluxParams::from_mode(FluxMode::upwind));
  // (1, 1) is shared by four fluid elements; the lowest index wins
  const PointLocation corner = s.locate(Vec2(1.0, 1.0));
  for (int e = 0; e < corner.element; ++e) {
    double xi, eta;
    EXPECT_FALSE(inverse_map(*s.mesh().elements[e].map, Vec2(1.0, 1.0), xi, eta));
  }
  EXPECT_THROW(s.locate(Vec2(5.0, 0.5)), ConfigError);

  // receiver at a quadrature point reproduces the quadrature-sampled field
  const Eigen::VectorXd y = s.project(sw, 0.2);
  const QuadRule r = gauss_rule(5);
  const TensorTables tab(3, r);
  for (int e : {0, 3, 5}) {
    const int k = 2 * r.size() + 3;
    const Vec2 x = s.mesh().elements[e].map->point(r.nodes[2], r.nodes[3]);
    const PointLocation loc = s.locate(x);
    ASSERT_EQ(loc.element, e);
    const double quad = tab.vol.row(k).dot(y.segment(s.offset(e), tab.modes()));
    EXPECT_NEAR(s.sample_primary(y, loc), quad, 1e-13);
  }
}

TEST(Solver, PointSourceLoadsPressureMoments) {
  const StandingWave sw;
  CoupledSolver s(mixed_conditions(flat_mesh(5, sw)), Degrees::from_q(3), FluxParams::from_mode(FluxMode::upwind));
  const PointSource src;  // (0.1, 1.8) lies inside a fluid element for N = 5 on [0,2]^2
  s.set_point_source(src, SourceTarget::both_velocity_components);
  const double t = 1.05;
  const Eigen::VectorXd dy = s.rhs(Eigen::VectorXd::Zero(s.size()), t);
  const PointLocation loc = s.locate(src.x);
  const int np = s.block_psi(), nq = s.block_p();
  const Eigen::VectorXd mdp = s.fluid_ops(loc.element).mass_p * dy.segment(s.offset(loc.element) + np, nq);
  const Eigen::VectorXd phi = tensor_modes_at(s.degrees().p, loc.xi, loc.eta).transpose();
  EXPECT_LT((mdp - src.amplitude(t) * phi).cwiseAbs().maxCoeff(), 1e-12);
  // nothing else is driven
  Eigen::VectorXd rest = dy;
  rest.segment(s.offset(loc.element) + np, nq).setZero();
  EXPECT_EQ(rest.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s.rhs(Eigen::VectorXd::Zero(s.size()), src.t0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Solver, PointSourceInSolidDrivesBothComponents) {
  const StandingWave sw;
  CoupledSolver s(mixed_conditions(flat_mesh(5, sw)), Degrees::from_q(3), FluxParams::from_mode(FluxMode::upwind));
  PointSource src;
  src.x = Vec2(0.1, -0.3);
  s.set_point_source(src, SourceTarget::both_velocity_components);
  const Eigen::VectorXd dy = s.rhs(Eigen::VectorXd::Zero(s.size()), 0.9);
  const PointLocation loc = s.locate(src.x);
  const int nu = s.block_u(), nv = s.block_v();
  const Eigen::Index off = s.offset(loc.element) + 2 * nu;
  EXPECT_GT(dy.segment(off, nv).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT((dy.segment(off, nv) - dy.segment(off + nv, nv)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Solver, PointSourceOnEdgeRejected) {
  const StandingWave sw;
  CoupledSolver s(flat_mesh(2, sw), Degrees::from_q(3), FluxParams::from_mode(FluxMode::upwind));
  PointSource src;
  src.x = Vec2(1.0, 1.5);
  EXPECT_THROW(s.set_point_source(src, SourceTarget::pressure), ConfigError);
}

TEST(Solver, SpectralRadiusScalesWithResolution) {
  const StandingWave sw;
  const CoupledSolver a(flat_mesh(2, sw), Degrees::from_q(3), FluxParams::from_mode(FluxMode::upwind));
  const CoupledSolver b(flat_mesh(4, sw), Degrees::from_q(3), FluxParams::from_mode(FluxMode::upwind));
  const double ra = a.spectral_radius(), rb = b.spectral_radius();
  EXPECT_GT(ra, 0.0);
  EXPECT_GT(rb / ra, 1.6);
  EXPECT_LT(rb / ra, 2.4);
}
