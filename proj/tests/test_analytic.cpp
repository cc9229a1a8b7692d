#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "aedg/analytic.hpp"
#include "aedg/bessel.hpp"

using namespace aedg;

namespace {

std::vector<std::shared_ptr<const ExactSolution>> all_solutions() {
  return {std::make_shared<StandingWave>(), std::make_shared<SnellSolution>(),
          std::make_shared<SnellSolution>(snell_contrast_spec()), std::make_shared<ScholteWave>(),
          std::make_shared<AnnulusMode>()};
}

}  // namespace

TEST(Bessel, AgreesWithStandardLibrary) {
  double worst = 0;
  for (int k = 0; k <= 4000; ++k) {
    const double r = 20.0 * k / 4000;
    worst = std::max(worst, std::abs(bessel_j0(r) - std::cyl_bessel_j(0.0, r)));
    worst = std::max(worst, std::abs(bessel_j1(r) - std::cyl_bessel_j(1.0, r)));
  }
  EXPECT_LT(worst, 1e-13);
}

TEST(Bessel, ReferenceRoots) {
  EXPECT_LT(std::abs(bessel_j1(3.83170597020751)), 1e-13);
  EXPECT_LT(std::abs(bessel_j1(7.01558666981561)), 1e-13);
  EXPECT_LT(std::abs(bessel_j0(8.65372791291101)), 1e-13);
}

TEST(Bessel, DualDerivativeMatchesRecurrence) {
  for (double r : {0.3, 1.7, 2.5, 6.0, 11.0}) {
    const D1 x(r, 1.0);
    EXPECT_NEAR(bessel_j0(x).d, -bessel_j1(r), 1e-13);
    EXPECT_NEAR(bessel_j1(x).d, bessel_j0(r) - bessel_j1(r) / r, 1e-13);
  }
}

TEST(StandingWave, PointValue) {
  const StandingWave sw;
  const FieldSample f = sw.eval(Vec2(0, 0), 0.0);
  const double s = std::sin(-std::numbers::pi / 4);
  EXPECT_NEAR(f.psi, std::sqrt(2.0) * s * s * s, 1e-15);
  EXPECT_NEAR(f.psi, -0.5, 1e-15);
}

TEST(StandingWave, DerivativesMatchFiniteDifferences) {
  const StandingWave sw;
  const Vec2 x(0.37, 1.21);
  const double t = 0.4, h = 1e-6;
  const Vec2 g = sw.grad_psi(x, t);
  EXPECT_NEAR(g.x(), (sw.eval(x + Vec2(h, 0), t).psi - sw.eval(x - Vec2(h, 0), t).psi) / (2 * h), 1e-8);
  EXPECT_NEAR(g.y(), (sw.eval(x + Vec2(0, h), t).psi - sw.eval(x - Vec2(0, h), t).psi) / (2 * h), 1e-8);
  EXPECT_NEAR(sw.eval(x, t).p, (sw.eval(x, t + h).psi - sw.eval(x, t - h).psi) / (2 * h), 1e-8);
  const Vec2 xs(0.8, -0.6);
  const Vec2 v = sw.eval(xs, t).v;
  EXPECT_NEAR(v.x(), (sw.eval(xs, t + h).u.x() - sw.eval(xs, t - h).u.x()) / (2 * h), 1e-8);
  const double d2 = sw.second(x, t, 0, 1).psi;
  EXPECT_NEAR(d2, (sw.grad_psi(x + Vec2(0, h), t).x() - sw.grad_psi(x - Vec2(0, h), t).x()) / (2 * h), 1e-7);
}

TEST(StandingWave, ResidualsVanish) {
  const ResidualReport r = StandingWave().audit(100, 3);
  EXPECT_LT(r.fluid_pde, 1e-12);
  EXPECT_LT(r.solid_pde, 1e-12);
  EXPECT_LT(r.interface, 1e-12);
}

TEST(Snell, ReferenceConfigurationPassesAudit) {
  const SnellSolution s;
  const auto& k = s.coefficients();
  EXPECT_TRUE(std::isfinite(k.A_r) && std::isfinite(k.A_p) && std::isfinite(k.A_s));
  EXPECT_NEAR(std::sin(k.alpha_p) / 3.0, std::sin(0.2) / 1.0, 1e-15);
  EXPECT_NEAR(std::sin(k.alpha_s) / 2.0, std::sin(0.2) / 1.0, 1e-15);
  EXPECT_LT(s.audit().max(), 1e-12);
}

TEST(Snell, NormalIncidenceHasNoShearWave) {
  SnellSpec spec;
  spec.alpha_i = 0.0;
  const SnellCoefficients k = snell_coefficients(spec);
  EXPECT_NEAR(k.A_s, 0.0, 1e-15);
  // classical normal-incidence reflection (Z_p - Z) / (Z_p + Z)
  EXPECT_NEAR(k.A_r, (3.0 - 1.0) / (3.0 + 1.0), 1e-14);
  EXPECT_LT(SnellSolution(spec).audit().max(), 1e-12);
}

TEST(Snell, ContrastConfigurationAccepted) {
  const SnellSolution s(snell_contrast_spec());
  EXPECT_NEAR(s.solid().rho, 2.7, 0);
  EXPECT_NEAR(s.solid().mu, 2.7 * 3.04 * 3.04, 1e-12);
  EXPECT_LT(s.audit().max(), 1e-12);
}

TEST(Snell, PostCriticalRejected) {
  SnellSpec spec;
  spec.alpha_i = 0.5;
  EXPECT_THROW(snell_coefficients(spec), ConfigError);
}

TEST(Scholte, InterfaceAndPdeResiduals) {
  const ResidualReport r = ScholteWave().audit(100, 11);
  EXPECT_LT(r.interface, 1e-9);
  EXPECT_LT(r.fluid_pde, 1e-12);
  EXPECT_LT(r.solid_pde, 1e-12);
}

TEST(Scholte, DecayAwayFromInterface) {
  const ScholteWave w;
  const double t = 0.0, x1 = 0.0;  // cos(phase) = 1 at x1 = t = 0
  const double psi0 = w.eval(Vec2(x1, 0.0), t).psi, psi2 = w.eval(Vec2(x1, 2.0), t).psi;
  EXPECT_NEAR(psi2 / psi0, std::exp(-w.k() * w.b1() * 2.0), 1e-13);
  EXPECT_LT(std::abs(psi2), std::abs(psi0));
  // slowest solid envelope exp(-2 k b) is about 4e-6 here
  const double u2 = w.eval(Vec2(x1, -2.0), t).u.norm(), u0 = w.eval(Vec2(x1, 0.0), t).u.norm();
  EXPECT_LT(u2, 1e-3 * u0);
}

TEST(Scholte, TimePeriodic) {
  const ScholteWave w;
  const double period = 1.0;  // omega = 2 pi
  for (const Vec2& x : {Vec2(0.3, 0.4), Vec2(1.1, -0.7)}) {
    const FieldSample a = w.eval(x, 0.37), b = w.eval(x, 0.37 + period);
    EXPECT_NEAR(a.psi, b.psi, 1e-12);
    EXPECT_NEAR(a.p, b.p, 1e-12);
    EXPECT_LT((a.u - b.u).norm(), 1e-12);
    EXPECT_LT((a.v - b.v).norm(), 1e-12);
  }
}

TEST(Annulus, BoundaryRootsAndSolvability) {
  const AnnulusMode a;
  const auto& s = a.spec();
  for (double th : {0.0, 0.7, 2.9}) {
    const Vec2 e(std::cos(th), std::sin(th));
    EXPECT_LT(a.eval(s.r0 * e, 0.3).u.norm(), 1e-13);
    EXPECT_LT(std::abs(a.eval(s.r2 * e, 0.8).psi), 1e-13);
  }
  EXPECT_LT(std::abs(annulus_solvability_residual(s)), 1e-10);
  AnnulusSpec off = s;
  off.r1 = 6.5;
  EXPECT_GT(std::abs(annulus_solvability_residual(off)), 1e-3);
}

TEST(Annulus, AuditPasses) { EXPECT_LT(AnnulusMode().audit().max(), 1e-10); }

TEST(Firewall, EveryExactSolutionPassesAudit) {
  for (const auto& ex : all_solutions()) EXPECT_LT(ex->audit().max(), 1e-9) << ex->name();
}

TEST(PointSource, PulseShape) {
  const PointSource s;
  EXPECT_EQ(s.amplitude(s.t0), 0.0);
  EXPECT_NEAR(s.amplitude(s.t0 + 0.1), -s.amplitude(s.t0 - 0.1), 1e-14);
  // trapezoid rule over a window wide enough for the Gaussian tail
  const int n = 20000;
  const double a = s.t0 - 2.0, b = s.t0 + 2.0, h = (b - a) / n;
  double sum = 0, mass = 0;
  for (int k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    sum += w * h * s.amplitude(a + k * h);
    mass += w * h * std::abs(s.amplitude(a + k * h));
  }
  EXPECT_LT(std::abs(sum), 1e-12 * mass);
  EXPECT_GT(mass, 1.0);
}
