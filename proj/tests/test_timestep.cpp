#include <cmath>

#include <gtest/gtest.h>

#include "aedg/timestep.hpp"

using namespace aedg;

TEST(DtRule, StandingWave) {
  EXPECT_DOUBLE_EQ(select_dt({DtRule::standing_wave, 0.25, 4}), 0.0078125);
}

TEST(DtRule, Contrast) {
  TimeStepRule r;
  r.rule = DtRule::contrast;
  r.h = 0.1;
  r.q = 3;
  r.c_max = 6.42;
  r.rho_scale = 2.7;
  EXPECT_NEAR(select_dt(r), 1.4 * 0.1 / (6.42 * 4.5 * 4.5 * 2.7), 1e-18);
  EXPECT_NEAR(select_dt(r), 3.98845e-4, 1e-9);
}

TEST(DtRule, InversionMaterial) {
  TimeStepRule r;
  r.rule = DtRule::inversion_material;
  r.h = 0.4;
  r.q = 8;
  r.mu = 2;
  r.lambda = 4;
  EXPECT_NEAR(select_dt(r), 0.4 * 0.15 / (std::sqrt(8.0) * 9.5), 1e-18);
}

TEST(DtRule, ManualAndErrors) {
  TimeStepRule r;
  r.rule = DtRule::manual;
  r.manual_dt = 0.01;
  EXPECT_EQ(select_dt(r), 0.01);
  r.manual_dt = 0;
  EXPECT_THROW(select_dt(r), ConfigError);
  EXPECT_THROW(select_dt({DtRule::standing_wave, -1.0, 3}), ConfigError);
  EXPECT_EQ(parse_dt_rule("contrast"), DtRule::contrast);
  EXPECT_THROW(parse_dt_rule("cfl"), ConfigError);
}

TEST(Rk4, ZeroRhsLeavesStateUnchanged) {
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(5, -1, 1);
  const Eigen::VectorXd y0 = y;
  Rk4 rk([](const Eigen::VectorXd& a, double, Eigen::VectorXd& d) { d = Eigen::VectorXd::Zero(a.size()); });
  for (int k = 0; k < 10; ++k) rk.step(y, 0.1 * k, 0.1);
  EXPECT_EQ(y, y0);
}

TEST(Rk4, LinearScalarMatchesTaylorPolynomial) {
  const double lam = -1.0, dt = 0.1;
  Eigen::VectorXd y(1);
  y << 1.0;
  const Eigen::VectorXd out =
      rk4_step(y, 0.0, dt, [lam](const Eigen::VectorXd& a, double, Eigen::VectorXd& d) { d = lam * a; });
  const double z = lam * dt;
  EXPECT_NEAR(out(0), 1 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24, 1e-15);
}

TEST(Rk4, FourthOrderOnNonAutonomousProblem) {
  // y' = cos(t) y, y(0) = 1, exact exp(sin t)
  auto run = [](int n) {
    Eigen::VectorXd y(1);
    y << 1.0;
    Rk4 rk([](const Eigen::VectorXd& a, double t, Eigen::VectorXd& d) { d = std::cos(t) * a; });
    const double dt = 2.0 / n;
    for (int k = 0; k < n; ++k) rk.step(y, k * dt, dt);
    return std::abs(y(0) - std::exp(std::sin(2.0)));
  };
  const double ratio = run(20) / run(40);
  EXPECT_GT(ratio, 14.0);
  EXPECT_LT(ratio, 18.0);
}

TEST(Rk4, NonFiniteStateRaises) {
  Eigen::VectorXd y(1);
  y << 1.0;
  Rk4 rk([](const Eigen::VectorXd& a, double, Eigen::VectorXd& d) { d = a * 1e308; });
  EXPECT_THROW(rk.step(y, 0.0, 1e10), IntegrationError);
}

TEST(StepCount, LandsOnFinalTime) {
  EXPECT_EQ(step_count(1.0, 0.1), 10);
  EXPECT_EQ(step_count(1.0, 0.3), 4);
  EXPECT_EQ(step_count(2.0 * std::sqrt(2.0), 0.0078125), 363);
  EXPECT_THROW(step_count(0.0, 0.1), ConfigError);
}
