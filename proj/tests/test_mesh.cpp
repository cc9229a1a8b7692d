#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "aedg/analytic.hpp"
#include "aedg/mesh.hpp"

using namespace aedg;

namespace {

constexpr double kR0 = 3.83170597020751, kR1 = 7.01558666981561, kR2 = 8.65372791291101;

double interface_length(const CoupledMesh& m, int npts = 8) {
  const QuadRule rule = gauss_rule(npts);
  double len = 0;
  for (const auto& f : m.faces) {
    if (f.kind != FaceKind::fluid_solid_interface) continue;
    const ElementGeometry g = sample_geometry(*m.elements[f.owner].map, rule);
    for (int k = 0; k < npts; ++k) len += g.face_w[f.owner_face * npts + k];
  }
  return len;
}

void check_geometry(const CoupledMesh& m) {
  const QuadRule rule = gauss_rule(5);
  for (const auto& el : m.elements) {
    const ElementGeometry g = sample_geometry(*el.map, rule);
    for (double d : g.vol_det) ASSERT_GT(d, 0.0);
    for (std::size_t i = 0; i < g.face_normal.size(); ++i) {
      const Vec2 n = g.face_normal[i], t = g.face_tangent[i];
      EXPECT_NEAR(n.squaredNorm(), 1.0, 1e-13);
      EXPECT_NEAR(t.squaredNorm(), 1.0, 1e-13);
      EXPECT_NEAR(n.dot(t), 0.0, 1e-13);
    }
  }
}

}  // namespace

TEST(CartesianMesh, CountsForTwoAndFour) {
  const CoupledMesh m2 = build_cartesian_coupled(2, flat_fluid_box(), flat_solid_box());
  EXPECT_EQ(m2.elements.size(), 8u);
  EXPECT_EQ(m2.count(FaceKind::fluid_solid_interface), 2);
  EXPECT_DOUBLE_EQ(m2.h, 1.0);
  const CoupledMesh m4 = build_cartesian_coupled(4, flat_fluid_box(), flat_solid_box());
  EXPECT_EQ(m4.elements.size(), 32u);
  EXPECT_EQ(m4.count(FaceKind::fluid_solid_interface), 4);
  EXPECT_EQ(m4.count(RegionKind::fluid), 16);
  // 2 * (N (N-1)) interior edges per direction and region
  EXPECT_EQ(m4.count(FaceKind::fluid_interior), 24);
  EXPECT_EQ(m4.count(FaceKind::solid_interior), 24);
  EXPECT_EQ(m4.count(FaceKind::boundary), 24);
}

TEST(CartesianMesh, InterfaceLengthIsTwo) {
  for (int N : {1, 3, 7}) {
    const CoupledMesh m = build_cartesian_coupled(N, flat_fluid_box(), flat_solid_box());
    EXPECT_NEAR(interface_length(m), 2.0, 1e-13);
  }
}

TEST(CartesianMesh, InterfaceOwnedByFluidWithFluidOutwardNormal) {
  const CoupledMesh m = build_cartesian_coupled(3, flat_fluid_box(), flat_solid_box());
  const QuadRule rule = gauss_rule(3);
  for (const auto& f : m.faces) {
    if (f.kind != FaceKind::fluid_solid_interface) continue;
    EXPECT_EQ(m.elements[f.owner].region, RegionKind::fluid);
    EXPECT_EQ(m.elements[f.neighbor].region, RegionKind::solid);
    const ElementGeometry g = sample_geometry(*m.elements[f.owner].map, rule);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(g.face_normal[f.owner_face * 3 + k].x(), 0.0, 1e-15);
      EXPECT_NEAR(g.face_normal[f.owner_face * 3 + k].y(), -1.0, 1e-15);
    }
  }
}

TEST(CartesianMesh, EachInteriorFaceOnce) {
  const CoupledMesh m = build_cartesian_coupled(4, flat_fluid_box(), flat_solid_box());
  std::map<std::pair<int, int>, int> uses;
  for (const auto& f : m.faces) {
    ++uses[{f.owner, f.owner_face}];
    if (f.neighbor >= 0) ++uses[{f.neighbor, f.neighbor_face}];
  }
  // every element face used exactly once across all records
  EXPECT_EQ(uses.size(), 4 * m.elements.size());
  for (const auto& [k, n] : uses) EXPECT_EQ(n, 1);
}

TEST(CartesianMesh, BoundaryMarkers) {
  const CoupledMesh m = build_cartesian_coupled(2, flat_fluid_box(), flat_solid_box());
  std::map<std::string, int> count;
  for (const auto& f : m.faces)
    if (f.kind == FaceKind::boundary) ++count[f.marker];
  EXPECT_EQ(count["left"], 4);
  EXPECT_EQ(count["right"], 4);
  EXPECT_EQ(count["top"], 2);
  EXPECT_EQ(count["bottom"], 2);
}

TEST(CartesianMesh, MetricIsInverseJacobian) {
  const BilinearMap map({Vec2(0, 0), Vec2(2, 0.3), Vec2(-0.2, 1.5), Vec2(2.4, 2.0)});
  const QuadRule rule = gauss_rule(4);
  const ElementGeometry g = sample_geometry(map, rule);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const Mat2 jac = map.jacobian(rule.nodes[a], rule.nodes[b]);
      EXPECT_LT((g.vol_metric[a * 4 + b] - Mat2(jac.inverse())).cwiseAbs().maxCoeff(), 1e-12);
    }
  check_geometry(build_cartesian_coupled(3, flat_fluid_box(), flat_solid_box()));
}

TEST(PerturbedMesh, ZeroFractionUnchanged) {
  const CoupledMesh m = build_cartesian_coupled(4, flat_fluid_box(), flat_solid_box());
  const CoupledMesh p = perturb_interior_nodes(m, 0.0, 5);
  for (std::size_t b = 0; b < m.blocks.size(); ++b) EXPECT_EQ(m.blocks[b].nodes, p.blocks[b].nodes);
}

TEST(PerturbedMesh, DeterministicAndBounded) {
  const CoupledMesh m = build_cartesian_coupled(6, flat_fluid_box(), flat_solid_box());
  const CoupledMesh a = perturb_interior_nodes(m, 0.05, 9), b = perturb_interior_nodes(m, 0.05, 9);
  const CoupledMesh c = perturb_interior_nodes(m, 0.05, 10);
  bool differs = false;
  for (std::size_t k = 0; k < m.blocks.size(); ++k) {
    EXPECT_EQ(a.blocks[k].nodes, b.blocks[k].nodes);
    differs = differs || a.blocks[k].nodes != c.blocks[k].nodes;
    for (std::size_t i = 0; i < m.blocks[k].nodes.size(); ++i) {
      const Vec2 d = a.blocks[k].nodes[i] - m.blocks[k].nodes[i];
      EXPECT_LE(std::abs(d.x()), 0.05 * m.blocks[k].hx + 1e-15);
      EXPECT_LE(std::abs(d.y()), 0.05 * m.blocks[k].hy + 1e-15);
    }
  }
  EXPECT_TRUE(differs);
  EXPECT_NEAR(interface_length(a), 2.0, 1e-13);
  check_geometry(a);
  EXPECT_EQ(mesh_summary(a), mesh_summary(m));
}

TEST(AnnulusMesh, ReferenceRadiiAccepted) {
  const CoupledMesh m = build_annulus_coupled({kR0, kR1, kR2, 2, 2, 16});
  EXPECT_EQ(m.elements.size(), 64u);
  EXPECT_EQ(m.count(FaceKind::fluid_solid_interface), 16);
  check_geometry(m);
}

TEST(AnnulusMesh, InterfaceCircumference) {
  const CoupledMesh m = build_annulus_coupled({kR0, kR1, kR2, 1, 1, 24});
  EXPECT_NEAR(interface_length(m, 12), 2 * std::numbers::pi * kR1, 1e-10);
}

TEST(AnnulusMesh, InterfaceNormalPointsInward) {
  const CoupledMesh m = build_annulus_coupled({kR0, kR1, kR2, 1, 1, 12});
  const QuadRule rule = gauss_rule(4);
  for (const auto& f : m.faces) {
    if (f.kind != FaceKind::fluid_solid_interface) continue;
    const ElementGeometry g = sample_geometry(*m.elements[f.owner].map, rule);
    for (int k = 0; k < 4; ++k) {
      const int i = f.owner_face * 4 + k;
      EXPECT_NEAR(g.face_x[i].norm(), kR1, 1e-12);
      EXPECT_NEAR(g.face_normal[i].dot(g.face_x[i].normalized()), -1.0, 1e-12);
    }
  }
}

TEST(AnnulusMesh, RejectsBadRadii) {
  EXPECT_THROW(build_annulus_coupled({2.0, 1.0, 3.0, 1, 1, 8}), GeometryError);
}

TEST(SinusoidalMesh, FlatLimitMatchesCartesian) {
  const CoupledMesh a = build_sinusoidal_interface(10, 0.0, flat_fluid_box(), flat_solid_box(), 4);
  const CoupledMesh b = build_cartesian_coupled(4, flat_fluid_box(), flat_solid_box());
  ASSERT_EQ(a.elements.size(), b.elements.size());
  EXPECT_EQ(mesh_summary(a), mesh_summary(b));
  // same element set, possibly in a different order
  std::multiset<std::pair<double, double>> ca, cb;
  for (const auto& e : a.elements) ca.insert({e.map->point(0, 0).x(), e.map->point(0, 0).y()});
  for (const auto& e : b.elements) cb.insert({e.map->point(0, 0).x(), e.map->point(0, 0).y()});
  EXPECT_EQ(ca, cb);
}

TEST(SinusoidalMesh, PositiveJacobianOnFineGridAndLongerInterface) {
  const CoupledMesh m = build_sinusoidal_interface(10, 0.025, {-1, 1, 0, 2}, {-1, 1, -2, 0}, 70);
  const QuadRule rule = gauss_rule(3);
  for (const auto& el : m.elements) {
    const ElementGeometry g = sample_geometry(*el.map, rule);
    for (double d : g.vol_det) ASSERT_GT(d, 0.0);
  }
  const CoupledMesh coarse = build_sinusoidal_interface(10, 0.025, flat_fluid_box(), flat_solid_box(), 20);
  EXPECT_GT(interface_length(coarse, 10), 2.0 + 1e-4);
}

TEST(RadialInterfaceMesh, CircleWhenCoefficientsVanish) {
  RadialInterfaceSpec spec;
  spec.coefficients.assign(8, 0.0);
  const CoupledMesh m = build_radial_interface(spec);
  EXPECT_NEAR(interface_length(m, 12), 2 * std::numbers::pi, 1e-12);
  const QuadRule rule = gauss_rule(4);
  for (const auto& f : m.faces) {
    if (f.kind != FaceKind::fluid_solid_interface) continue;
    const ElementGeometry g = sample_geometry(*m.elements[f.owner].map, rule);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(g.face_x[f.owner_face * 4 + k].norm(), 1.0, 1e-14);
  }
}

TEST(RadialInterfaceMesh, ReferenceCoefficientsAccepted) {
  RadialInterfaceSpec spec;
  spec.coefficients = {0.002, 0.050, -0.001, 0.008, -0.003, -0.006, -0.010, 0.010};
  const CoupledMesh m = build_radial_interface(spec);
  check_geometry(m);
  EXPECT_EQ(m.count(FaceKind::fluid_solid_interface), spec.ntheta);
  // zero-mean perturbation: trapezoid rule over one period integrates sines exactly
  const RadialCurve c{1.0, spec.coefficients};
  double mean = 0;
  const int n = 64;
  for (int k = 0; k < n; ++k) mean += c.value(2 * std::numbers::pi * k / n) - 1.0;
  EXPECT_NEAR(mean / n, 0.0, 1e-12);
}

TEST(RadialInterfaceMesh, OverlappingInterfaceRejected) {
  RadialInterfaceSpec spec;
  spec.coefficients = {0.6};
  EXPECT_THROW(build_radial_interface(spec), GeometryError);
}
