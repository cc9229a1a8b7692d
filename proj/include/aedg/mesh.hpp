#pragma once

// Quadrilateral meshes for coupled fluid/solid domains: generators for the
// benchmark geometries, node perturbation, and typed face connectivity.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aedg/errors.hpp"
#include "aedg/geometry.hpp"

namespace aedg {

enum class RegionKind { fluid, solid };
enum class FaceKind { fluid_interior, solid_interior, fluid_solid_interface, boundary };
enum class BoundaryCondition { dirichlet, neumann, free_traction };

inline const char* to_string(FaceKind k) {
  switch (k) {
    case FaceKind::fluid_interior: return "fluid_interior";
    case FaceKind::solid_interior: return "solid_interior";
    case FaceKind::fluid_solid_interface: return "fluid_solid_interface";
    default: return "boundary";
  }
}

struct FluidMaterial {
  double c = 1.0;
};

struct SolidMaterial {
  double rho = 1.0;
  double lambda = 1.0;
  double mu = 1.0;
  double cp() const { return std::sqrt((lambda + 2 * mu) / rho); }
  double cs() const { return std::sqrt(mu / rho); }
  double impedance() const { return rho * cp(); }
};

inline void validate(const FluidMaterial& m) {
  if (!(m.c > 0)) throw ConfigError("fluid material requires c > 0");
}
inline void validate(const SolidMaterial& m) {
  if (!(m.rho > 0) || !(m.mu > 0) || !(m.lambda + 2 * m.mu > 0))
    throw ConfigError("solid material requires rho > 0, mu > 0, lambda + 2 mu > 0");
}

struct Element {
  RegionKind region = RegionKind::fluid;
  std::shared_ptr<const Mapping> map;
  FluidMaterial fluid;
  SolidMaterial solid;
};

struct FaceRecord {
  FaceKind kind = FaceKind::boundary;
  int owner = -1;
  int owner_face = -1;
  int neighbor = -1;
  int neighbor_face = -1;
  bool reversed = false;  // neighbor face parameter runs opposite to the owner's
  BoundaryCondition condition = BoundaryCondition::dirichlet;
  std::string marker;     // boundary side name: left/right/bottom/top/inner/outer
};

/// Logical node grid of a bilinear block; kept so interior nodes can be moved.
struct NodeBlock {
  RegionKind region = RegionKind::fluid;
  int nx = 0, ny = 0;
  double hx = 0, hy = 0;
  std::vector<Vec2> nodes;  // (nx+1)*(ny+1), index i*(ny+1)+j
  int first_element = 0;    // element (i,j) = first_element + i*ny + j
  Vec2& node(int i, int j) { return nodes[i * (ny + 1) + j]; }
  const Vec2& node(int i, int j) const { return nodes[i * (ny + 1) + j]; }
};

struct CoupledMesh {
  std::vector<Element> elements;
  std::vector<FaceRecord> faces;
  std::vector<NodeBlock> blocks;
  double h = 0.0;

  int count(RegionKind r) const {
    return static_cast<int>(std::count_if(elements.begin(), elements.end(),
                                          [r](const Element& e) { return e.region == r; }));
  }
  int count(FaceKind k) const {
    return static_cast<int>(std::count_if(faces.begin(), faces.end(),
                                          [k](const FaceRecord& f) { return f.kind == k; }));
  }
  std::vector<int> region(RegionKind r) const {
    std::vector<int> ids;
    for (int e = 0; e < static_cast<int>(elements.size()); ++e)
      if (elements[e].region == r) ids.push_back(e);
    return ids;
  }

  /// Assigns boundary conditions per (region, marker).
  void set_conditions(const std::function<BoundaryCondition(RegionKind, const std::string&)>& rule) {
    for (auto& f : faces)
      if (f.kind == FaceKind::boundary) f.condition = rule(elements[f.owner].region, f.marker);
  }
};

struct Box {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
};

/// Rejects maps with J <= 0 anywhere on a sampling grid that includes corners.
inline void check_element_orientation(const Mapping& map) {
  constexpr int m = 7;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const double xi = -1.0 + 2.0 * a / (m - 1), eta = -1.0 + 2.0 * b / (m - 1);
      if (!(map.jacobian(xi, eta).determinant() > 0.0))
        throw GeometryError("inverted or degenerate element");
    }
}

namespace detail {

struct FaceKey {
  std::int64_t x, y;
  auto operator<=>(const FaceKey&) const = default;
};

inline FaceKey face_key(const Vec2& p, double scale) {
  return {static_cast<std::int64_t>(std::llround(p.x() / scale)),
          static_cast<std::int64_t>(std::llround(p.y() / scale))};
}

}  // namespace detail

/// Builds face records by matching face midpoints. The marker callback names
/// boundary faces from their midpoint and outward normal.
inline void connect_faces(CoupledMesh& mesh,
                          const std::function<std::string(const Vec2&, const Vec2&)>& marker) {
  struct Slot {
    int elem, face;
    Vec2 start;
  };
  double extent = 0.0;
  for (const auto& e : mesh.elements) extent = std::max(extent, e.map->point(0, 0).cwiseAbs().maxCoeff());
  const double scale = 1e-8 * std::max(1.0, extent);
  std::map<detail::FaceKey, std::vector<Slot>> table;
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    const auto& map = *mesh.elements[e].map;
    for (int f = 0; f < 4; ++f) {
      const auto [a, b] = face_reference_point(f, 0.0);
      const auto [c, d] = face_reference_point(f, -1.0);
      table[detail::face_key(map.point(a, b), scale)].push_back({e, f, map.point(c, d)});
    }
  }
  mesh.faces.clear();
  for (auto& [key, slots] : table) {
    if (slots.size() > 2) throw GeometryError("more than two elements share a face");
    FaceRecord rec;
    if (slots.size() == 1) {
      const auto& s = slots[0];
      const auto& map = *mesh.elements[s.elem].map;
      const auto [a, b] = face_reference_point(s.face, 0.0);
      const Mat2 metric = inverse_metric(map.jacobian(a, b));
      Vec2 nrm = (s.face < 2) ? Vec2(metric.row(0).transpose()) : Vec2(metric.row(1).transpose());
      if (s.face == 0 || s.face == 2) nrm = -nrm;
      rec.kind = FaceKind::boundary;
      rec.owner = s.elem;
      rec.owner_face = s.face;
      rec.marker = marker(map.point(a, b), nrm.normalized());
    } else {
      Slot o = slots[0], n = slots[1];
      const RegionKind ro = mesh.elements[o.elem].region, rn = mesh.elements[n.elem].region;
      if (ro != rn) {
        if (ro == RegionKind::solid) std::swap(o, n);
        rec.kind = FaceKind::fluid_solid_interface;
      } else {
        if (n.elem < o.elem) std::swap(o, n);
        rec.kind = ro == RegionKind::fluid ? FaceKind::fluid_interior : FaceKind::solid_interior;
      }
      rec.owner = o.elem;
      rec.owner_face = o.face;
      rec.neighbor = n.elem;
      rec.neighbor_face = n.face;
      rec.reversed = (o.start - n.start).norm() > 1e-8 * std::max(1.0, extent);
    }
    mesh.faces.push_back(rec);
  }
  std::sort(mesh.faces.begin(), mesh.faces.end(), [](const FaceRecord& a, const FaceRecord& b) {
    return std::tie(a.owner, a.owner_face) < std::tie(b.owner, b.owner_face);
  });
}

namespace detail {

inline void rebuild_block_elements(CoupledMesh& mesh, const NodeBlock& blk) {
  for (int i = 0; i < blk.nx; ++i)
    for (int j = 0; j < blk.ny; ++j) {
      auto map = std::make_shared<BilinearMap>(std::array<Vec2, 4>{
          blk.node(i, j), blk.node(i + 1, j), blk.node(i, j + 1), blk.node(i + 1, j + 1)});
      check_element_orientation(*map);
      mesh.elements[blk.first_element + i * blk.ny + j].map = std::move(map);
    }
}

inline void add_block(CoupledMesh& mesh, RegionKind region, const Box& box, int nx, int ny,
                      const FluidMaterial& fm, const SolidMaterial& sm) {
  NodeBlock blk;
  blk.region = region;
  blk.nx = nx;
  blk.ny = ny;
  blk.hx = (box.x1 - box.x0) / nx;
  blk.hy = (box.y1 - box.y0) / ny;
  blk.nodes.resize((nx + 1) * (ny + 1));
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j)
      blk.node(i, j) = Vec2(i == nx ? box.x1 : box.x0 + i * blk.hx, j == ny ? box.y1 : box.y0 + j * blk.hy);
  blk.first_element = static_cast<int>(mesh.elements.size());
  Element proto;
  proto.region = region;
  proto.fluid = fm;
  proto.solid = sm;
  mesh.elements.resize(mesh.elements.size() + nx * ny, proto);
  rebuild_block_elements(mesh, blk);
  mesh.blocks.push_back(std::move(blk));
}

inline std::function<std::string(const Vec2&, const Vec2&)> box_side_marker() {
  return [](const Vec2&, const Vec2& n) -> std::string {
    if (std::abs(n.x()) >= std::abs(n.y())) return n.x() < 0 ? "left" : "right";
    return n.y() < 0 ? "bottom" : "top";
  };
}

inline bool nearly(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a) + std::abs(b)); }

}  // namespace detail

/// Two abutting boxes, N x N elements each; the shared edge is the interface.
inline CoupledMesh build_cartesian_coupled(int N, const Box& fluid, const Box& solid,
                                           FluidMaterial fm = {}, SolidMaterial sm = {}) {
  if (N < 1) throw GeometryError("N must be >= 1");
  validate(fm);
  validate(sm);
  using detail::nearly;
  const bool same_x = nearly(fluid.x0, solid.x0) && nearly(fluid.x1, solid.x1);
  const bool same_y = nearly(fluid.y0, solid.y0) && nearly(fluid.y1, solid.y1);
  const bool vertical = same_x && (nearly(fluid.y0, solid.y1) || nearly(fluid.y1, solid.y0));
  const bool horizontal = same_y && (nearly(fluid.x0, solid.x1) || nearly(fluid.x1, solid.x0));
  if (!(vertical || horizontal)) throw GeometryError("fluid and solid boxes do not share exactly one edge");
  CoupledMesh mesh;
  detail::add_block(mesh, RegionKind::fluid, fluid, N, N, fm, sm);
  detail::add_block(mesh, RegionKind::solid, solid, N, N, fm, sm);
  mesh.h = (fluid.x1 - fluid.x0) / N;
  connect_faces(mesh, detail::box_side_marker());
  return mesh;
}

/// Moves every node not on a block boundary by an independent uniform offset
/// in [-fraction h, fraction h] per coordinate. Deterministic in the seed.
inline CoupledMesh perturb_interior_nodes(const CoupledMesh& mesh, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 0.5)) throw GeometryError("perturbation fraction must lie in [0, 0.5)");
  if (mesh.blocks.empty()) throw GeometryError("mesh has no node blocks to perturb");
  CoupledMesh out = mesh;
  if (fraction == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (auto& blk : out.blocks) {
    for (int i = 1; i < blk.nx; ++i)
      for (int j = 1; j < blk.ny; ++j) {
        const double dx = unit(rng), dy = unit(rng);
        blk.node(i, j) += Vec2(fraction * blk.hx * dx, fraction * blk.hy * dy);
      }
    detail::rebuild_block_elements(out, blk);
  }
  return out;
}

struct AnnulusMeshSpec {
  double r0 = 0, r1 = 0, r2 = 0;
  int nr_solid = 1, nr_fluid = 1, ntheta = 8;
};

namespace detail {

inline void add_polar_layer(CoupledMesh& mesh, RegionKind region, const RadialCurve& inner,
                            const RadialCurve& outer, int nr, int ntheta, const FluidMaterial& fm,
                            const SolidMaterial& sm) {
  Element proto;
  proto.region = region;
  proto.fluid = fm;
  proto.solid = sm;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < ntheta; ++j) {
      proto.map = std::make_shared<PolarBlendMap>(inner, outer, double(i) / nr, double(i + 1) / nr,
                                                  two_pi * j / ntheta, two_pi * (j + 1) / ntheta);
      check_element_orientation(*proto.map);
      mesh.elements.push_back(proto);
    }
}

inline std::function<std::string(const Vec2&, const Vec2&)> radial_marker() {
  return [](const Vec2& x, const Vec2& n) -> std::string { return n.dot(x) < 0 ? "inner" : "outer"; };
}

}  // namespace detail

/// Solid annulus r0..r1 inside a fluid annulus r1..r2, exact polar mappings.
inline CoupledMesh build_annulus_coupled(const AnnulusMeshSpec& spec, FluidMaterial fm = {},
                                         SolidMaterial sm = {}) {
  if (!(0 < spec.r0 && spec.r0 < spec.r1 && spec.r1 < spec.r2)) throw GeometryError("annulus radii out of order");
  if (spec.nr_solid < 1 || spec.nr_fluid < 1 || spec.ntheta < 3) throw GeometryError("annulus element counts too small");
  validate(fm);
  validate(sm);
  CoupledMesh mesh;
  detail::add_polar_layer(mesh, RegionKind::fluid, RadialCurve{spec.r1, {}}, RadialCurve{spec.r2, {}},
                          spec.nr_fluid, spec.ntheta, fm, sm);
  detail::add_polar_layer(mesh, RegionKind::solid, RadialCurve{spec.r0, {}}, RadialCurve{spec.r1, {}},
                          spec.nr_solid, spec.ntheta, fm, sm);
  mesh.h = std::min((spec.r1 - spec.r0) / spec.nr_solid, (spec.r2 - spec.r1) / spec.nr_fluid);
  connect_faces(mesh, detail::radial_marker());
  return mesh;
}

/// Fluid box above solid box (sharing a horizontal edge) with the interface
/// x2 = y_i + amplitude sin(n pi x1); elements blend linearly to the flat outer sides.
inline CoupledMesh build_sinusoidal_interface(int n_wave, double amplitude, const Box& fluid, const Box& solid,
                                              int N, FluidMaterial fm = {}, SolidMaterial sm = {}) {
  if (N < 1) throw GeometryError("N must be >= 1");
  using detail::nearly;
  if (!(nearly(fluid.x0, solid.x0) && nearly(fluid.x1, solid.x1) && nearly(fluid.y0, solid.y1)))
    throw GeometryError("sinusoidal interface requires the fluid box directly above the solid box");
  validate(fm);
  validate(sm);
  const GraphCurve iface{fluid.y0, amplitude, n_wave};
  const GraphCurve top{fluid.y1, 0.0, 0};
  const GraphCurve bottom{solid.y0, 0.0, 0};
  CoupledMesh mesh;
  auto add = [&](RegionKind region, const GraphCurve& lo, const GraphCurve& up) {
    Element proto;
    proto.region = region;
    proto.fluid = fm;
    proto.solid = sm;
    const double hx = (fluid.x1 - fluid.x0) / N;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        const double xa = fluid.x0 + i * hx, xb = (i + 1 == N) ? fluid.x1 : fluid.x0 + (i + 1) * hx;
        proto.map = std::make_shared<GraphBlendMap>(lo, up, xa, xb, double(j) / N, double(j + 1) / N);
        check_element_orientation(*proto.map);
        mesh.elements.push_back(proto);
      }
  };
  add(RegionKind::fluid, iface, top);
  add(RegionKind::solid, bottom, iface);
  mesh.h = (fluid.x1 - fluid.x0) / N;
  connect_faces(mesh, detail::box_side_marker());
  return mesh;
}

struct RadialInterfaceSpec {
  std::vector<double> coefficients;  // A_1..A_K multiplying sin((k+1) theta)
  double r_inner = 0.5;              // solid inner boundary
  double r_interface = 1.0;
  double r_outer = 3.0;              // fluid outer boundary
  int nr_solid = 1, nr_fluid = 2, ntheta = 16;
};

/// Solid annulus inside the perturbed circle r = r_interface + dr(theta), fluid outside.
inline CoupledMesh build_radial_interface(const RadialInterfaceSpec& spec, FluidMaterial fm = {},
                                          SolidMaterial sm = {}) {
  const RadialCurve iface{spec.r_interface, spec.coefficients};
  constexpr int samples = 4096;
  for (int k = 0; k < samples; ++k) {
    const double th = 2.0 * std::numbers::pi * k / samples;
    const double r = iface.value(th);
    if (!(r > spec.r_inner && r < spec.r_outer) || !(r > 0))
      throw GeometryError("interface curve leaves the annulus (self-intersecting geometry)");
  }
  if (spec.nr_solid < 1 || spec.nr_fluid < 1 || spec.ntheta < 3) throw GeometryError("element counts too small");
  validate(fm);
  validate(sm);
  CoupledMesh mesh;
  detail::add_polar_layer(mesh, RegionKind::fluid, iface, RadialCurve{spec.r_outer, {}}, spec.nr_fluid,
                          spec.ntheta, fm, sm);
  detail::add_polar_layer(mesh, RegionKind::solid, RadialCurve{spec.r_inner, {}}, iface, spec.nr_solid,
                          spec.ntheta, fm, sm);
  mesh.h = std::min((spec.r_interface - spec.r_inner) / spec.nr_solid,
                    (spec.r_outer - spec.r_interface) / spec.nr_fluid);
  connect_faces(mesh, detail::radial_marker());
  return mesh;
}

/// Structured text summary used as a golden record in tests and run metadata.
inline std::string mesh_summary(const CoupledMesh& mesh) {
  std::ostringstream os;
  os.precision(17);
  os << "elements " << mesh.elements.size() << "\n";
  os << "fluid_elements " << mesh.count(RegionKind::fluid) << "\n";
  os << "solid_elements " << mesh.count(RegionKind::solid) << "\n";
  os << "h " << mesh.h << "\n";
  for (auto k : {FaceKind::fluid_interior, FaceKind::solid_interior, FaceKind::fluid_solid_interface,
                 FaceKind::boundary})
    os << "faces." << to_string(k) << " " << mesh.count(k) << "\n";
  return os.str();
}

}  // namespace aedg
