#pragma once

// Global semi-discrete operator for the coupled fluid/solid system.
//
// One right-hand side evaluation runs three passes: face traces of every
// element are extracted into face-indexed buffers, the flux kernels turn them
// into star states, and each element applies its precomputed operators.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aedg/acoustic.hpp"
#include "aedg/analytic.hpp"
#include "aedg/basis.hpp"
#include "aedg/elastic.hpp"
#include "aedg/errors.hpp"
#include "aedg/fluxes.hpp"
#include "aedg/geometry.hpp"
#include "aedg/mesh.hpp"
#include "aedg/parallel.hpp"

namespace aedg {

struct Degrees {
  int psi = 4, p = 3, u = 4, v = 3;

  /// q_psi = q_u = q and q_p = q_v = q - 1.
  static Degrees from_q(int q) { return {q, q - 1, q, q - 1}; }
  int max() const { return std::max({psi, p, u, v}); }
  void validate() const {
    if (psi < 1 || u < 1 || p < 0 || v < 0) throw ConfigError("degrees require q_psi, q_u >= 1 and q_p, q_v >= 0");
  }
};

struct SolverOptions {
  int threads = 1;
  bool share_operators = true;  // reuse operators of geometrically identical elements
};

struct Energies {
  double acoustic = 0, elastic = 0;
  double total() const { return acoustic + elastic; }
};

/// Face-quadrature energy rates grouped by face kind.
struct FaceRates {
  double fluid_interior = 0, solid_interior = 0, interface = 0, boundary = 0;
  double total() const { return fluid_interior + solid_interior + interface + boundary; }
};

struct FieldErrors {
  double psi = 0, p = 0, u = 0, v = 0;
};

enum class SourceTarget { pressure, both_velocity_components };

struct FluidOps : AcousticElementOps {
  Eigen::MatrixXd stiffness;  // energy matrix for psi
  Eigen::MatrixXd mass_p;
  Eigen::MatrixXd face_p;
};

struct SolidOps : ElasticElementOps {
  Eigen::MatrixXd stiffness;  // energy matrix for u
  Eigen::MatrixXd mass_v;
  int rotation_row = -1;
};

/// Located point: element and reference coordinates.
struct PointLocation {
  int element = -1;
  double xi = 0, eta = 0;
};

class CoupledSolver {
 public:
  CoupledSolver(CoupledMesh mesh, Degrees deg, FluxParams flux, SolverOptions opt = {})
      : mesh_(std::move(mesh)), deg_(deg), flux_(flux), opt_(opt) {
    deg_.validate();
    flux_.validate();
    rule_ = gauss_rule(deg_.max() + 2);
    n_ = rule_.size();
    t_psi_ = TensorTables(deg_.psi, rule_);
    t_p_ = TensorTables(deg_.p, rule_);
    t_u_ = TensorTables(deg_.u, rule_);
    t_v_ = TensorTables(deg_.v, rule_);
    setup();
  }

  const CoupledMesh& mesh() const { return mesh_; }
  const Degrees& degrees() const { return deg_; }
  const FluxParams& flux() const { return flux_; }
  Eigen::Index size() const { return size_; }
  int operator_sets() const { return static_cast<int>(distinct_ops_); }
  Eigen::Index offset(int e) const { return elems_[e].offset; }
  int rotation_row(int e) const { return elems_[e].sops ? elems_[e].sops->rotation_row : -1; }
  const FluidOps& fluid_ops(int e) const { return *elems_.at(e).fops; }
  const SolidOps& solid_ops(int e) const { return *elems_.at(e).sops; }
  int block_psi() const { return t_psi_.modes(); }
  int block_p() const { return t_p_.modes(); }
  int block_u() const { return t_u_.modes(); }
  int block_v() const { return t_v_.modes(); }

  /// Inhomogeneous boundary data are taken from an exact solution; null
  /// means homogeneous data.
  void set_boundary_data(std::shared_ptr<const ExactSolution> exact) { boundary_exact_ = std::move(exact); }

  void set_point_source(const PointSource& src, SourceTarget target) {
    const PointLocation loc = locate(src.x);
    if (!loc_interior(loc)) throw ConfigError("point source lies on an element edge (ambiguous owner)");
    const auto& ed = elems_[loc.element];
    Source s;
    s.pulse = src;
    s.element = loc.element;
    if (ed.region == RegionKind::fluid) {
      const Eigen::VectorXd phi = tensor_modes_at(deg_.p, loc.xi, loc.eta).transpose();
      s.offset = ed.offset + t_psi_.modes();
      s.load = ed.fops->mass_p.llt().solve(phi);
    } else {
      const int nv = t_v_.modes();
      const Eigen::VectorXd phi = tensor_modes_at(deg_.v, loc.xi, loc.eta).transpose();
      Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * nv);
      f.head(nv) = phi;
      if (target == SourceTarget::both_velocity_components) f.tail(nv) = phi;
      s.offset = ed.offset + 2 * t_u_.modes();
      s.load = ed.sops->mass_v.llt().solve(f);
    }
    source_ = s;
  }
  void clear_point_source() { source_.reset(); }

  void rhs(const Eigen::VectorXd& y, double t, Eigen::VectorXd& dy) const { rhs_impl(y, t, dy, false); }
  Eigen::VectorXd rhs(const Eigen::VectorXd& y, double t) const {
    Eigen::VectorXd dy(size_);
    rhs_impl(y, t, dy, false);
    return dy;
  }
  /// Right-hand side with boundary data and sources switched off.
  Eigen::VectorXd rhs_homogeneous(const Eigen::VectorXd& y) const {
    Eigen::VectorXd dy(size_);
    rhs_impl(y, 0.0, dy, true);
    return dy;
  }

  /// Energy bilinear form: a^T E b with E = blockdiag(S, M_p, G, M_v).
  double energy_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    double s = 0;
    for (const auto& ed : elems_) {
      if (ed.region == RegionKind::fluid) {
        const int np = t_psi_.modes(), nq = t_p_.modes();
        s += a.segment(ed.offset, np).dot(ed.fops->stiffness * b.segment(ed.offset, np));
        s += a.segment(ed.offset + np, nq).dot(ed.fops->mass_p * b.segment(ed.offset + np, nq));
      } else {
        const int nu = 2 * t_u_.modes(), nv = 2 * t_v_.modes();
        s += a.segment(ed.offset, nu).dot(ed.sops->stiffness * b.segment(ed.offset, nu));
        s += a.segment(ed.offset + nu, nv).dot(ed.sops->mass_v * b.segment(ed.offset + nu, nv));
      }
    }
    return s;
  }

  Energies energies(const Eigen::VectorXd& y) const {
    Energies en;
    for (const auto& ed : elems_) {
      if (ed.region == RegionKind::fluid) {
        const int np = t_psi_.modes(), nq = t_p_.modes();
        const auto psi = y.segment(ed.offset, np);
        const auto p = y.segment(ed.offset + np, nq);
        en.acoustic += 0.5 * (psi.dot(ed.fops->stiffness * psi) + p.dot(ed.fops->mass_p * p));
      } else {
        const int nu = 2 * t_u_.modes(), nv = 2 * t_v_.modes();
        const auto u = y.segment(ed.offset, nu);
        const auto v = y.segment(ed.offset + nu, nv);
        en.elastic += 0.5 * (u.dot(ed.sops->stiffness * u) + v.dot(ed.sops->mass_v * v));
      }
    }
    return en;
  }

  /// Face-quadrature energy rate of the state, homogeneous data, no sources.
  FaceRates face_energy_rates(const Eigen::VectorXd& y) const {
    extract_traces(y);
    compute_stars(0.0, true);
    FaceRates r;
    const int n = n_;
    for (const auto& fr : mesh_.faces) {
      double sum = 0;
      for (int k = 0; k < n; ++k) {
        const int ko = fr.owner_face * n + k;
        sum += side_rate(fr.owner, ko);
        if (fr.neighbor >= 0) sum += side_rate(fr.neighbor, fr.neighbor_face * n + (fr.reversed ? n - 1 - k : k));
      }
      switch (fr.kind) {
        case FaceKind::fluid_interior: r.fluid_interior += sum; break;
        case FaceKind::solid_interior: r.solid_interior += sum; break;
        case FaceKind::fluid_solid_interface: r.interface += sum; break;
        case FaceKind::boundary: r.boundary += sum; break;
      }
    }
    return r;
  }

  /// Interface dissipation integral alpha (n.sigma.n - p)^2 + beta (grad psi.n - v.n)^2.
  double interface_dissipation_integral(const Eigen::VectorXd& y) const {
    extract_traces(y);
    double sum = 0;
    const int n = n_;
    for (const auto& fr : mesh_.faces) {
      if (fr.kind != FaceKind::fluid_solid_interface) continue;
      for (int k = 0; k < n; ++k) {
        const int ko = fr.owner_face * n + k;
        const int kn = fr.neighbor_face * n + (fr.reversed ? n - 1 - k : k);
        const auto [ft, st] = interface_traces(fr, ko, kn);
        sum += elems_[fr.owner].face_w[ko] * interface_dissipation(ft, st, elems_[fr.owner].face_n[ko], flux_);
      }
    }
    return sum;
  }

  /// L2 projection of an exact solution at time t.
  Eigen::VectorXd project(const ExactSolution& ex, double t) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(size_);
    const FineTables ft = fine_tables();
    parallel_for(static_cast<std::ptrdiff_t>(elems_.size()), opt_.threads, [&](std::ptrdiff_t e) {
      const auto& ed = elems_[e];
      const ElementGeometry g = sample_geometry(*mesh_.elements[e].map, ft.rule);
      const Eigen::VectorXd w = as_vector(g.vol_w);
      const Eigen::Index np = static_cast<Eigen::Index>(g.vol_x.size());
      Eigen::VectorXd f_psi(np), f_p(np), f_u1(np), f_u2(np), f_v1(np), f_v2(np);
      for (Eigen::Index k = 0; k < np; ++k) {
        const FieldSample s = ex.eval(g.vol_x[k], t);
        f_psi(k) = s.psi, f_p(k) = s.p, f_u1(k) = s.u.x(), f_u2(k) = s.u.y(), f_v1(k) = s.v.x(), f_v2(k) = s.v.y();
      }
      auto l2 = [&](const Eigen::MatrixXd& phi, const Eigen::VectorXd& f) -> Eigen::VectorXd {
        const Eigen::MatrixXd m = phi.transpose() * w.asDiagonal() * phi;
        return m.llt().solve(phi.transpose() * w.cwiseProduct(f));
      };
      if (ed.region == RegionKind::fluid) {
        y.segment(ed.offset, t_psi_.modes()) = l2(ft.psi.vol, f_psi);
        y.segment(ed.offset + t_psi_.modes(), t_p_.modes()) = l2(ft.p.vol, f_p);
      } else {
        const int nu = t_u_.modes(), nv = t_v_.modes();
        y.segment(ed.offset, nu) = l2(ft.u.vol, f_u1);
        y.segment(ed.offset + nu, nu) = l2(ft.u.vol, f_u2);
        y.segment(ed.offset + 2 * nu, nv) = l2(ft.v.vol, f_v1);
        y.segment(ed.offset + 2 * nu + nv, nv) = l2(ft.v.vol, f_v2);
      }
    });
    return y;
  }

  /// L2 errors per field with a (q+4)-point rule; u and v combine both components.
  FieldErrors l2_errors(const Eigen::VectorXd& y, const ExactSolution& ex, double t) const {
    const FineTables ft = fine_tables();
    std::vector<FieldErrors> per(elems_.size());
    parallel_for(static_cast<std::ptrdiff_t>(elems_.size()), opt_.threads, [&](std::ptrdiff_t e) {
      const auto& ed = elems_[e];
      const ElementGeometry g = sample_geometry(*mesh_.elements[e].map, ft.rule);
      FieldErrors& fe = per[e];
      if (ed.region == RegionKind::fluid) {
        const Eigen::VectorXd psi = ft.psi.vol * y.segment(ed.offset, t_psi_.modes());
        const Eigen::VectorXd p = ft.p.vol * y.segment(ed.offset + t_psi_.modes(), t_p_.modes());
        for (std::size_t k = 0; k < g.vol_x.size(); ++k) {
          const FieldSample s = ex.eval(g.vol_x[k], t);
          fe.psi += g.vol_w[k] * std::pow(psi(k) - s.psi, 2);
          fe.p += g.vol_w[k] * std::pow(p(k) - s.p, 2);
        }
      } else {
        const int nu = t_u_.modes(), nv = t_v_.modes();
        const Eigen::VectorXd u1 = ft.u.vol * y.segment(ed.offset, nu);
        const Eigen::VectorXd u2 = ft.u.vol * y.segment(ed.offset + nu, nu);
        const Eigen::VectorXd v1 = ft.v.vol * y.segment(ed.offset + 2 * nu, nv);
        const Eigen::VectorXd v2 = ft.v.vol * y.segment(ed.offset + 2 * nu + nv, nv);
        for (std::size_t k = 0; k < g.vol_x.size(); ++k) {
          const FieldSample s = ex.eval(g.vol_x[k], t);
          fe.u += g.vol_w[k] * (std::pow(u1(k) - s.u.x(), 2) + std::pow(u2(k) - s.u.y(), 2));
          fe.v += g.vol_w[k] * (std::pow(v1(k) - s.v.x(), 2) + std::pow(v2(k) - s.v.y(), 2));
        }
      }
    });
    FieldErrors out;
    for (const auto& fe : per) {
      out.psi += fe.psi;
      out.p += fe.p;
      out.u += fe.u;
      out.v += fe.v;
    }
    return {std::sqrt(out.psi), std::sqrt(out.p), std::sqrt(out.u), std::sqrt(out.v)};
  }

  /// Element containing x; on shared edges the lowest element index wins.
  PointLocation locate(const Vec2& x) const {
    for (int e = 0; e < static_cast<int>(mesh_.elements.size()); ++e) {
      double xi = 0, eta = 0;
      if (inverse_map(*mesh_.elements[e].map, x, xi, eta, 1e-10))
        return {e, std::clamp(xi, -1.0, 1.0), std::clamp(eta, -1.0, 1.0)};
    }
    throw ConfigError("point lies outside the mesh");
  }

  /// psi^h (fluid) or u1^h (solid) at a located point.
  double sample_primary(const Eigen::VectorXd& y, const PointLocation& loc) const {
    const auto& ed = elems_.at(loc.element);
    const int q = ed.region == RegionKind::fluid ? deg_.psi : deg_.u;
    const Eigen::RowVectorXd phi = tensor_modes_at(q, loc.xi, loc.eta);
    return phi.dot(y.segment(ed.offset, phi.size()));
  }

  /// Power iteration estimate of the spectral radius of the homogeneous operator.
  double spectral_radius(int iterations = 60, std::uint64_t seed = 11) const {
    Eigen::VectorXd x = random_state(seed);
    x /= x.norm();
    double log_growth = 0.0, last = 0.0;
    const int burn = iterations / 2;
    for (int it = 0; it < iterations; ++it) {
      Eigen::VectorXd z = rhs_homogeneous(x);
      const double nz = z.norm();
      if (!(nz > 0)) return 0.0;
      if (it >= burn) log_growth += std::log(nz);
      last = nz;
      x = z / nz;
    }
    return std::max(last, std::exp(log_growth / (iterations - burn)));
  }

  Eigen::VectorXd random_state(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::VectorXd y(size_);
    for (Eigen::Index i = 0; i < size_; ++i) y(i) = unit(rng);
    return y;
  }

  /// Uniform samples per element: fluid rows x1,x2,psi,p; solid rows x1,x2,u1,u2,v1,v2.
  void write_snapshot(const Eigen::VectorXd& y, std::ostream& fluid, std::ostream& solid, int per_dir = 4) const {
    fluid.precision(12);
    solid.precision(12);
    fluid << "x1,x2,psi,p\n";
    solid << "x1,x2,u1,u2,v1,v2\n";
    for (int e = 0; e < static_cast<int>(elems_.size()); ++e) {
      const auto& ed = elems_[e];
      const auto& map = *mesh_.elements[e].map;
      for (int a = 0; a < per_dir; ++a)
        for (int b = 0; b < per_dir; ++b) {
          const double xi = -1.0 + (2.0 * a + 1) / per_dir, eta = -1.0 + (2.0 * b + 1) / per_dir;
          const Vec2 x = map.point(xi, eta);
          if (ed.region == RegionKind::fluid) {
            const Eigen::RowVectorXd fp = tensor_modes_at(deg_.psi, xi, eta), fq = tensor_modes_at(deg_.p, xi, eta);
            fluid << x.x() << ',' << x.y() << ',' << fp.dot(y.segment(ed.offset, fp.size())) << ','
                  << fq.dot(y.segment(ed.offset + fp.size(), fq.size())) << '\n';
          } else {
            const Eigen::RowVectorXd fu = tensor_modes_at(deg_.u, xi, eta), fv = tensor_modes_at(deg_.v, xi, eta);
            const Eigen::Index nu = fu.size(), nv = fv.size(), o = ed.offset;
            solid << x.x() << ',' << x.y() << ',' << fu.dot(y.segment(o, nu)) << ','
                  << fu.dot(y.segment(o + nu, nu)) << ',' << fv.dot(y.segment(o + 2 * nu, nv)) << ','
                  << fv.dot(y.segment(o + 2 * nu + nv, nv)) << '\n';
          }
        }
    }
  }

 private:
  struct ElementData {
    RegionKind region = RegionKind::fluid;
    Eigen::Index offset = 0;
    std::shared_ptr<const FluidOps> fops;
    std::shared_ptr<const SolidOps> sops;
    std::vector<Vec2> face_x, face_n;
    std::vector<double> face_w;
    double c = 1, z = 1;
  };

  struct Source {
    PointSource pulse;
    int element = -1;
    Eigen::Index offset = 0;
    Eigen::VectorXd load;
  };

  struct FineTables {
    QuadRule rule;
    TensorTables psi, p, u, v;
  };

  FineTables fine_tables() const {
    FineTables ft;
    ft.rule = gauss_rule(deg_.max() + 4);
    ft.psi = TensorTables(deg_.psi, ft.rule);
    ft.p = TensorTables(deg_.p, ft.rule);
    ft.u = TensorTables(deg_.u, ft.rule);
    ft.v = TensorTables(deg_.v, ft.rule);
    return ft;
  }

  static bool loc_interior(const PointLocation& loc) {
    constexpr double tol = 1e-9;
    return std::abs(loc.xi) < 1 - tol && std::abs(loc.eta) < 1 - tol;
  }

  static std::vector<std::int64_t> geometry_key(const ElementGeometry& g, const Element& el) {
    std::vector<std::int64_t> key;
    auto push = [&key](double v) {
      int ex = 0;
      const double m = std::frexp(v, &ex);
      key.push_back(std::llround(m * 68719476736.0));  // 2^36
      key.push_back(v == 0 ? 0 : ex);
    };
    key.push_back(el.region == RegionKind::fluid ? 0 : 1);
    if (el.region == RegionKind::fluid) {
      push(el.fluid.c);
    } else {
      push(el.solid.rho);
      push(el.solid.lambda);
      push(el.solid.mu);
    }
    for (std::size_t k = 0; k < g.vol_metric.size(); ++k) {
      for (int i = 0; i < 4; ++i) push(g.vol_metric[k](i / 2, i % 2));
      push(g.vol_det[k]);
    }
    for (std::size_t k = 0; k < g.face_normal.size(); ++k) {
      push(g.face_normal[k].x());
      push(g.face_normal[k].y());
      push(g.face_w[k]);
      for (int i = 0; i < 4; ++i) push(g.face_metric[k](i / 2, i % 2));
    }
    return key;
  }

  void setup() {
    const int ne = static_cast<int>(mesh_.elements.size());
    elems_.resize(ne);
    std::map<std::vector<std::int64_t>, std::shared_ptr<const FluidOps>> fcache;
    std::map<std::vector<std::int64_t>, std::shared_ptr<const SolidOps>> scache;
    Eigen::Index off = 0;
    distinct_ops_ = 0;
    for (int e = 0; e < ne; ++e) {
      const Element& el = mesh_.elements[e];
      ElementData& ed = elems_[e];
      ed.region = el.region;
      ed.offset = off;
      const ElementGeometry g = sample_geometry(*el.map, rule_);
      ed.face_x = g.face_x;
      ed.face_n = g.face_normal;
      ed.face_w = g.face_w;
      const auto key = opt_.share_operators ? geometry_key(g, el) : std::vector<std::int64_t>{};
      if (el.region == RegionKind::fluid) {
        validate(el.fluid);
        ed.c = el.fluid.c;
        off += t_psi_.modes() + t_p_.modes();
        if (opt_.share_operators) {
          if (auto it = fcache.find(key); it != fcache.end()) {
            ed.fops = it->second;
            continue;
          }
        }
        const AcousticMatrices m = assemble_acoustic(g, t_psi_, t_p_, el.fluid.c);
        auto ops = std::make_shared<FluidOps>();
        static_cast<AcousticElementOps&>(*ops) = factorize_acoustic(m);
        ops->stiffness = m.stiffness;
        ops->mass_p = m.mass_p;
        ops->face_p = t_p_.face;
        ed.fops = ops;
        if (opt_.share_operators) fcache.emplace(key, ops);
      } else {
        validate(el.solid);
        ed.z = el.solid.impedance();
        off += 2 * (t_u_.modes() + t_v_.modes());
        if (opt_.share_operators) {
          if (auto it = scache.find(key); it != scache.end()) {
            ed.sops = it->second;
            continue;
          }
        }
        const ElasticMatrices m = assemble_elastic(g, *el.map, t_u_, t_v_, el.solid);
        auto ops = std::make_shared<SolidOps>();
        static_cast<ElasticElementOps&>(*ops) = factorize_elastic(m);
        ops->stiffness = m.stiffness;
        ops->mass_v = m.mass_v;
        ops->rotation_row = m.rotation_row;
        ed.sops = ops;
        if (opt_.share_operators) scache.emplace(key, ops);
      }
      ++distinct_ops_;
    }
    size_ = off;
    const std::size_t slot = 8 * static_cast<std::size_t>(n_);
    tr_a_.assign(ne * slot, 0.0);
    tr_b_.assign(ne * slot, 0.0);
    st_a_.assign(ne * slot, 0.0);
    st_b_.assign(ne * slot, 0.0);
  }

  std::size_t base(int e) const { return static_cast<std::size_t>(e) * 8 * n_; }
  int nf() const { return 4 * n_; }

  void extract_traces(const Eigen::VectorXd& y) const {
    parallel_for(static_cast<std::ptrdiff_t>(elems_.size()), opt_.threads, [&](std::ptrdiff_t e) {
      const auto& ed = elems_[e];
      const std::size_t b = base(static_cast<int>(e));
      if (ed.region == RegionKind::fluid) {
        const int np = t_psi_.modes(), nq = t_p_.modes();
        Eigen::Map<Eigen::VectorXd>(&tr_a_[b], nf()) = ed.fops->face_p * y.segment(ed.offset + np, nq);
        Eigen::Map<Eigen::VectorXd>(&tr_b_[b], nf()) = ed.fops->normal_grad * y.segment(ed.offset, np);
      } else {
        const int nu = 2 * t_u_.modes(), nv = 2 * t_v_.modes();
        Eigen::Map<Eigen::VectorXd>(&tr_a_[b], 2 * nf()) = ed.sops->face_v * y.segment(ed.offset + nu, nv);
        Eigen::Map<Eigen::VectorXd>(&tr_b_[b], 2 * nf()) = ed.sops->traction * y.segment(ed.offset, nu);
      }
    });
  }

  FluidTrace fluid_trace(int e, int k) const { return {tr_a_[base(e) + k], tr_b_[base(e) + k]}; }
  SolidTrace solid_trace(int e, int k) const {
    const std::size_t b = base(e);
    return {Vec2(tr_a_[b + k], tr_a_[b + nf() + k]), Vec2(tr_b_[b + k], tr_b_[b + nf() + k])};
  }
  void put_fluid_star(int e, int k, double p, double a) const {
    st_a_[base(e) + k] = p;
    st_b_[base(e) + k] = a;
  }
  void put_solid_star(int e, int k, const Vec2& v, const Vec2& t) const {
    const std::size_t b = base(e);
    st_a_[b + k] = v.x();
    st_a_[b + nf() + k] = v.y();
    st_b_[b + k] = t.x();
    st_b_[b + nf() + k] = t.y();
  }

  /// Fluid-side traces and solid traces rewritten with the fluid normal.
  std::pair<FluidTrace, SolidTrace> interface_traces(const FaceRecord& fr, int ko, int kn) const {
    const FluidTrace f = fluid_trace(fr.owner, ko);
    SolidTrace s = solid_trace(fr.neighbor, kn);
    s.traction = -s.traction;
    return {f, s};
  }

  double side_rate(int e, int k) const {
    const auto& ed = elems_[e];
    const double w = ed.face_w[k];
    if (ed.region == RegionKind::fluid) {
      const FluidTrace tr = fluid_trace(e, k);
      return w * boundary_energy_rate(tr, FluidStar{st_a_[base(e) + k], st_b_[base(e) + k]});
    }
    const SolidTrace tr = solid_trace(e, k);
    const std::size_t b = base(e);
    const SolidStar st{Vec2(st_a_[b + k], st_a_[b + nf() + k]), Vec2(st_b_[b + k], st_b_[b + nf() + k])};
    return w * boundary_energy_rate(tr, st);
  }

  void compute_stars(double t, bool homogeneous) const {
    const int n = n_;
    const auto nfaces = static_cast<std::ptrdiff_t>(mesh_.faces.size());
    parallel_for(nfaces, opt_.threads, [&](std::ptrdiff_t fi) {
      const FaceRecord& fr = mesh_.faces[fi];
      const auto& eo = elems_[fr.owner];
      for (int k = 0; k < n; ++k) {
        const int ko = fr.owner_face * n + k;
        const int kn = fr.neighbor >= 0 ? fr.neighbor_face * n + (fr.reversed ? n - 1 - k : k) : -1;
        switch (fr.kind) {
          case FaceKind::fluid_interior: {
            const FluidTrace o = fluid_trace(fr.owner, ko);
            FluidTrace nb = fluid_trace(fr.neighbor, kn);
            nb.dpsi_n = -nb.dpsi_n;
            const double c = std::max(eo.c, elems_[fr.neighbor].c);
            const FluidStar st = interior_flux_fluid(o, nb, c, flux_.gamma_fluid);
            put_fluid_star(fr.owner, ko, st.p, st.dpsi_n);
            put_fluid_star(fr.neighbor, kn, st.p, -st.dpsi_n);
            break;
          }
          case FaceKind::solid_interior: {
            const SolidTrace o = solid_trace(fr.owner, ko);
            SolidTrace nb = solid_trace(fr.neighbor, kn);
            nb.traction = -nb.traction;
            const double z = std::max(eo.z, elems_[fr.neighbor].z);
            const SolidStar st = interior_flux_solid(o, nb, z, flux_.gamma_solid);
            put_solid_star(fr.owner, ko, st.v, st.traction);
            put_solid_star(fr.neighbor, kn, st.v, -st.traction);
            break;
          }
          case FaceKind::fluid_solid_interface: {
            const auto [f, s] = interface_traces(fr, ko, kn);
            const Vec2 nrm = eo.face_n[ko];
            const StarStates st = interface_flux(f, s, nrm, Vec2(-nrm.y(), nrm.x()), flux_);
            put_fluid_star(fr.owner, ko, st.fluid.p, st.fluid.dpsi_n);
            put_solid_star(fr.neighbor, kn, st.solid.v, -st.solid.traction);
            break;
          }
          case FaceKind::boundary: {
            const Vec2& x = eo.face_x[ko];
            const Vec2& nrm = eo.face_n[ko];
            const bool data = !homogeneous && boundary_exact_;
            if (eo.region == RegionKind::fluid) {
              FluidBoundaryData d;
              if (data) {
                if (fr.condition == BoundaryCondition::dirichlet) d.dg_dt = boundary_exact_->eval(x, t).p;
                else d.g = boundary_exact_->grad_psi(x, t).dot(nrm);
              }
              const FluidStar st =
                  boundary_flux(fluid_trace(fr.owner, ko), fr.condition, d, eo.c, flux_.gamma_fluid);
              put_fluid_star(fr.owner, ko, st.p, st.dpsi_n);
            } else {
              SolidBoundaryData d;
              if (data) {
                if (fr.condition == BoundaryCondition::dirichlet) d.dg_dt = boundary_exact_->eval(x, t).v;
                else d.traction = boundary_exact_->stress(x, t) * nrm;
              }
              const SolidStar st =
                  boundary_flux(solid_trace(fr.owner, ko), fr.condition, d, eo.z, flux_.gamma_solid);
              put_solid_star(fr.owner, ko, st.v, st.traction);
            }
            break;
          }
        }
      }
    });
  }

  void rhs_impl(const Eigen::VectorXd& y, double t, Eigen::VectorXd& dy, bool homogeneous) const {
    if (y.size() != size_) throw ContractViolation("state size does not match the solver layout");
    dy.resize(size_);
    extract_traces(y);
    compute_stars(t, homogeneous);
    parallel_for(static_cast<std::ptrdiff_t>(elems_.size()), opt_.threads, [&](std::ptrdiff_t e) {
      const auto& ed = elems_[e];
      const std::size_t b = base(static_cast<int>(e));
      if (ed.region == RegionKind::fluid) {
        const int np = t_psi_.modes(), nq = t_p_.modes();
        const auto& op = *ed.fops;
        const Eigen::Map<const Eigen::VectorXd> pt(&tr_a_[b], nf()), ps(&st_a_[b], nf()), as(&st_b_[b], nf());
        dy.segment(ed.offset, np).noalias() = op.psi_from_p * y.segment(ed.offset + np, nq);
        dy.segment(ed.offset, np).noalias() += op.psi_lift * (ps - pt);
        dy.segment(ed.offset + np, nq).noalias() = op.p_from_psi * y.segment(ed.offset, np);
        dy.segment(ed.offset + np, nq).noalias() += op.p_lift * as;
      } else {
        const int nu = 2 * t_u_.modes(), nv = 2 * t_v_.modes();
        const auto& op = *ed.sops;
        const Eigen::Map<const Eigen::VectorXd> vt(&tr_a_[b], 2 * nf()), vs(&st_a_[b], 2 * nf()),
            ts(&st_b_[b], 2 * nf());
        dy.segment(ed.offset, nu).noalias() = op.u_from_v * y.segment(ed.offset + nu, nv);
        dy.segment(ed.offset, nu).noalias() += op.u_lift * (vs - vt);
        dy.segment(ed.offset + nu, nv).noalias() = op.v_from_u * y.segment(ed.offset, nu);
        dy.segment(ed.offset + nu, nv).noalias() += op.v_lift * ts;
      }
    });
    if (source_ && !homogeneous)
      dy.segment(source_->offset, source_->load.size()) += source_->pulse.amplitude(t) * source_->load;
    if (!dy.allFinite()) {
      for (std::size_t e = 0; e < elems_.size(); ++e) {
        const Eigen::Index len = (e + 1 < elems_.size() ? elems_[e + 1].offset : size_) - elems_[e].offset;
        if (!dy.segment(elems_[e].offset, len).allFinite())
          throw IntegrationError("non-finite right-hand side in element " + std::to_string(e), t);
      }
    }
  }

  CoupledMesh mesh_;
  Degrees deg_;
  FluxParams flux_;
  SolverOptions opt_;
  QuadRule rule_;
  int n_ = 0;
  TensorTables t_psi_, t_p_, t_u_, t_v_;
  std::vector<ElementData> elems_;
  Eigen::Index size_ = 0;
  std::size_t distinct_ops_ = 0;
  std::shared_ptr<const ExactSolution> boundary_exact_;
  std::optional<Source> source_;
  mutable std::vector<double> tr_a_, tr_b_, st_a_, st_b_;
};

}  // namespace aedg
