#pragma once

// Element operators for the solid unknowns (u1, u2, v1, v2).
//
//   a(du/dt - v, phi) = int_faces (v* - v) . sigma(phi) n
//   int rho dv/dt . phi + a(u, phi) = int_faces phi . (sigma n)*
//
// with a(w, phi) = int sigma(w) : grad(phi). Coefficient layout is
// [component 1 block; component 2 block]. Three rows of the displacement
// equation are vacuous or dependent and get replaced: the two constant
// modes by mean-value moments and one linear mode by the curl moment.

#include <cmath>

#include <Eigen/Dense>

#include "aedg/basis.hpp"
#include "aedg/errors.hpp"
#include "aedg/geometry.hpp"
#include "aedg/mesh.hpp"

namespace aedg {

struct ElasticMatrices {
  Eigen::MatrixXd stiffness;      // G: a(phi_j, phi_i) over 2 nbu modes
  Eigen::MatrixXd stiffness_aug;  // G with replaced rows
  Eigen::MatrixXd coupling_aug;   // a(v-trial, u-test) with replaced rows
  Eigen::MatrixXd coupling_vu;    // a(u-trial, v-test)
  Eigen::MatrixXd mass_v;         // rho int phi_i phi_j, block diagonal
  Eigen::MatrixXd traction;       // sigma(u) n at face points, [comp1 pts; comp2 pts]
  Eigen::MatrixXd lift_u;         // T^T W, replaced rows zero
  Eigen::MatrixXd lift_v;         // blockdiag(F^T W)
  Eigen::MatrixXd face_v;         // v at face points, [comp1 pts; comp2 pts]
  int rotation_row = -1;          // index of the replaced linear mode (component 1)
};

struct ElasticElementOps {
  Eigen::MatrixXd u_from_v;   // G~^{-1} G~_uv
  Eigen::MatrixXd u_lift;     // G~^{-1} L_u
  Eigen::MatrixXd v_from_u;   // -M^{-1} K_vu
  Eigen::MatrixXd v_lift;     // M^{-1} L_v
  Eigen::MatrixXd traction;
  Eigen::MatrixXd face_v;
};

namespace detail {

/// a(w, phi) block matrix: rows test (gx, gy), columns trial (hx, hy).
inline Eigen::MatrixXd elastic_form(const Eigen::MatrixXd& gx, const Eigen::MatrixXd& gy,
                                    const Eigen::MatrixXd& hx, const Eigen::MatrixXd& hy,
                                    const Eigen::VectorXd& w, double lambda, double mu) {
  const Eigen::Index nt = gx.cols(), ns = hx.cols();
  const Eigen::MatrixXd xx = gx.transpose() * w.asDiagonal() * hx;
  const Eigen::MatrixXd xy = gx.transpose() * w.asDiagonal() * hy;
  const Eigen::MatrixXd yx = gy.transpose() * w.asDiagonal() * hx;
  const Eigen::MatrixXd yy = gy.transpose() * w.asDiagonal() * hy;
  Eigen::MatrixXd a(2 * nt, 2 * ns);
  a.topLeftCorner(nt, ns) = (lambda + 2 * mu) * xx + mu * yy;
  a.topRightCorner(nt, ns) = lambda * xy + mu * yx;
  a.bottomLeftCorner(nt, ns) = lambda * yx + mu * xy;
  a.bottomRightCorner(nt, ns) = (lambda + 2 * mu) * yy + mu * xx;
  return a;
}

}  // namespace detail

/// Mode of component 1 whose displacement row is replaced by the curl moment:
/// P1(xi) when xi_1 eta_2 vanishes at the element center, else P1(eta).
inline int rotation_row_index(const Mapping& map, int qu) {
  const Mat2 m = inverse_metric(map.jacobian(0.0, 0.0));
  const double scale = m.cwiseAbs().maxCoeff();
  const bool vanishes = std::abs(m(0, 0) * m(1, 1)) <= 1e-12 * scale * scale;
  return vanishes ? tensor_index(qu, 1, 0) : tensor_index(qu, 0, 1);
}

inline ElasticMatrices assemble_elastic(const ElementGeometry& geo, const Mapping& map, const TensorTables& tu,
                                        const TensorTables& tv, const SolidMaterial& mat) {
  if (tu.degree < 1) throw AssemblyError("displacement degree must be >= 1");
  const Eigen::VectorXd w = as_vector(geo.vol_w);
  const Eigen::VectorXd wf = as_vector(geo.face_w);
  const double lam = mat.lambda, mu = mat.mu;
  const Eigen::Index nbu = tu.modes(), nbv = tv.modes();
  auto [gx, gy] = physical_gradients(tu.vol_dxi, tu.vol_deta, geo.vol_metric);
  auto [hx, hy] = physical_gradients(tv.vol_dxi, tv.vol_deta, geo.vol_metric);

  ElasticMatrices m;
  m.stiffness = detail::elastic_form(gx, gy, gx, gy, w, lam, mu);
  m.coupling_aug = detail::elastic_form(gx, gy, hx, hy, w, lam, mu);
  m.coupling_vu = detail::elastic_form(hx, hy, gx, gy, w, lam, mu);
  m.stiffness_aug = m.stiffness;

  const Eigen::RowVectorXd mean_u = w.transpose() * tu.vol;
  const Eigen::RowVectorXd mean_v = w.transpose() * tv.vol;
  m.stiffness_aug.row(0).setZero();
  m.stiffness_aug.row(nbu).setZero();
  m.stiffness_aug.block(0, 0, 1, nbu) = mean_u;
  m.stiffness_aug.block(nbu, nbu, 1, nbu) = mean_u;
  m.coupling_aug.row(0).setZero();
  m.coupling_aug.row(nbu).setZero();
  m.coupling_aug.block(0, 0, 1, nbv) = mean_v;
  m.coupling_aug.block(nbu, nbv, 1, nbv) = mean_v;

  // curl moment: int (d2 w1 - d1 w2)
  m.rotation_row = rotation_row_index(map, tu.degree);
  const int r = m.rotation_row;
  m.stiffness_aug.row(r) << w.transpose() * gy, -(w.transpose() * gx);
  m.coupling_aug.row(r) << w.transpose() * hy, -(w.transpose() * hx);

  m.mass_v = Eigen::MatrixXd::Zero(2 * nbv, 2 * nbv);
  const Eigen::MatrixXd mv = tv.vol.transpose() * (mat.rho * w).asDiagonal() * tv.vol;
  m.mass_v.topLeftCorner(nbv, nbv) = mv;
  m.mass_v.bottomRightCorner(nbv, nbv) = mv;

  auto [fx, fy] = physical_gradients(tu.face_dxi, tu.face_deta, geo.face_metric);
  const Eigen::Index nf = fx.rows();
  Eigen::VectorXd n1(nf), n2(nf);
  for (Eigen::Index k = 0; k < nf; ++k) {
    n1(k) = geo.face_normal[k].x();
    n2(k) = geo.face_normal[k].y();
  }
  m.traction.resize(2 * nf, 2 * nbu);
  m.traction.topLeftCorner(nf, nbu) = (lam + 2 * mu) * n1.asDiagonal() * fx + mu * n2.asDiagonal() * fy;
  m.traction.topRightCorner(nf, nbu) = lam * n1.asDiagonal() * fy + mu * n2.asDiagonal() * fx;
  m.traction.bottomLeftCorner(nf, nbu) = mu * n1.asDiagonal() * fy + lam * n2.asDiagonal() * fx;
  m.traction.bottomRightCorner(nf, nbu) = mu * n1.asDiagonal() * fx + (lam + 2 * mu) * n2.asDiagonal() * fy;

  Eigen::VectorXd wf2(2 * nf);
  wf2 << wf, wf;
  m.lift_u = m.traction.transpose() * wf2.asDiagonal();
  m.lift_u.row(0).setZero();
  m.lift_u.row(nbu).setZero();
  m.lift_u.row(r).setZero();

  m.face_v = Eigen::MatrixXd::Zero(2 * nf, 2 * nbv);
  m.face_v.topLeftCorner(nf, nbv) = tv.face;
  m.face_v.bottomRightCorner(nf, nbv) = tv.face;
  m.lift_v = m.face_v.transpose() * wf2.asDiagonal();
  return m;
}

inline ElasticElementOps factorize_elastic(const ElasticMatrices& m) {
  Eigen::PartialPivLU<Eigen::MatrixXd> g_lu(m.stiffness_aug);
  if (!(g_lu.rcond() > 1e-14)) throw AssemblyError("augmented elastic stiffness is singular");
  Eigen::LLT<Eigen::MatrixXd> m_llt(m.mass_v);
  if (m_llt.info() != Eigen::Success) throw AssemblyError("elastic mass matrix is not positive definite");
  ElasticElementOps ops;
  ops.u_from_v = g_lu.solve(m.coupling_aug);
  ops.u_lift = g_lu.solve(m.lift_u);
  ops.v_from_u = -m_llt.solve(m.coupling_vu);
  ops.v_lift = m_llt.solve(m.lift_v);
  ops.traction = m.traction;
  ops.face_v = m.face_v;
  return ops;
}

}  // namespace aedg
