#pragma once

// Element operators for the fluid unknowns (psi, p).
//
//   int grad(dpsi/dt - p) . grad(phi) = int_faces (p* - p) grad(phi).n
//   int (1/c^2) dp/dt chi + grad(psi) . grad(chi) = int_faces chi (grad psi.n)*
//
// The constant test function makes the first equation vacuous; its row is
// replaced by the mean-value moment int (dpsi/dt - p) = 0.

#include <Eigen/Dense>

#include "aedg/basis.hpp"
#include "aedg/errors.hpp"
#include "aedg/geometry.hpp"

namespace aedg {

/// Assembled (not yet factorized) matrices of one fluid element.
struct AcousticMatrices {
  Eigen::MatrixXd stiffness;      // S: int grad phi_i . grad phi_j
  Eigen::MatrixXd stiffness_aug;  // S with the constant row replaced by int phi_j
  Eigen::MatrixXd coupling;       // K: int grad phi_i . grad chi_j (psi test, p trial)
  Eigen::MatrixXd coupling_aug;   // K with the constant row replaced by int chi_j
  Eigen::MatrixXd mass_p;         // int chi_i chi_j / c^2
  Eigen::MatrixXd lift_psi;       // int_faces grad(phi).n (.) ; constant row zero
  Eigen::MatrixXd lift_p;         // int_faces chi (.)
  Eigen::MatrixXd normal_grad;    // grad psi . n at face points
};

/// Dense operators applied by the fluid right-hand side.
struct AcousticElementOps {
  Eigen::MatrixXd psi_from_p;   // S~^{-1} K~
  Eigen::MatrixXd psi_lift;     // S~^{-1} L_psi
  Eigen::MatrixXd p_from_psi;   // -M^{-1} K^T
  Eigen::MatrixXd p_lift;       // M^{-1} L_p
  Eigen::MatrixXd normal_grad;  // trace extraction for grad psi . n
};

inline AcousticMatrices assemble_acoustic(const ElementGeometry& geo, const TensorTables& tpsi,
                                          const TensorTables& tp, double c) {
  const Eigen::VectorXd w = as_vector(geo.vol_w);
  const Eigen::VectorXd wf = as_vector(geo.face_w);
  auto [gx, gy] = physical_gradients(tpsi.vol_dxi, tpsi.vol_deta, geo.vol_metric);
  auto [hx, hy] = physical_gradients(tp.vol_dxi, tp.vol_deta, geo.vol_metric);

  AcousticMatrices m;
  m.stiffness = gx.transpose() * w.asDiagonal() * gx + gy.transpose() * w.asDiagonal() * gy;
  m.coupling = gx.transpose() * w.asDiagonal() * hx + gy.transpose() * w.asDiagonal() * hy;
  m.coupling_aug = m.coupling;
  m.stiffness_aug = m.stiffness;
  m.stiffness_aug.row(0) = w.transpose() * tpsi.vol;
  m.coupling_aug.row(0) = w.transpose() * tp.vol;
  m.mass_p = tp.vol.transpose() * (w / (c * c)).asDiagonal() * tp.vol;

  auto [fx, fy] = physical_gradients(tpsi.face_dxi, tpsi.face_deta, geo.face_metric);
  const Eigen::Index nf = fx.rows();
  Eigen::VectorXd n1(nf), n2(nf);
  for (Eigen::Index k = 0; k < nf; ++k) {
    n1(k) = geo.face_normal[k].x();
    n2(k) = geo.face_normal[k].y();
  }
  m.normal_grad = n1.asDiagonal() * fx + n2.asDiagonal() * fy;
  m.lift_psi = m.normal_grad.transpose() * wf.asDiagonal();
  m.lift_psi.row(0).setZero();
  m.lift_p = tp.face.transpose() * wf.asDiagonal();
  return m;
}

inline AcousticElementOps factorize_acoustic(const AcousticMatrices& m) {
  Eigen::PartialPivLU<Eigen::MatrixXd> s_lu(m.stiffness_aug);
  if (!(s_lu.rcond() > 1e-14)) throw AssemblyError("augmented acoustic stiffness is singular");
  Eigen::LLT<Eigen::MatrixXd> m_llt(m.mass_p);
  if (m_llt.info() != Eigen::Success) throw AssemblyError("acoustic mass matrix is not positive definite");
  AcousticElementOps ops;
  ops.psi_from_p = s_lu.solve(m.coupling_aug);
  ops.psi_lift = s_lu.solve(m.lift_psi);
  ops.p_from_psi = -m_llt.solve(m.coupling.transpose());
  ops.p_lift = m_llt.solve(m.lift_p);
  ops.normal_grad = m.normal_grad;
  return ops;
}

}  // namespace aedg
