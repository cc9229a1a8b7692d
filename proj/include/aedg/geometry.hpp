#pragma once

// Analytic reference-to-physical mappings for quadrilateral elements and the
// per-element metric data sampled at quadrature points.

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "aedg/basis.hpp"
#include "aedg/errors.hpp"

namespace aedg {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// x(xi, eta) on [-1,1]^2 with its Jacobian [dx/dxi dx/deta].
class Mapping {
 public:
  virtual ~Mapping() = default;
  virtual Vec2 point(double xi, double eta) const = 0;
  virtual Mat2 jacobian(double xi, double eta) const = 0;
};

/// Corners ordered (-1,-1), (1,-1), (-1,1), (1,1).
class BilinearMap final : public Mapping {
 public:
  explicit BilinearMap(std::array<Vec2, 4> corners) : c_(corners) {}
  Vec2 point(double xi, double eta) const override {
    const double a = 0.25 * (1 - xi) * (1 - eta), b = 0.25 * (1 + xi) * (1 - eta);
    const double c = 0.25 * (1 - xi) * (1 + eta), d = 0.25 * (1 + xi) * (1 + eta);
    return a * c_[0] + b * c_[1] + c * c_[2] + d * c_[3];
  }
  Mat2 jacobian(double xi, double eta) const override {
    Mat2 jac;
    jac.col(0) = 0.25 * ((1 - eta) * (c_[1] - c_[0]) + (1 + eta) * (c_[3] - c_[2]));
    jac.col(1) = 0.25 * ((1 - xi) * (c_[2] - c_[0]) + (1 + xi) * (c_[3] - c_[1]));
    return jac;
  }
  const std::array<Vec2, 4>& corners() const { return c_; }

 private:
  std::array<Vec2, 4> c_;
};

/// r(theta) = base + sum_k A_k sin((k+1) theta), k = 1..K.
struct RadialCurve {
  double base = 1.0;
  std::vector<double> coeffs;

  double value(double th) const {
    double r = base;
    for (std::size_t k = 0; k < coeffs.size(); ++k) r += coeffs[k] * std::sin((k + 2) * th);
    return r;
  }
  double deriv(double th) const {
    double d = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) d += coeffs[k] * (k + 2) * std::cos((k + 2) * th);
    return d;
  }
};

/// Polar element between two radial curves: r = r_in + s (r_out - r_in), with
/// s and theta affine in (xi, eta).
class PolarBlendMap final : public Mapping {
 public:
  PolarBlendMap(RadialCurve inner, RadialCurve outer, double s0, double s1, double th0, double th1)
      : in_(std::move(inner)), out_(std::move(outer)), s0_(s0), s1_(s1), th0_(th0), th1_(th1) {}

  Vec2 point(double xi, double eta) const override {
    const double s = s_of(xi), th = th_of(eta);
    const double r = in_.value(th) + s * (out_.value(th) - in_.value(th));
    return {r * std::cos(th), r * std::sin(th)};
  }
  Mat2 jacobian(double xi, double eta) const override {
    const double s = s_of(xi), th = th_of(eta);
    const double ri = in_.value(th), ro = out_.value(th);
    const double r = ri + s * (ro - ri);
    const double dr = in_.deriv(th) + s * (out_.deriv(th) - in_.deriv(th));
    const double c = std::cos(th), sn = std::sin(th);
    Mat2 jac;
    const double ds = 0.5 * (s1_ - s0_), dth = 0.5 * (th1_ - th0_);
    jac(0, 0) = ds * (ro - ri) * c;
    jac(1, 0) = ds * (ro - ri) * sn;
    jac(0, 1) = dth * (dr * c - r * sn);
    jac(1, 1) = dth * (dr * sn + r * c);
    return jac;
  }

 private:
  double s_of(double xi) const { return s0_ + 0.5 * (xi + 1) * (s1_ - s0_); }
  double th_of(double eta) const { return th0_ + 0.5 * (eta + 1) * (th1_ - th0_); }
  RadialCurve in_, out_;
  double s0_, s1_, th0_, th1_;
};

/// x2 = y0 + amplitude sin(n pi x1).
struct GraphCurve {
  double y0 = 0.0;
  double amplitude = 0.0;
  int n_wave = 0;
  double value(double x) const { return y0 + amplitude * std::sin(n_wave * std::numbers::pi * x); }
  double deriv(double x) const {
    return amplitude * n_wave * std::numbers::pi * std::cos(n_wave * std::numbers::pi * x);
  }
};

/// Element between two graphs x2 = lo(x1) and x2 = up(x1), linearly blended.
class GraphBlendMap final : public Mapping {
 public:
  GraphBlendMap(GraphCurve lower, GraphCurve upper, double x0, double x1, double s0, double s1)
      : lo_(lower), up_(upper), x0_(x0), x1_(x1), s0_(s0), s1_(s1) {}

  Vec2 point(double xi, double eta) const override {
    const double x = x0_ + 0.5 * (xi + 1) * (x1_ - x0_);
    const double s = s0_ + 0.5 * (eta + 1) * (s1_ - s0_);
    return {x, lo_.value(x) + s * (up_.value(x) - lo_.value(x))};
  }
  Mat2 jacobian(double xi, double eta) const override {
    const double x = x0_ + 0.5 * (xi + 1) * (x1_ - x0_);
    const double s = s0_ + 0.5 * (eta + 1) * (s1_ - s0_);
    const double dx = 0.5 * (x1_ - x0_), ds = 0.5 * (s1_ - s0_);
    Mat2 jac;
    jac(0, 0) = dx;
    jac(1, 0) = dx * (lo_.deriv(x) + s * (up_.deriv(x) - lo_.deriv(x)));
    jac(0, 1) = 0.0;
    jac(1, 1) = ds * (up_.value(x) - lo_.value(x));
    return jac;
  }

 private:
  GraphCurve lo_, up_;
  double x0_, x1_, s0_, s1_;
};

/// Local faces: 0 xi=-1, 1 xi=+1, 2 eta=-1, 3 eta=+1. Each is parameterized
/// by the remaining reference coordinate s in increasing order.
inline std::array<double, 2> face_reference_point(int face, double s) {
  switch (face) {
    case 0: return {-1.0, s};
    case 1: return {1.0, s};
    case 2: return {s, -1.0};
    default: return {s, 1.0};
  }
}

/// Metric data of one element sampled on a tensor Gauss grid and its faces.
struct ElementGeometry {
  int n = 0;                          // points per direction
  std::vector<Vec2> vol_x;            // n*n, index kx*n + ky
  std::vector<double> vol_w;          // w_k w_l J
  std::vector<double> vol_det;        // J
  std::vector<Mat2> vol_metric;       // [[xi_1, xi_2], [eta_1, eta_2]]
  std::vector<Vec2> face_x;           // 4n, index f*n + k
  std::vector<Vec2> face_normal;      // outward unit normal
  std::vector<Vec2> face_tangent;     // m = (-n2, n1)
  std::vector<double> face_w;         // w_k * surface Jacobian
  std::vector<double> face_sj;        // surface Jacobian
  std::vector<Mat2> face_metric;
};

inline Mat2 inverse_metric(const Mat2& jac, double* det_out = nullptr) {
  const double det = jac.determinant();
  if (det_out) *det_out = det;
  Mat2 m;
  m(0, 0) = jac(1, 1) / det;   // xi_1
  m(0, 1) = -jac(0, 1) / det;  // xi_2
  m(1, 0) = -jac(1, 0) / det;  // eta_1
  m(1, 1) = jac(0, 0) / det;   // eta_2
  return m;
}

inline ElementGeometry sample_geometry(const Mapping& map, const QuadRule& rule) {
  ElementGeometry g;
  const int n = rule.size();
  g.n = n;
  g.vol_x.resize(n * n);
  g.vol_w.resize(n * n);
  g.vol_det.resize(n * n);
  g.vol_metric.resize(n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int k = a * n + b;
      const double xi = rule.nodes[a], eta = rule.nodes[b];
      double det = 0.0;
      g.vol_metric[k] = inverse_metric(map.jacobian(xi, eta), &det);
      if (!(det > 0.0)) throw GeometryError("non-positive Jacobian determinant in element");
      g.vol_x[k] = map.point(xi, eta);
      g.vol_det[k] = det;
      g.vol_w[k] = rule.weights[a] * rule.weights[b] * det;
    }
  g.face_x.resize(4 * n);
  g.face_normal.resize(4 * n);
  g.face_tangent.resize(4 * n);
  g.face_w.resize(4 * n);
  g.face_sj.resize(4 * n);
  g.face_metric.resize(4 * n);
  for (int f = 0; f < 4; ++f)
    for (int k = 0; k < n; ++k) {
      const auto [xi, eta] = face_reference_point(f, rule.nodes[k]);
      const Mat2 jac = map.jacobian(xi, eta);
      double det = 0.0;
      const Mat2 metric = inverse_metric(jac, &det);
      if (!(det > 0.0)) throw GeometryError("non-positive Jacobian determinant on element face");
      Vec2 grad = (f < 2) ? Vec2(metric.row(0).transpose()) : Vec2(metric.row(1).transpose());
      if (f == 0 || f == 2) grad = -grad;
      const double len = grad.norm();
      const Vec2 nrm = grad / len;
      const int i = f * n + k;
      g.face_x[i] = map.point(xi, eta);
      g.face_normal[i] = nrm;
      g.face_tangent[i] = Vec2(-nrm.y(), nrm.x());
      g.face_sj[i] = len * det;  // |grad xi| J = |dx/deta|
      g.face_w[i] = rule.weights[k] * g.face_sj[i];
      g.face_metric[i] = metric;
    }
  return g;
}

/// Newton inversion of the mapping; returns false if the point is outside
/// [-1-tol, 1+tol]^2 or Newton fails.
inline bool inverse_map(const Mapping& map, const Vec2& x, double& xi, double& eta, double tol = 1e-10) {
  Vec2 r(0.0, 0.0);
  for (int it = 0; it < 60; ++it) {
    const Vec2 res = map.point(r.x(), r.y()) - x;
    const Mat2 jac = map.jacobian(r.x(), r.y());
    Vec2 dr = jac.partialPivLu().solve(res);
    r -= dr;
    if (!r.allFinite()) return false;
    r = r.cwiseMax(-3.0).cwiseMin(3.0);
    if (dr.norm() < 1e-15) break;
  }
  if ((map.point(r.x(), r.y()) - x).norm() > 1e-9 * (1.0 + x.norm())) return false;
  xi = r.x();
  eta = r.y();
  return std::abs(xi) <= 1.0 + tol && std::abs(eta) <= 1.0 + tol;
}

/// Physical x1/x2 derivatives of all modes at the given points:
/// d/dx_i = xi_i d/dxi + eta_i d/deta, metric rows [xi_1 xi_2; eta_1 eta_2].
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> physical_gradients(const Eigen::MatrixXd& dxi,
                                                                      const Eigen::MatrixXd& deta,
                                                                      const std::vector<Mat2>& metric) {
  const Eigen::Index np = dxi.rows();
  Eigen::VectorXd xi1(np), xi2(np), eta1(np), eta2(np);
  for (Eigen::Index k = 0; k < np; ++k) {
    xi1(k) = metric[k](0, 0);
    xi2(k) = metric[k](0, 1);
    eta1(k) = metric[k](1, 0);
    eta2(k) = metric[k](1, 1);
  }
  Eigen::MatrixXd gx = xi1.asDiagonal() * dxi + eta1.asDiagonal() * deta;
  Eigen::MatrixXd gy = xi2.asDiagonal() * dxi + eta2.asDiagonal() * deta;
  return {std::move(gx), std::move(gy)};
}

inline Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace aedg
