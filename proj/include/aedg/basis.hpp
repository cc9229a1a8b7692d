#pragma once

// One-dimensional Legendre basis and Gauss-Legendre quadrature. All element
// operators are tensor products of the tables built here.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "aedg/errors.hpp"

namespace aedg {

struct LegendreValues {
  std::vector<double> value;  // P_0..P_q
  std::vector<double> deriv;  // P'_0..P'_q
};

/// Unnormalized Legendre polynomials (P_n(1) = 1) and derivatives by the
/// three-term recurrence.
inline LegendreValues legendre_eval(int q, double x) {
  if (q < 0) throw std::invalid_argument("legendre_eval: negative degree");
  if (std::abs(x) > 1.0 + 1e-12) throw DomainError("legendre_eval: |x| > 1");
  LegendreValues out;
  out.value.assign(q + 1, 0.0);
  out.deriv.assign(q + 1, 0.0);
  out.value[0] = 1.0;
  if (q == 0) return out;
  out.value[1] = x;
  out.deriv[1] = 1.0;
  for (int n = 1; n < q; ++n) {
    out.value[n + 1] = ((2 * n + 1) * x * out.value[n] - n * out.value[n - 1]) / (n + 1);
    // P'_{n+1} = P'_{n-1} + (2n+1) P_n, valid on the closed interval
    out.deriv[n + 1] = out.deriv[n - 1] + (2 * n + 1) * out.value[n];
  }
  return out;
}

/// ||P_n||^2 on [-1,1].
inline double legendre_norm_sq(int n) { return 2.0 / (2 * n + 1); }

struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

/// n-point Gauss-Legendre rule; nodes ascending, exact for degree 2n-1.
inline QuadRule gauss_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_rule: n must be >= 1");
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      auto lv = legendre_eval(n, std::clamp(x, -1.0, 1.0));
      dp = lv.deriv[n];
      const double dx = lv.value[n] / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    dp = legendre_eval(n, x).deriv[n];
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Values and derivatives of P_0..P_q sampled at a set of points.
struct PolyBasis {
  int degree = 0;
  Eigen::MatrixXd eval;   // (points x (q+1))
  Eigen::MatrixXd deriv;  // (points x (q+1))

  PolyBasis() = default;
  PolyBasis(int q, const std::vector<double>& points) : degree(q) {
    const int n = static_cast<int>(points.size());
    eval.resize(n, q + 1);
    deriv.resize(n, q + 1);
    for (int k = 0; k < n; ++k) {
      auto lv = legendre_eval(q, points[k]);
      for (int i = 0; i <= q; ++i) {
        eval(k, i) = lv.value[i];
        deriv(k, i) = lv.deriv[i];
      }
    }
  }
  int size() const { return degree + 1; }
};

/// Index of the tensor-product mode P_i(xi) P_j(eta) in a degree-q block.
inline int tensor_index(int q, int i, int j) { return i * (q + 1) + j; }
inline int tensor_size(int q) { return (q + 1) * (q + 1); }

/// Evaluates all tensor modes of degree q at a single reference point.
inline Eigen::RowVectorXd tensor_modes_at(int q, double xi, double eta) {
  auto a = legendre_eval(q, xi);
  auto b = legendre_eval(q, eta);
  Eigen::RowVectorXd row(tensor_size(q));
  for (int i = 0; i <= q; ++i)
    for (int j = 0; j <= q; ++j) row(tensor_index(q, i, j)) = a.value[i] * b.value[j];
  return row;
}

/// Tensor-product evaluation tables of all degree-q modes on the volume grid
/// (index a*n+b for node pair (xi_a, eta_b)) and on the four faces (index f*n+k).
struct TensorTables {
  int degree = 0;
  int n = 0;
  Eigen::MatrixXd vol, vol_dxi, vol_deta;
  Eigen::MatrixXd face, face_dxi, face_deta;

  TensorTables() = default;
  TensorTables(int q, const QuadRule& rule) : degree(q), n(rule.size()) {
    const int nb = tensor_size(q);
    PolyBasis b(q, rule.nodes);
    PolyBasis ends(q, {-1.0, 1.0});
    vol.resize(n * n, nb);
    vol_dxi.resize(n * n, nb);
    vol_deta.resize(n * n, nb);
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c)
        for (int i = 0; i <= q; ++i)
          for (int j = 0; j <= q; ++j) {
            const int row = a * n + c, col = tensor_index(q, i, j);
            vol(row, col) = b.eval(a, i) * b.eval(c, j);
            vol_dxi(row, col) = b.deriv(a, i) * b.eval(c, j);
            vol_deta(row, col) = b.eval(a, i) * b.deriv(c, j);
          }
    face.resize(4 * n, nb);
    face_dxi.resize(4 * n, nb);
    face_deta.resize(4 * n, nb);
    for (int f = 0; f < 4; ++f)
      for (int k = 0; k < n; ++k)
        for (int i = 0; i <= q; ++i)
          for (int j = 0; j <= q; ++j) {
            const int row = f * n + k, col = tensor_index(q, i, j);
            double pi, dpi, pj, dpj;
            if (f < 2) {  // xi fixed at -1 / +1, eta = node k
              pi = ends.eval(f, i);
              dpi = ends.deriv(f, i);
              pj = b.eval(k, j);
              dpj = b.deriv(k, j);
            } else {
              pi = b.eval(k, i);
              dpi = b.deriv(k, i);
              pj = ends.eval(f - 2, j);
              dpj = ends.deriv(f - 2, j);
            }
            face(row, col) = pi * pj;
            face_dxi(row, col) = dpi * pj;
            face_deta(row, col) = pi * dpj;
          }
  }
  int modes() const { return tensor_size(degree); }
};

}  // namespace aedg
