#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iat/krylov.hpp"
#include "iat/rng.hpp"

namespace iat {

// Full SVD of the projected Hessenberg matrix H = U * diag(sigma) * S^T,
// the numerical rank q (count of sigma_j > rank_tol * sigma_1), and the
// rank-truncated projected data y_hat = U^T y_proj with entries beyond q
// zeroed. y_hat is what both selection rules and the filter solver consume.
struct HessenbergSVD {
  Matrix U;      // (m+1) x (m+1), or m x m for the square breakdown form
  Matrix S;      // m x m right singular vectors
  Vector sigma;  // length m, nonincreasing
  int q = 0;
  Vector y_hat;  // length U.rows(), entries with index >= q are zero

  // Energy of the data captured by the rank-q projector.
  double captured_energy() const { return y_hat.squaredNorm(); }
};

inline HessenbergSVD decompose(const Matrix& H, const Vector& y_proj,
                               double rank_tol = 1e-12) {
  if (!H.allFinite() || !y_proj.allFinite())
    throw std::invalid_argument("decompose: non-finite input");
  if (y_proj.size() != H.rows())
    throw std::invalid_argument("decompose: y_proj does not match H");

  HessenbergSVD r;
  Eigen::BDCSVD<Matrix> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  r.U = svd.matrixU();
  r.S = svd.matrixV();
  r.sigma = svd.singularValues();
  const double top = r.sigma.size() > 0 ? r.sigma[0] : 0.0;
  r.q = 0;
  for (Eigen::Index j = 0; j < r.sigma.size(); ++j)
    if (r.sigma[j] > rank_tol * top) ++r.q;
  if (top == 0.0) r.q = 0;
  r.y_hat = r.U.transpose() * y_proj;
  for (Eigen::Index j = r.q; j < r.y_hat.size(); ++j) r.y_hat[j] = 0.0;
  return r;
}

// || (I - R) v || where R is the orthogonal projector onto the rank-q range
// of the projected operator. Computed in coefficients as
// sqrt(||v||^2 - ||first q entries of U^T V^T v||^2); R is never formed.
inline double projector_residual_norm(const ArnoldiDecomposition& d,
                                      const HessenbergSVD& svd, const Vector& v) {
  if (v.size() != d.dim())
    throw std::invalid_argument("projector_residual_norm: v has wrong dimension");
  if (svd.U.rows() != d.V.cols())
    throw std::invalid_argument("projector_residual_norm: decomposition/SVD mismatch");
  const Vector p = d.V.transpose() * v;
  const Vector u = svd.U.transpose() * p;
  const double inside = u.head(svd.q).squaredNorm();
  return std::sqrt(std::max(0.0, v.squaredNorm() - inside));
}

// Power-iteration estimate of the operator norm, deflated by the Krylov
// basis when one is supplied: it bounds h = ||T (I - V_m V_m^T)||_2, the gap
// between T and its rank-limited approximation T V_m V_m^T. The start vector
// is drawn from a fixed seed (7919) so the estimate is reproducible; `safety`
// scales the converged Rayleigh quotient so the result errs on the side of an
// upper bound (power iteration approaches the norm from below).
inline double estimate_h(const LinearOperator& op, const ArnoldiDecomposition& d,
                         int iters = 50, double safety = 1.05) {
  if (safety < 1.0) throw std::invalid_argument("estimate_h: safety must be >= 1");
  const Eigen::Index n = op.dim();
  const int m = d.completed_steps;
  auto Vm = d.V.leftCols(m);
  NormalSampler rng(7919);
  Vector u = rng.draw(n);
  u /= u.norm();
  double best = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vector pu = u - Vm * (Vm.transpose() * u);
    Vector w = op.apply(pu);
    best = std::max(best, w.squaredNorm());
    Vector u2 = op.apply_adjoint(w);
    u2.noalias() -= Vm * (Vm.transpose() * u2);
    const double nn = u2.norm();
    if (nn == 0.0) break;
    u = u2 / nn;
  }
  return safety * std::sqrt(best);
}

// Degenerate no-basis case: plain operator-norm estimate (the gap of an
// empty subspace is the whole operator).
inline double estimate_operator_norm(const LinearOperator& op, int iters = 50,
                                     double safety = 1.05) {
  if (safety < 1.0) throw std::invalid_argument("estimate_operator_norm: safety must be >= 1");
  NormalSampler rng(7919);
  Vector u = rng.draw(op.dim());
  u /= u.norm();
  double best = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vector w = op.apply(u);
    best = std::max(best, w.squaredNorm());
    Vector u2 = op.apply_adjoint(w);
    const double nn = u2.norm();
    if (nn == 0.0) break;
    u = u2 / nn;
  }
  return safety * std::sqrt(best);
}

// How nearly the projected operator reproduces R T on the true solution:
//
//   d = || R T x_true  -  (V H V_m^T) x_true || / ||x_true||
//
// Both terms live in span(V), so the difference is evaluated in U-basis
// coefficients without forming any n x n projector.
inline double d_metric(const LinearOperator& op, const ArnoldiDecomposition& d,
                       const HessenbergSVD& svd, const Vector& x_true) {
  if (x_true.size() != d.dim())
    throw std::invalid_argument("d_metric: x_true has wrong dimension");
  const double xn = x_true.norm();
  if (xn == 0.0) throw std::invalid_argument("d_metric: x_true is zero");
  const int m = d.completed_steps;
  const Vector w = op.apply(x_true);
  Vector a = svd.U.transpose() * (d.V.transpose() * w);
  for (Eigen::Index j = svd.q; j < a.size(); ++j) a[j] = 0.0;
  const Vector b = svd.U.transpose() * (d.H * (d.V.leftCols(m).transpose() * x_true));
  return (a - b).norm() / xn;
}

// Dense diagnostic || (I - R) T ||_2 for small problems: the operator mass
// the rank-q captured range misses. Test/analysis use only; cost is a dense
// SVD of an n x n matrix.
inline double uncaptured_operator_norm(const Matrix& T, const ArnoldiDecomposition& d,
                                       const HessenbergSVD& svd) {
  if (T.rows() != d.dim())
    throw std::invalid_argument("uncaptured_operator_norm: matrix mismatch");
  const Matrix W = (d.V * svd.U).leftCols(svd.q);  // orthonormal basis of range(R)
  const Matrix B = T - W * (W.transpose() * T);
  Eigen::BDCSVD<Matrix> svd2(B);
  return svd2.singularValues().size() > 0 ? svd2.singularValues()[0] : 0.0;
}

}  // namespace iat
