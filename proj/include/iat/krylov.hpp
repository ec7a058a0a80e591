#pragma once

#include <stdexcept>

#include "iat/operator.hpp"

namespace iat {

// Arnoldi decomposition after m completed steps:
//
//   T * V.leftCols(m) = V * H
//
// where V is n x (m+1) with orthonormal columns and H is (m+1) x m upper
// Hessenberg. If the process breaks down at step m (the new direction
// vanishes: the Krylov subspace is T-invariant), V keeps m columns and H is
// the square m x m projection, so the same relation holds with V square.
struct ArnoldiDecomposition {
  Matrix V;
  Matrix H;
  int requested_steps = 0;
  int completed_steps = 0;
  bool breakdown = false;
  // Largest singular value of H seen while the recursion ran; a cheap lower
  // estimate of ||T||_2 used for the breakdown test and residual scaling.
  double op_norm_est = 0.0;

  Eigen::Index dim() const { return V.rows(); }
};

namespace detail {

// Warm-started power estimate of sigma_1(B) for the growing Hessenberg
// block. `u` carries the right singular direction between calls; a handful
// of refinement sweeps per step is plenty because consecutive blocks differ
// by one column.
inline double refresh_norm_estimate(const Eigen::Ref<const Matrix>& B, Vector& u,
                                    int sweeps = 4) {
  const Eigen::Index cols = B.cols();
  if (u.size() < cols) {
    Vector grown = Vector::Ones(cols);
    grown.head(u.size()) = u;
    u = grown;
  } else if (u.size() > cols) {
    u.conservativeResize(cols);
  }
  double nu = u.norm();
  if (nu == 0.0) u = Vector::Ones(cols), nu = u.norm();
  u /= nu;
  double est = 0.0;
  for (int k = 0; k < sweeps; ++k) {
    Vector t = B * u;
    est = t.norm();
    if (est == 0.0) return 0.0;
    Vector s = B.transpose() * t;
    double ns = s.norm();
    if (ns == 0.0) break;
    u = s / ns;
  }
  return est;
}

}  // namespace detail

// Arnoldi process with two passes of classical Gram-Schmidt per step
// (re-orthogonalization keeps V*V - I at the 1e-15 level, which the
// projected right-hand side inherits). `breakdown_tol` is relative:
// the step is declared a breakdown when the candidate direction satisfies
// ||w|| <= breakdown_tol * op_norm_est.
inline ArnoldiDecomposition arnoldi(const LinearOperator& op, const Vector& b,
                                    int steps, double breakdown_tol = 1e-12) {
  const Eigen::Index n = op.dim();
  if (b.size() != n) throw std::invalid_argument("arnoldi: b has wrong dimension");
  if (!b.allFinite()) throw std::invalid_argument("arnoldi: non-finite b");
  if (steps < 1) throw std::invalid_argument("arnoldi: steps must be >= 1");
  if (steps >= n) throw std::invalid_argument("arnoldi: steps must be < dimension");
  if (breakdown_tol < 0) throw std::invalid_argument("arnoldi: negative breakdown tolerance");
  const double bnorm = b.norm();
  if (bnorm == 0.0) throw std::invalid_argument("arnoldi: b is the zero vector");

  ArnoldiDecomposition d;
  d.requested_steps = steps;
  d.V = Matrix::Zero(n, steps + 1);
  d.H = Matrix::Zero(steps + 1, steps);
  d.V.col(0) = b / bnorm;

  Vector norm_probe;
  for (int j = 0; j < steps; ++j) {
    Vector w = op.apply(d.V.col(j));
    auto Vj = d.V.leftCols(j + 1);
    Vector h = Vj.transpose() * w;
    w.noalias() -= Vj * h;
    Vector h2 = Vj.transpose() * w;
    w.noalias() -= Vj * h2;
    h += h2;
    d.H.col(j).head(j + 1) = h;

    const double beta = w.norm();
    const double est = detail::refresh_norm_estimate(
        d.H.topLeftCorner(j + 2, j + 1), norm_probe);
    d.op_norm_est = std::max(d.op_norm_est, est);

    if (beta <= breakdown_tol * d.op_norm_est) {
      d.completed_steps = j + 1;
      d.breakdown = true;
      d.V.conservativeResize(n, j + 1);
      d.H.conservativeResize(j + 1, j + 1);
      return d;
    }
    d.H(j + 1, j) = beta;
    d.V.col(j + 1) = w / beta;
  }
  d.completed_steps = steps;
  return d;
}

// Leading ell-step decomposition extracted from a longer run. The Arnoldi
// recursion is nested, so this equals what arnoldi(op, b, ell) would have
// produced (op_norm_est is re-estimated for the smaller block). If the
// source broke down before ell steps, the breakdown decomposition itself is
// returned.
inline ArnoldiDecomposition truncated(const ArnoldiDecomposition& d, int ell) {
  if (ell < 1) throw std::invalid_argument("truncated: ell must be >= 1");
  if (ell >= d.completed_steps) return d;
  ArnoldiDecomposition t;
  t.requested_steps = ell;
  t.completed_steps = ell;
  t.breakdown = false;
  t.V = d.V.leftCols(ell + 1);
  t.H = d.H.topLeftCorner(ell + 1, ell);
  Vector probe;
  t.op_norm_est = detail::refresh_norm_estimate(t.H, probe, 20);
  return t;
}

}  // namespace iat
