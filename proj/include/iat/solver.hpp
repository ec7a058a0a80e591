#pragma once

#include <optional>
#include <stdexcept>
#include <variant>

#include "iat/selection.hpp"

namespace iat {

// Filtered coefficients of the i-times-iterated Tikhonov solve in the
// right-singular basis of the projected operator:
//
//   c_j = (1 - (alpha / (sigma_j^2 + alpha))^i) * uty_j / sigma_j
//
// The power is evaluated as exp(i * (ln alpha - ln(sigma_j^2 + alpha))) so
// iteration counts in the hundreds neither overflow nor underflow. Zero
// singular values receive coefficient zero, consistent with the rank
// truncation of the projected data.
inline Vector it_filter_coeffs(const Vector& sigma, const Vector& uty, double alpha,
                               int i) {
  if (alpha <= 0.0) throw std::invalid_argument("it_filter_coeffs: alpha must be > 0");
  if (i < 1) throw std::invalid_argument("it_filter_coeffs: i must be >= 1");
  if (uty.size() < sigma.size())
    throw std::invalid_argument("it_filter_coeffs: uty shorter than sigma");
  const Eigen::Index m = sigma.size();
  const double la = std::log(alpha);
  Vector c = Vector::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double s = sigma[j];
    if (s <= 0.0) continue;
    const double ri = std::exp(static_cast<double>(i) * (la - std::log(s * s + alpha)));
    c[j] = (1.0 - ri) * uty[j] / s;
  }
  return c;
}

// Independent oracle for the same coefficients: the stationary iteration
//
//   z_k = z_{k-1} + (H^T H + alpha I)^{-1} H^T (y_proj - H z_{k-1}),  z_0 = 0
//
// run for i steps. Algebraically identical to the filter form; kept as a
// brute-force cross-check, not a production path.
inline Vector it_recurrence_coeffs(const Matrix& H, const Vector& y_proj, double alpha,
                                   int i) {
  if (alpha <= 0.0) throw std::invalid_argument("it_recurrence_coeffs: alpha must be > 0");
  if (i < 1) throw std::invalid_argument("it_recurrence_coeffs: i must be >= 1");
  if (y_proj.size() != H.rows())
    throw std::invalid_argument("it_recurrence_coeffs: y_proj does not match H");
  const Eigen::Index m = H.cols();
  Matrix A = H.transpose() * H;
  A.diagonal().array() += alpha;
  Eigen::LLT<Matrix> llt(A);
  Vector z = Vector::Zero(m);
  for (int k = 0; k < i; ++k) {
    const Vector r = y_proj - H * z;
    z += llt.solve(H.transpose() * r);
  }
  return z;
}

// How the regularization strength is chosen for a solve: an explicit value,
// or one of the a posteriori selection rules.
struct ManualAlpha {
  double alpha;
};
using AlphaSource = std::variant<ManualAlpha, SelectionRule>;

struct IatSolution {
  Vector z;  // projected coefficients
  Vector x;  // lifted solution, x = V_m * z
  double alpha = 0.0;
  int iterations = 0;
  int ell = 0;
  enum class Rule { manual, r1, r2 } rule_used = Rule::manual;
  struct Diagnostics {
    std::optional<double> rhs;       // selection target (rule solves only)
    std::optional<double> residual;  // |phi(alpha) - rhs| at the returned alpha
    std::optional<double> h_ell;     // subspace-gap bound used by R2
    std::optional<double> d_ell;     // filled by the harness when x_true is known
    int q = 0;
  } diagnostics;
};

// One full solve: Arnoldi projection, SVD of the projected operator,
// parameter selection (or the supplied alpha), filtered coefficients, lift.
// `delta` is the noise-norm bound; it is required (> 0) whenever a selection
// rule is the alpha source and ignored for manual alpha. A rule R2 source
// with negative h_ell requests the built-in gap estimate.
// Rule inapplicability propagates as RuleInapplicableError without
// computing a solution.
inline IatSolution iat_solve(const LinearOperator& op, const Vector& y_delta, int ell,
                             int i, const AlphaSource& source, double delta = 0.0) {
  if (i < 1) throw std::invalid_argument("iat_solve: i must be >= 1");
  ArnoldiDecomposition dec = arnoldi(op, y_delta, ell);
  const int m = dec.completed_steps;
  const Vector y_proj = dec.V.transpose() * y_delta;
  const HessenbergSVD svd = decompose(dec.H, y_proj);

  IatSolution sol;
  sol.iterations = i;
  sol.ell = ell;
  sol.diagnostics.q = svd.q;

  if (const auto* manual = std::get_if<ManualAlpha>(&source)) {
    if (manual->alpha <= 0.0) throw std::invalid_argument("iat_solve: alpha must be > 0");
    sol.alpha = manual->alpha;
    sol.rule_used = IatSolution::Rule::manual;
  } else {
    SelectionRule rule = std::get<SelectionRule>(source);
    if (delta <= 0.0)
      throw std::invalid_argument("iat_solve: rule-based selection needs a positive delta");
    if (rule.kind == SelectionRule::Kind::R2 && rule.h_ell < 0.0)
      rule.h_ell = estimate_h(op, dec);
    const double rhs = rhs_for(rule, delta);
    const SelectionResult sel = select_alpha(svd, i, rhs);
    sol.alpha = sel.alpha;
    sol.rule_used = rule.kind == SelectionRule::Kind::R1 ? IatSolution::Rule::r1
                                                         : IatSolution::Rule::r2;
    sol.diagnostics.rhs = rhs;
    sol.diagnostics.residual = sel.residual;
    if (rule.kind == SelectionRule::Kind::R2) sol.diagnostics.h_ell = rule.h_ell;
  }

  const Vector c = it_filter_coeffs(svd.sigma, svd.y_hat.head(svd.sigma.size()),
                                    sol.alpha, i);
  sol.z = svd.S * c;
  sol.x = dec.V.leftCols(m) * sol.z;
  return sol;
}

}  // namespace iat
