#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "iat/krylov.hpp"
#include "iat/operator.hpp"
#include "iat/problems.hpp"
#include "iat/rng.hpp"
#include "iat/selection.hpp"
#include "iat/solver.hpp"
#include "iat/spectral.hpp"

namespace iat {

// Noise-level sweep measuring the observed convergence order of the
// iterated scheme under the smoothness assumption x_true = (T^T T)^nu w
// with ||w|| = rho. For each noise norm delta the projection level ell is
// chosen so the subspace gap estimate is commensurate with delta, the
// problem is solved with the discrepancy rule at tau = 1, and the slope of
// log(error) versus log(delta) is fitted by least squares.
struct RateExperimentConfig {
  TestProblem problem;
  int nu = 1;                   // smoothness exponent, 0 or 1
  double rho = 1.0;             // norm given to the source element w
  int i = 1;                    // inner iteration count
  std::vector<double> deltas;   // strictly decreasing absolute noise norms
  std::uint64_t seed = 0;
  Eigen::Index ell_cap = 0;     // search limit for ell; 0 means n/2
  std::function<int(double)> ell_policy;  // optional delta -> ell override
};

struct RatePoint {
  double delta = 0.0;
  double xi = 0.0;  // delta relative to ||y_clean||
  int ell = 0;
  double h_ell = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double rel_err = std::numeric_limits<double>::quiet_NaN();
  bool matched = false;
  std::string reason;  // empty when the point entered the fit
  double wall_ms = 0.0;
};

struct RateResult {
  std::vector<RatePoint> points;
  double slope_fit = std::numeric_limits<double>::quiet_NaN();
  double slope_theory = 0.0;
  int matched_count = 0;
};

// x_true = w for nu = 0, x_true = T^T (T w) for nu = 1.
inline Vector make_source_solution(const LinearOperator& op, int nu, const Vector& w) {
  if (w.size() != op.dim())
    throw std::invalid_argument("make_source_solution: w has wrong dimension");
  if (w.norm() == 0.0)
    throw std::invalid_argument("make_source_solution: w must be nonzero");
  if (nu == 0) return w;
  if (nu == 1) return op.apply_adjoint(op.apply(w));
  throw std::invalid_argument("make_source_solution: nu must be 0 or 1");
}

inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    mx += x[j];
    my += y[j];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    num += (x[j] - mx) * (y[j] - my);
    den += (x[j] - mx) * (x[j] - mx);
  }
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return num / den;
}

inline RateResult measure_rate(const RateExperimentConfig& cfg) {
  if (!cfg.problem.op) throw std::invalid_argument("measure_rate: config has no operator");
  if (cfg.nu != 0 && cfg.nu != 1)
    throw std::invalid_argument("measure_rate: nu must be 0 or 1");
  if (cfg.rho <= 0.0) throw std::invalid_argument("measure_rate: rho must be > 0");
  if (cfg.i < 1) throw std::invalid_argument("measure_rate: i must be >= 1");
  if (cfg.deltas.empty()) throw std::invalid_argument("measure_rate: deltas is empty");
  for (std::size_t k = 0; k < cfg.deltas.size(); ++k) {
    if (!(cfg.deltas[k] > 0.0))
      throw std::invalid_argument("measure_rate: deltas must be positive");
    if (k > 0 && !(cfg.deltas[k] < cfg.deltas[k - 1]))
      throw std::invalid_argument("measure_rate: deltas must be strictly decreasing");
  }

  const LinearOperator& op = *cfg.problem.op;
  const Eigen::Index n = op.dim();

  NormalSampler source_rng(cfg.seed);
  Vector w = source_rng.draw(n);
  const double wn = w.norm();
  if (wn == 0.0) throw std::runtime_error("measure_rate: degenerate source draw");
  w *= cfg.rho / wn;
  const Vector x_true = make_source_solution(op, cfg.nu, w);
  if (x_true.norm() == 0.0)
    throw std::runtime_error("measure_rate: source solution is zero");
  const Vector y_clean = op.apply(x_true);
  const double y_norm = y_clean.norm();
  if (y_norm == 0.0) throw std::runtime_error("measure_rate: clean data is zero");

  // One decomposition seeded by the clean data serves the whole ell search;
  // each solve still builds its own space from its noisy right-hand side
  // (the discrepancy rule never consumes the gap estimate, so the search
  // and the solve stay consistent).
  Eigen::Index cap = cfg.ell_cap > 0 ? cfg.ell_cap : n / 2;
  cap = std::max<Eigen::Index>(1, std::min(cap, n - 1));
  const ArnoldiDecomposition full = arnoldi(op, y_clean, cap);
  const int reach = static_cast<int>(full.completed_steps);

  std::vector<double> h_memo(static_cast<std::size_t>(reach) + 1, -1.0);
  auto h_at = [&](int ell) {
    double& slot = h_memo[static_cast<std::size_t>(ell)];
    if (slot < 0.0) slot = estimate_h(op, truncated(full, ell));
    return slot;
  };
  auto band_scan = [&](double delta) -> int {
    for (int ell = 1; ell <= reach; ++ell) {
      const double h = h_at(ell);
      if (h >= delta / 3.0 && h <= 3.0 * delta) return ell;
    }
    return 0;
  };

  RateResult out;
  out.slope_theory = 2.0 * cfg.i / (2.0 * cfg.i + 1.0);

  for (std::size_t k = 0; k < cfg.deltas.size(); ++k) {
    const double delta = cfg.deltas[k];
    RatePoint pt;
    pt.delta = delta;
    pt.xi = delta / y_norm;
    const auto t0 = std::chrono::steady_clock::now();
    const int ell = cfg.ell_policy ? cfg.ell_policy(delta) : band_scan(delta);
    if (ell < 1 || ell > reach) {
      pt.reason = "h_ell_unmatched";
      pt.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0).count();
      out.points.push_back(std::move(pt));
      continue;
    }
    pt.ell = ell;
    pt.h_ell = h_at(ell);
    const Vector y_delta = perturb(y_clean, delta, cfg.seed + k + 1);
    try {
      const IatSolution sol =
          iat_solve(op, y_delta, ell, cfg.i, SelectionRule::r1(1.0), delta);
      pt.alpha = sol.alpha;
      pt.rel_err = relative_error(x_true, sol.x);
      pt.matched = true;
    } catch (const RuleInapplicableError& err) {
      pt.reason = to_string(err.reason);
    }
    pt.wall_ms = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - t0).count();
    out.points.push_back(std::move(pt));
  }

  std::vector<double> lx, ly;
  for (const RatePoint& pt : out.points) {
    if (!pt.matched) continue;
    lx.push_back(std::log(pt.delta));
    ly.push_back(std::log(pt.rel_err));
  }
  out.matched_count = static_cast<int>(lx.size());
  out.slope_fit = least_squares_slope(lx, ly);
  return out;
}

}  // namespace iat
