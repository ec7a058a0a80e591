#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "iat/krylov.hpp"
#include "iat/problems.hpp"
#include "iat/rates.hpp"
#include "iat/report.hpp"
#include "iat/selection.hpp"
#include "iat/solver.hpp"
#include "iat/spectral.hpp"
#include "iat/version.hpp"

namespace iat {

// Worker cap for the (problem, ell) grid; IAT_THREADS overrides the
// hardware count.
inline int thread_budget() {
  if (const char* env = std::getenv("IAT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1)
      return static_cast<int>(std::min<long>(v, 256));
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Name-based constructor used by the CLI and the harness. `n` is the grid
// size for the one-dimensional problems and the image side for blur (the
// operator then acts on side^2 pixels).
inline TestProblem make_problem(const std::string& name, Eigen::Index n) {
  if (name == "phillips") return make_phillips(n);
  if (name == "shaw") return make_shaw(n);
  if (name == "blur") return make_blur(static_cast<int>(n));
  throw std::invalid_argument("unknown problem '" + name + "' (expected phillips, shaw, or blur)");
}

struct BenchConfig {
  std::string problem = "phillips";
  Eigen::Index n = 1000;  // blur: image side
  double xi = 0.01;
  std::uint64_t seed = 11;
  std::vector<int> ells;
  std::vector<int> iters;
  std::vector<std::string> rules = {"R1", "R2"};
  double tau = 1.0;
};

namespace detail {

inline void validate_bench(const BenchConfig& cfg) {
  if (cfg.ells.empty()) throw std::invalid_argument("bench: ell list is empty");
  if (cfg.iters.empty()) throw std::invalid_argument("bench: iteration list is empty");
  if (cfg.rules.empty()) throw std::invalid_argument("bench: rule list is empty");
  if (!(cfg.xi > 0.0 && cfg.xi < 1.0))
    throw std::invalid_argument("bench: xi must lie in (0, 1)");
  for (int ell : cfg.ells)
    if (ell < 1) throw std::invalid_argument("bench: ell values must be >= 1");
  for (int i : cfg.iters)
    if (i < 1) throw std::invalid_argument("bench: iteration counts must be >= 1");
  for (const std::string& r : cfg.rules)
    if (r != "R1" && r != "R2")
      throw std::invalid_argument("bench: unknown rule '" + r + "'");
}

}  // namespace detail

// Full benchmark grid: one Krylov decomposition per requested ell (all of
// them truncations of a single longest run), reused across every iteration
// count and rule. Distinct ell cells run on separate threads; rows come out
// in the deterministic (ell, i, rule) config order regardless of scheduling.
inline ExperimentReport run_bench(const BenchConfig& cfg) {
  detail::validate_bench(cfg);
  const TestProblem problem = make_problem(cfg.problem, cfg.n);
  const NoisyInstance inst = add_noise(problem, cfg.xi, cfg.seed);
  const double delta = inst.delta;
  const double x_norm = problem.x_true.norm();
  const LinearOperator& op = *problem.op;

  int max_ell = *std::max_element(cfg.ells.begin(), cfg.ells.end());
  max_ell = static_cast<int>(std::min<Eigen::Index>(max_ell, problem.n - 1));
  const ArnoldiDecomposition full = arnoldi(op, inst.y_delta, max_ell);

  const bool want_r2 =
      std::find(cfg.rules.begin(), cfg.rules.end(), "R2") != cfg.rules.end();

  std::vector<std::vector<ReportRow>> slots(cfg.ells.size());

  auto process_ell = [&](std::size_t idx) {
    const int ell = cfg.ells[idx];
    const ArnoldiDecomposition dec =
        truncated(full, std::min(ell, full.completed_steps));
    const int m = dec.completed_steps;
    const Vector y_proj = dec.V.transpose() * inst.y_delta;
    const HessenbergSVD svd = decompose(dec.H, y_proj);
    const double d_ell = d_metric(op, dec, svd, problem.x_true);
    std::optional<double> h_ell;
    if (want_r2) h_ell = estimate_h(op, dec);

    for (int i : cfg.iters) {
      for (const std::string& rule_name : cfg.rules) {
        ReportRow row;
        row.problem = cfg.problem;
        row.n = static_cast<long long>(problem.n);
        row.xi = cfg.xi;
        row.seed = cfg.seed;
        row.ell = ell;
        row.d_ell = d_ell;
        row.i = i;
        row.rule = rule_name;
        const auto t0 = std::chrono::steady_clock::now();
        try {
          SelectionRule rule = rule_name == "R1" ? SelectionRule::r1(cfg.tau)
                                                 : SelectionRule::r2(x_norm, *h_ell);
          if (rule.kind == SelectionRule::Kind::R2) row.h_ell = rule.h_ell;
          const SelectionResult sel = select_alpha(svd, i, rhs_for(rule, delta));
          const Vector c = it_filter_coeffs(
              svd.sigma, svd.y_hat.head(svd.sigma.size()), sel.alpha, i);
          const Vector x = dec.V.leftCols(m) * (svd.S * c);
          row.alpha = sel.alpha;
          row.rel_err = relative_error(problem.x_true, x);
        } catch (const RuleInapplicableError& err) {
          row.reason = to_string(err.reason);
        }
        row.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0).count();
        slots[idx].push_back(std::move(row));
      }
    }
  };

  const int budget = std::min<int>(thread_budget(), static_cast<int>(cfg.ells.size()));
  if (budget <= 1) {
    for (std::size_t idx = 0; idx < cfg.ells.size(); ++idx) process_ell(idx);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(budget));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(budget));
    for (int t = 0; t < budget; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= slots.size()) break;
            process_ell(idx);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  ExperimentReport rep;
  rep.meta = {NormalSampler::name(), cfg.seed, library_version};
  for (auto& slot : slots)
    for (auto& row : slot) rep.rows.push_back(std::move(row));
  return rep;
}

// ---- alpha sweep (error curve plus the rules' picks) ----

struct SweepConfig {
  std::string problem = "phillips";
  Eigen::Index n = 1000;  // blur: image side
  double xi = 0.01;
  std::uint64_t seed = 11;
  int ell = 10;
  int i = 1;
  double alpha_min = 1e-8;
  double alpha_max = 1e2;
  int points = 200;
  double tau = 1.0;
};

struct SweepRow {
  double alpha = 0.0;
  double rel_err = 0.0;
  std::string marker;  // empty for grid rows, else the rule that chose alpha
};

struct SweepResult {
  ReportMeta meta;
  std::vector<SweepRow> rows;
};

// One decomposition, one SVD, then the whole error curve: each grid alpha
// costs only a filtered solve in the projected space. Marker rows for the
// two rules are appended after the grid when the rules apply; an
// inapplicable rule simply contributes no marker.
inline SweepResult run_sweep(const SweepConfig& cfg) {
  if (!(cfg.xi > 0.0 && cfg.xi < 1.0))
    throw std::invalid_argument("sweep: xi must lie in (0, 1)");
  if (cfg.ell < 1) throw std::invalid_argument("sweep: ell must be >= 1");
  if (cfg.i < 1) throw std::invalid_argument("sweep: i must be >= 1");
  if (!(cfg.alpha_min > 0.0) || !(cfg.alpha_max > cfg.alpha_min))
    throw std::invalid_argument("sweep: need 0 < alpha_min < alpha_max");
  if (cfg.points < 2) throw std::invalid_argument("sweep: need at least 2 grid points");

  const TestProblem problem = make_problem(cfg.problem, cfg.n);
  const NoisyInstance inst = add_noise(problem, cfg.xi, cfg.seed);
  const double delta = inst.delta;
  const LinearOperator& op = *problem.op;

  const int ell = static_cast<int>(std::min<Eigen::Index>(cfg.ell, problem.n - 1));
  const ArnoldiDecomposition dec = arnoldi(op, inst.y_delta, ell);
  const int m = dec.completed_steps;
  const Vector y_proj = dec.V.transpose() * inst.y_delta;
  const HessenbergSVD svd = decompose(dec.H, y_proj);

  auto solve_at = [&](double alpha) {
    const Vector c = it_filter_coeffs(svd.sigma, svd.y_hat.head(svd.sigma.size()),
                                      alpha, cfg.i);
    const Vector x = dec.V.leftCols(m) * (svd.S * c);
    return relative_error(problem.x_true, x);
  };

  SweepResult out;
  out.meta = {NormalSampler::name(), cfg.seed, library_version};
  const double la = std::log(cfg.alpha_min);
  const double lb = std::log(cfg.alpha_max);
  for (int k = 0; k < cfg.points; ++k) {
    const double alpha =
        std::exp(la + (lb - la) * static_cast<double>(k) / (cfg.points - 1));
    out.rows.push_back({alpha, solve_at(alpha), ""});
  }

  auto try_marker = [&](const SelectionRule& rule) {
    try {
      const SelectionResult sel = select_alpha(svd, cfg.i, rhs_for(rule, delta));
      out.rows.push_back({sel.alpha, solve_at(sel.alpha), rule.name()});
    } catch (const RuleInapplicableError&) {
      // no marker for this rule
    }
  };
  try_marker(SelectionRule::r1(cfg.tau));
  try_marker(SelectionRule::r2(problem.x_true.norm(), estimate_h(op, dec)));
  return out;
}

inline std::string sweep_to_csv(const SweepResult& r) {
  std::string out;
  out += "# generator: " + r.meta.generator + "\n";
  out += "# seed: " + std::to_string(r.meta.seed) + "\n";
  out += "# version: " + r.meta.version + "\n";
  out += "alpha,rel_err,marker\n";
  for (const SweepRow& row : r.rows)
    out += format_sci(row.alpha) + "," + format_sci(row.rel_err) + "," + row.marker + "\n";
  return out;
}

// Companion plain-text note describing how to plot a sweep CSV.
inline std::string sweep_axes_note() {
  return
      "x: alpha (logarithmic scale)\n"
      "y: rel_err (logarithmic scale)\n"
      "rows with a nonempty marker column are the alpha values picked by the\n"
      "selection rules; draw them as highlighted points on the same curve.\n";
}

// ---- rate experiment serialization ----

inline ExperimentReport run_rates(const RateExperimentConfig& cfg) {
  const RateResult res = measure_rate(cfg);
  ExperimentReport rep;
  rep.rate_columns = true;
  rep.meta = {NormalSampler::name(), cfg.seed, library_version};
  for (const RatePoint& pt : res.points) {
    ReportRow row;
    row.problem = cfg.problem.name;
    row.n = static_cast<long long>(cfg.problem.n);
    row.xi = pt.xi;
    row.seed = cfg.seed;
    if (pt.ell >= 1) row.ell = pt.ell;
    row.i = cfg.i;
    row.rule = "R1";
    if (std::isfinite(pt.alpha)) row.alpha = pt.alpha;
    if (std::isfinite(pt.rel_err)) row.rel_err = pt.rel_err;
    if (std::isfinite(pt.h_ell)) row.h_ell = pt.h_ell;
    row.reason = pt.reason;
    row.wall_ms = pt.wall_ms;
    if (std::isfinite(res.slope_fit)) row.slope_fit = res.slope_fit;
    row.slope_theory = res.slope_theory;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace iat
