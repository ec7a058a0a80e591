// Command-line front end: benchmark grids, alpha sweeps, noise-level rate
// sweeps, and single solves, all serialized through the report module.
//
// Exit codes: 0 success (including --help), 2 configuration or input errors,
// 3 when the requested selection rule applies nowhere (or no noise level in a
// rate sweep finds a matching projection level).

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "iat/iat.hpp"

namespace {

void emit(const std::string& content, const std::string& out_path,
          const std::string& label) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    iat::write_text_file(out_path, content);
    std::cout << "wrote " << label << " to " << out_path << "\n";
  }
}

std::string render(const iat::ExperimentReport& rep, const std::string& format) {
  if (format == "csv") return iat::to_csv(rep);
  if (format == "md" || format == "markdown") return iat::to_markdown(rep);
  throw std::invalid_argument("unknown format '" + format + "' (expected csv or md)");
}

int cmd_bench(const iat::BenchConfig& cfg, const std::string& out,
              const std::string& format) {
  const auto rep = iat::run_bench(cfg);
  emit(render(rep, format), out, "benchmark report");
  bool any_applicable = false;
  for (const auto& row : rep.rows) any_applicable |= row.alpha.has_value();
  if (!any_applicable) {
    std::cerr << "no benchmark cell had an applicable selection rule\n";
    return 3;
  }
  return 0;
}

int cmd_sweep(const iat::SweepConfig& cfg, const std::string& out) {
  const auto res = iat::run_sweep(cfg);
  emit(iat::sweep_to_csv(res), out, "alpha sweep");
  if (!out.empty()) {
    const std::string axes_path = out + ".axes.txt";
    iat::write_text_file(axes_path, iat::sweep_axes_note());
    std::cout << "wrote plotting note to " << axes_path << "\n";
  }
  return 0;
}

int cmd_rates(const std::string& problem, Eigen::Index n, int nu, double rho,
              int iters, const std::vector<double>& deltas, std::uint64_t seed,
              Eigen::Index ell_cap, const std::string& out,
              const std::string& format) {
  iat::RateExperimentConfig cfg;
  cfg.problem = iat::make_problem(problem, n);
  cfg.nu = nu;
  cfg.rho = rho;
  cfg.i = iters;
  cfg.deltas = deltas;
  cfg.seed = seed;
  cfg.ell_cap = ell_cap;

  const auto rep = iat::run_rates(cfg);
  emit(render(rep, format), out, "rate report");
  bool any_matched = false;
  for (const auto& row : rep.rows) any_matched |= row.rel_err.has_value();
  if (!any_matched) {
    std::cerr << "no noise level found a matching projection level\n";
    return 3;
  }
  return 0;
}

int cmd_solve(const std::string& problem_name, Eigen::Index n, double xi,
              std::uint64_t seed, int ell, int iters, const std::string& rule,
              double tau, std::optional<double> manual_alpha,
              const std::string& out) {
  const auto problem = iat::make_problem(problem_name, n);
  const auto inst = iat::add_noise(problem, xi, seed);

  iat::AlphaSource source = iat::SelectionRule::r1(tau);
  if (manual_alpha) {
    source = iat::ManualAlpha{*manual_alpha};
  } else if (rule == "R2") {
    source = iat::SelectionRule::r2_auto(problem.x_true.norm());
  } else if (rule != "R1") {
    throw std::invalid_argument("unknown rule '" + rule + "' (expected R1 or R2)");
  }

  const auto sol = iat::iat_solve(*problem.op, inst.y_delta, ell, iters, source,
                                  inst.delta);
  std::cout << "problem:   " << problem.name << " (n=" << problem.n << ")\n"
            << "noise:     xi=" << iat::format_sci(xi)
            << " delta=" << iat::format_sci(inst.delta) << "\n"
            << "ell:       " << sol.ell << " (rank " << sol.diagnostics.q << ")\n"
            << "iterations " << sol.iterations << "\n"
            << "alpha:     " << iat::format_sci(sol.alpha) << "\n"
            << "rel_err:   "
            << iat::format_sci(iat::relative_error(problem.x_true, sol.x)) << "\n";
  if (sol.diagnostics.h_ell)
    std::cout << "h_ell:     " << iat::format_sci(*sol.diagnostics.h_ell) << "\n";

  if (!out.empty()) {
    if (problem.image_side > 0) {
      iat::write_pgm(out, sol.x, problem.image_side);
      std::cout << "wrote reconstruction image to " << out << "\n";
    } else {
      std::string text;
      for (Eigen::Index k = 0; k < sol.x.size(); ++k)
        text += iat::format_sci(sol.x[k]) + "\n";
      iat::write_text_file(out, text);
      std::cout << "wrote reconstruction vector to " << out << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Krylov-projected iterated Tikhonov solver and benchmark harness"};
  app.set_version_flag("--version", std::string(iat::library_version));
  app.require_subcommand(0, 1);

  // bench
  auto* bench = app.add_subcommand("bench", "run the (ell, i, rule) benchmark grid");
  iat::BenchConfig bench_cfg;
  bench_cfg.ells = {5, 10, 30};
  bench_cfg.iters = {1, 50, 100};
  std::string bench_out, bench_format = "csv";
  bench->add_option("--problem", bench_cfg.problem,
                    "test problem: phillips, shaw, or blur");
  bench->add_option("--n", bench_cfg.n, "grid size (blur: image side)");
  bench->add_option("--xi", bench_cfg.xi, "relative noise level in (0,1)");
  bench->add_option("--seed", bench_cfg.seed, "noise seed");
  bench->add_option("--ell", bench_cfg.ells, "projection levels")->delimiter(',');
  bench->add_option("--iters", bench_cfg.iters, "inner iteration counts")
      ->delimiter(',');
  bench->add_option("--rules", bench_cfg.rules, "selection rules (R1,R2)")
      ->delimiter(',');
  bench->add_option("--tau", bench_cfg.tau, "discrepancy factor for R1 (>= 1)");
  bench->add_option("--out", bench_out, "output path (stdout when omitted)");
  bench->add_option("--format", bench_format, "csv or md");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "error curve over an alpha grid");
  iat::SweepConfig sweep_cfg;
  std::string sweep_out;
  sweep->add_option("--problem", sweep_cfg.problem,
                    "test problem: phillips, shaw, or blur");
  sweep->add_option("--n", sweep_cfg.n, "grid size (blur: image side)");
  sweep->add_option("--xi", sweep_cfg.xi, "relative noise level in (0,1)");
  sweep->add_option("--seed", sweep_cfg.seed, "noise seed");
  sweep->add_option("--ell", sweep_cfg.ell, "projection level");
  sweep->add_option("--iters", sweep_cfg.i, "inner iteration count");
  sweep->add_option("--alpha-min", sweep_cfg.alpha_min, "grid lower end");
  sweep->add_option("--alpha-max", sweep_cfg.alpha_max, "grid upper end");
  sweep->add_option("--points", sweep_cfg.points, "grid size (log-spaced)");
  sweep->add_option("--tau", sweep_cfg.tau, "discrepancy factor for R1 (>= 1)");
  sweep->add_option("--out", sweep_out, "output path (stdout when omitted)");

  // rates
  auto* rates = app.add_subcommand("rates",
                                   "observed error order under a noise sweep");
  std::string rates_problem = "phillips";
  Eigen::Index rates_n = 400;
  int rates_nu = 1, rates_iters = 1;
  double rates_rho = 1.0;
  std::vector<double> rates_deltas = {1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  std::uint64_t rates_seed = 11;
  Eigen::Index rates_cap = 0;
  std::string rates_out, rates_format = "csv";
  rates->add_option("--problem", rates_problem,
                    "test problem: phillips, shaw, or blur");
  rates->add_option("--n", rates_n, "grid size (blur: image side)");
  rates->add_option("--nu", rates_nu, "source smoothness exponent (0 or 1)");
  rates->add_option("--rho", rates_rho, "source element norm");
  rates->add_option("--iters", rates_iters, "inner iteration count");
  rates->add_option("--deltas", rates_deltas,
                    "absolute noise norms, strictly decreasing")
      ->delimiter(',');
  rates->add_option("--seed", rates_seed, "source and noise seed");
  rates->add_option("--ell-cap", rates_cap,
                    "largest projection level to scan (0: half the dimension)");
  rates->add_option("--out", rates_out, "output path (stdout when omitted)");
  rates->add_option("--format", rates_format, "csv or md");

  // solve
  auto* solve = app.add_subcommand("solve", "single solve with diagnostics");
  std::string solve_problem = "phillips";
  Eigen::Index solve_n = 1000;
  double solve_xi = 0.01, solve_tau = 1.0;
  std::uint64_t solve_seed = 11;
  int solve_ell = 10, solve_iters = 1;
  std::string solve_rule = "R1", solve_out;
  std::optional<double> solve_alpha;
  solve->add_option("--problem", solve_problem,
                    "test problem: phillips, shaw, or blur");
  solve->add_option("--n", solve_n, "grid size (blur: image side)");
  solve->add_option("--xi", solve_xi, "relative noise level in (0,1)");
  solve->add_option("--seed", solve_seed, "noise seed");
  solve->add_option("--ell", solve_ell, "projection level");
  solve->add_option("--iters", solve_iters, "inner iteration count");
  solve->add_option("--rule", solve_rule, "selection rule: R1 or R2");
  solve->add_option("--tau", solve_tau, "discrepancy factor for R1 (>= 1)");
  solve->add_option("--alpha", solve_alpha,
                    "fixed regularization strength (bypasses the rules)");
  solve->add_option("--out", solve_out,
                    "write the reconstruction (PGM image for blur, text otherwise)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (bench->parsed()) return cmd_bench(bench_cfg, bench_out, bench_format);
    if (sweep->parsed()) return cmd_sweep(sweep_cfg, sweep_out);
    if (rates->parsed())
      return cmd_rates(rates_problem, rates_n, rates_nu, rates_rho, rates_iters,
                       rates_deltas, rates_seed, rates_cap, rates_out,
                       rates_format);
    if (solve->parsed())
      return cmd_solve(solve_problem, solve_n, solve_xi, solve_seed, solve_ell,
                       solve_iters, solve_rule, solve_tau, solve_alpha,
                       solve_out);
    std::cout << app.help();
    return 0;
  } catch (const iat::RuleInapplicableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
