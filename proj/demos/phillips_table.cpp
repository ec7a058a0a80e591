// Benchmark table demo: the smooth-deconvolution problem at n = 1000 with
// one percent noise, both selection rules across projection levels and
// iteration counts, rendered as a markdown table on stdout. Cells where a
// rule declines show "-" with the reason column explaining why.

#include <iostream>

#include "iat/iat.hpp"

int main() {
  iat::BenchConfig cfg;
  cfg.problem = "phillips";
  cfg.n = 1000;
  cfg.xi = 0.01;
  cfg.seed = 11;
  cfg.ells = {5, 10, 30};
  cfg.iters = {1, 50, 100};

  const auto rep = iat::run_bench(cfg);
  std::cout << iat::to_markdown(rep);
  return 0;
}
