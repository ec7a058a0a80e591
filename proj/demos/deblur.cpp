// Deblurring walkthrough: blur a synthetic test image, contaminate it with
// noise, reconstruct with the iterated solver under the noise-level rule,
// and drop the three stages as PGM images next to the binary.

#include <iostream>

#include "iat/iat.hpp"

int main() {
  const int side = 30;
  const auto problem = iat::make_blur(side);
  const auto inst = iat::add_noise(problem, 0.01, 11);

  std::cout << "image " << side << "x" << side << ", operator dimension "
            << problem.n << ", delta " << iat::format_sci(inst.delta) << "\n";

  const auto sol = iat::iat_solve(*problem.op, inst.y_delta, 100, 500,
                                  iat::SelectionRule::r1(), inst.delta);

  std::cout << "ell 100, 500 inner iterations\n"
            << "alpha   " << iat::format_sci(sol.alpha) << "\n"
            << "rel_err "
            << iat::format_sci(iat::relative_error(problem.x_true, sol.x)) << "\n";

  iat::write_pgm("deblur_true.pgm", problem.x_true, side);
  iat::write_pgm("deblur_observed.pgm", inst.y_delta, side);
  iat::write_pgm("deblur_restored.pgm", sol.x, side);
  std::cout << "wrote deblur_true.pgm, deblur_observed.pgm, deblur_restored.pgm\n";
  return 0;
}
