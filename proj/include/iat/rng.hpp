#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "iat/operator.hpp"

namespace iat {

// Deterministic standard-normal sampler: mt19937_64 with an explicit
// Box-Muller transform. std::normal_distribution is not pinned by the
// standard and differs between libstdc++ and libc++; rolling the transform
// by hand keeps seeded runs bitwise reproducible across toolchains.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  static constexpr const char* name() { return "mt19937_64/box-muller"; }

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite; u2 in [0, 1).
    const double u1 = 1.0 - unit();
    const double u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vector draw(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index k = 0; k < n; ++k) v[k] = next();
    return v;
  }

 private:
  // 53-bit uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace iat
