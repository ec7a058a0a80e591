#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "iat/operator.hpp"
#include "iat/rng.hpp"

namespace iat {

// A benchmark instance: the operator, the discretized exact solution, and
// the clean data y_clean = T x_true (always constructed through the
// operator, never sampled independently). For the deblurring problem n is
// the flattened pixel count side^2 and image_side records the image side.
struct TestProblem {
  std::shared_ptr<const LinearOperator> op;
  Vector x_true;
  Vector y_clean;
  std::string name;
  Eigen::Index n = 0;
  int image_side = 0;
};

// y_clean perturbed to a prescribed relative noise level:
// ||y_delta - y_clean|| = delta = xi * ||y_clean|| exactly (post-scaling).
struct NoisyInstance {
  TestProblem problem;
  Vector y_delta;
  double delta = 0.0;
  double xi = 0.0;
  std::uint64_t seed = 0;
};

inline double relative_error(const Vector& x_true, const Vector& x) {
  if (x_true.size() != x.size())
    throw std::invalid_argument("relative_error: dimension mismatch");
  const double n0 = x_true.norm();
  if (n0 == 0.0) throw std::invalid_argument("relative_error: x_true is zero");
  return (x_true - x).norm() / n0;
}

// ---- one-dimensional deconvolution test problem (hat-shaped kernel) ----

// Kernel/solution profile: 1 + cos(pi t / 3) on |t| < 3, zero outside.
inline double phillips_solution(double t) {
  return std::abs(t) < 3.0 ? 1.0 + std::cos(M_PI * t / 3.0) : 0.0;
}

// Closed-form data for the profile above convolved with itself over [-6, 6].
inline double phillips_data(double s) {
  const double a = std::abs(s);
  return (6.0 - a) * (1.0 + 0.5 * std::cos(M_PI * s / 3.0)) +
         9.0 / (2.0 * M_PI) * std::sin(M_PI * a / 3.0);
}

// Quadrature discretization on [-6, 6] with n trapezoid nodes: the kernel is
// evaluated on the grid and the composite-trapezoid weights are folded into
// the matrix columns, so applying T is applying the quadrature rule.
inline TestProblem make_phillips(Eigen::Index n) {
  if (n < 3) throw std::invalid_argument("make_phillips: n must be >= 3");
  const double h = 12.0 / static_cast<double>(n - 1);
  Vector s(n);
  for (Eigen::Index j = 0; j < n; ++j) s[j] = -6.0 + h * static_cast<double>(j);
  Vector w = Vector::Constant(n, h);
  w[0] = w[n - 1] = h / 2.0;

  Matrix T(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k)
      T(j, k) = w[k] * phillips_solution(s[j] - s[k]);

  TestProblem p;
  p.op = std::make_shared<DenseOperator>(std::move(T), "phillips");
  p.x_true = s.unaryExpr([](double t) { return phillips_solution(t); });
  p.y_clean = p.op->apply(p.x_true);
  p.name = "phillips";
  p.n = n;
  return p;
}

// ---- one-dimensional instrument-response test problem ----

// The classical pair of Gaussian humps.
inline double shaw_solution(double t) {
  return 2.0 * std::exp(-6.0 * (t - 0.8) * (t - 0.8)) +
         std::exp(-2.0 * (t + 0.5) * (t + 0.5));
}

// Midpoint-rule discretization on [-pi/2, pi/2] of the kernel
//   k(s, t) = (cos s + cos t)^2 * (sin(u)/u)^2,  u = pi (sin s + sin t),
// with the removable singularity sin(u)/u -> 1 at u = 0.
inline TestProblem make_shaw(Eigen::Index n) {
  if (n < 3) throw std::invalid_argument("make_shaw: n must be >= 3");
  if (n % 2 != 0) throw std::invalid_argument("make_shaw: n must be even");
  const double h = M_PI / static_cast<double>(n);
  Vector t(n);
  for (Eigen::Index j = 0; j < n; ++j)
    t[j] = -M_PI / 2.0 + (static_cast<double>(j) + 0.5) * h;

  Matrix A(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      const double u = M_PI * (std::sin(t[r]) + std::sin(t[c]));
      const double sinc = u == 0.0 ? 1.0 : std::sin(u) / u;
      const double base = (std::cos(t[r]) + std::cos(t[c])) * sinc;
      A(r, c) = h * base * base;
    }
  }

  TestProblem p;
  p.op = std::make_shared<DenseOperator>(std::move(A), "shaw");
  p.x_true = t.unaryExpr([](double tt) { return shaw_solution(tt); });
  p.y_clean = p.op->apply(p.x_true);
  p.name = "shaw";
  p.n = n;
  return p;
}

// ---- two-dimensional Gaussian deblurring ----

// Matrix-free separable Gaussian blur on side x side images flattened
// column-major: x -> vec(A X A) / (2 pi sigma^2) with A the banded symmetric
// Toeplitz factor whose first row is exp(-j^2 / (2 sigma^2)) for j < band.
// A is symmetric, so the operator is self-adjoint.
class BlurOperator final : public LinearOperator {
 public:
  BlurOperator(int side, int band, double sigma)
      : LinearOperator(static_cast<Eigen::Index>(side) * side, "blur"),
        side_(side),
        scale_(1.0 / (2.0 * M_PI * sigma * sigma)) {
    if (band < 1 || band > side) throw std::invalid_argument("BlurOperator: need side >= band >= 1");
    if (sigma <= 0.0) throw std::invalid_argument("BlurOperator: sigma must be > 0");
    A_ = Matrix::Zero(side, side);
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c) {
        const int j = std::abs(r - c);
        if (j < band) A_(r, c) = std::exp(-0.5 * j * j / (sigma * sigma));
      }
  }

  const Matrix& factor() const { return A_; }

 private:
  Vector do_apply(const Vector& x) const override {
    Eigen::Map<const Matrix> X(x.data(), side_, side_);
    Matrix Y = scale_ * (A_ * X * A_);
    return Eigen::Map<const Vector>(Y.data(), Y.size());
  }
  Vector do_apply_adjoint(const Vector& y) const override { return do_apply(y); }

  int side_;
  double scale_;
  Matrix A_;
};

// Built-in deterministic test image: a bright off-axis disc inside a dim
// diamond inside a mid-gray ring, on a black background. Chosen so the
// restored shapes are recognizable at small sides.
inline Vector blur_test_image(int side) {
  const double c = (side - 1) / 2.0;
  Vector x = Vector::Zero(static_cast<Eigen::Index>(side) * side);
  for (int col = 0; col < side; ++col) {
    for (int row = 0; row < side; ++row) {
      const double dr = row - c, dc = col - c;
      const double r = std::sqrt(dr * dr + dc * dc);
      const double d1 = std::abs(dr) + std::abs(dc);
      double v = 0.0;
      if (r >= 0.34 * side && r <= 0.42 * side) v = 0.6;
      if (d1 <= 0.28 * side) v = 0.3;
      if (r <= 0.12 * side) v = 1.0;
      x[row + static_cast<Eigen::Index>(col) * side] = v;
    }
  }
  return x;
}

inline TestProblem make_blur(int side, int band = 3, double sigma = 0.7) {
  if (side < 3) throw std::invalid_argument("make_blur: side must be >= 3");
  auto op = std::make_shared<BlurOperator>(side, band, sigma);
  TestProblem p;
  p.x_true = blur_test_image(side);
  p.y_clean = op->apply(p.x_true);
  p.op = std::move(op);
  p.name = "blur";
  p.n = static_cast<Eigen::Index>(side) * side;
  p.image_side = side;
  return p;
}

// ---- noise model ----

// y + delta * e / ||e|| with e standard normal from the given seed, so the
// perturbation norm is delta exactly. A zero-norm draw (probability zero,
// but the contract covers it) retries on seed+1, seed+2, then errors.
inline Vector perturb(const Vector& y, double delta, std::uint64_t seed) {
  if (delta < 0.0) throw std::invalid_argument("perturb: delta must be >= 0");
  if (delta == 0.0) return y;
  for (std::uint64_t attempt = 0; attempt < 3; ++attempt) {
    NormalSampler rng(seed + attempt);
    const Vector e = rng.draw(y.size());
    const double en = e.norm();
    if (en > 0.0) return y + (delta / en) * e;
  }
  throw std::runtime_error("perturb: degenerate zero-norm noise draw");
}

inline NoisyInstance add_noise(const TestProblem& problem, double xi, std::uint64_t seed) {
  if (xi < 0.0) throw std::invalid_argument("add_noise: xi must be >= 0");
  if (xi > 0.0 && problem.y_clean.norm() == 0.0)
    throw std::invalid_argument("add_noise: y_clean is zero");
  NoisyInstance inst;
  inst.problem = problem;
  inst.xi = xi;
  inst.seed = seed;
  inst.delta = xi * problem.y_clean.norm();
  inst.y_delta = perturb(problem.y_clean, inst.delta, seed);
  return inst;
}

}  // namespace iat
