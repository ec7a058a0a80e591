#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace iat {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Square matrix-free linear operator with forward and adjoint products.
// The adjoint is mandatory: the subspace-gap estimator needs T* even though
// the Arnoldi process itself only uses T.
//
// Implementations must be pure functions of their input; operators are
// immutable after construction and shared across threads without locking.
// Non-finite inputs are rejected eagerly so NaNs cannot reach the scalar
// root finder downstream.
class LinearOperator {
 public:
  LinearOperator(Eigen::Index n, std::string label)
      : n_(n), label_(std::move(label)) {
    if (n_ <= 0) throw std::invalid_argument("operator dimension must be positive");
  }
  virtual ~LinearOperator() = default;

  Eigen::Index dim() const { return n_; }
  const std::string& label() const { return label_; }

  Vector apply(const Vector& x) const {
    check(x, "apply");
    return do_apply(x);
  }

  Vector apply_adjoint(const Vector& y) const {
    check(y, "apply_adjoint");
    return do_apply_adjoint(y);
  }

 private:
  virtual Vector do_apply(const Vector& x) const = 0;
  virtual Vector do_apply_adjoint(const Vector& y) const = 0;

  void check(const Vector& v, const char* what) const {
    if (v.size() != n_)
      throw std::invalid_argument(label_ + ": " + what + ": size " +
                                  std::to_string(v.size()) + " != " + std::to_string(n_));
    if (!v.allFinite())
      throw std::invalid_argument(label_ + ": " + what + ": non-finite input");
  }

  Eigen::Index n_;
  std::string label_;
};

// Dense-matrix adapter. Entries are stored column-major (Eigen's default);
// apply is a plain matrix-vector product, apply_adjoint uses the transpose.
class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(Matrix entries, std::string label = "dense")
      : LinearOperator(entries.rows(), std::move(label)), m_(std::move(entries)) {
    if (m_.rows() != m_.cols())
      throw std::invalid_argument("DenseOperator requires a square matrix");
  }

  const Matrix& matrix() const { return m_; }

 private:
  Vector do_apply(const Vector& x) const override { return m_ * x; }
  Vector do_apply_adjoint(const Vector& y) const override { return m_.transpose() * y; }

  Matrix m_;
};

}  // namespace iat
