#pragma once

#include <Eigen/Cholesky>

#include <utility>
#include <vector>

#include "tctf/tensor.hpp"

namespace tctf {

// The (m-1) x m first-difference matrix Toeplitz(0, 1, -1): row i has +1 at
// column i and -1 at column i+1. Both the temporal-stability operator and
// the periodicity operator are instances of it.
class ToeplitzDiff {
 public:
  explicit ToeplitzDiff(Index m);

  Index rows() const { return m_ - 1; }
  Index cols() const { return m_; }

  Matrix dense() const;

  // D^T D * X via the tridiagonal stencil. Works for real and complex X.
  template <typename Derived>
  typename Derived::PlainObject gram_apply(const Eigen::MatrixBase<Derived>& x) const;

 private:
  Index m_;
};

// ||D * M||_F^2 where D differences adjacent rows of M. Zero when M has a
// single row.
double row_diff_squared_norm(const Matrix& m);
double row_diff_squared_norm(const CMatrix& m);

// ||M * D^T||_F^2: differences adjacent columns. Zero for a single column.
double col_diff_squared_norm(const Matrix& m);
double col_diff_squared_norm(const CMatrix& m);

// The shifted Gram operator c*I_m + rho * D^T D, symmetric positive
// definite for c > 0, rho >= 0. m = 1 degenerates to the scalar c (no
// differences exist). Applications and solves are cached-factorization
// based: dense Cholesky for small m, a tridiagonal LDL^T beyond.
class ShiftedGram {
 public:
  ShiftedGram(Index m, double shift, double rho);

  Index size() const { return m_; }
  double shift() const { return shift_; }
  double rho() const { return rho_; }

  Matrix dense() const;

  // (c*I + rho*D^T D) * X.
  Matrix apply(const Matrix& x) const;
  CMatrix apply(const CMatrix& x) const;

  // Solves (c*I + rho*D^T D) * X = B.
  Matrix solve(const Matrix& b) const;
  CMatrix solve(const CMatrix& b) const;

  // Analytic envelope (c, c + 4*rho) containing every eigenvalue
  // (Gerschgorin bound on D^T D).
  std::pair<double, double> spectral_bounds() const { return {shift_, shift_ + 4.0 * rho_}; }

  // Exact largest eigenvalue: c + rho * (2 - 2*cos(pi*(m-1)/m)).
  double operator_norm() const;

 private:
  template <typename MatrixType>
  MatrixType apply_impl(const MatrixType& x) const;
  template <typename MatrixType>
  MatrixType solve_impl(const MatrixType& x) const;

  Index m_;
  double shift_;
  double rho_;
  bool dense_path_;
  Matrix dense_op_;                 // dense path only
  Eigen::LLT<Matrix> llt_;          // dense path only
  std::vector<double> ldl_d_;       // tridiagonal LDL^T factors
  std::vector<double> ldl_l_;
};

}  // namespace tctf
