#include "tctf/regularizers.hpp"

#include <cmath>
#include <string>

namespace tctf {

namespace {
// Dense path pays off below this size; beyond it the tridiagonal stencil
// and LDL^T win on memory and cache.
constexpr Index kDensePathLimit = 64;
}  // namespace

ToeplitzDiff::ToeplitzDiff(Index m) : m_(m) {
  if (m < 2)
    throw ArgumentError("difference matrix needs m >= 2, got " + std::to_string(m));
}

Matrix ToeplitzDiff::dense() const {
  Matrix d = Matrix::Zero(m_ - 1, m_);
  for (Index i = 0; i < m_ - 1; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -1.0;
  }
  return d;
}

template <typename Derived>
typename Derived::PlainObject ToeplitzDiff::gram_apply(
    const Eigen::MatrixBase<Derived>& x) const {
  if (x.rows() != m_) throw ArgumentError("gram_apply: row count does not match");
  typename Derived::PlainObject out(x.rows(), x.cols());
  if (m_ == 1) {
    out.setZero();
    return out;
  }
  // D^T D = tridiag(-1, [1, 2, ..., 2, 1], -1)
  out.row(0) = x.row(0) - x.row(1);
  for (Index i = 1; i < m_ - 1; ++i)
    out.row(i) = 2.0 * x.row(i) - x.row(i - 1) - x.row(i + 1);
  out.row(m_ - 1) = x.row(m_ - 1) - x.row(m_ - 2);
  return out;
}

template Matrix ToeplitzDiff::gram_apply(const Eigen::MatrixBase<Matrix>&) const;
template CMatrix ToeplitzDiff::gram_apply(const Eigen::MatrixBase<CMatrix>&) const;

namespace {

template <typename MatrixType>
double diff_rows_sq(const MatrixType& m) {
  double acc = 0.0;
  for (Index i = 0; i + 1 < m.rows(); ++i) acc += (m.row(i) - m.row(i + 1)).squaredNorm();
  return acc;
}

template <typename MatrixType>
double diff_cols_sq(const MatrixType& m) {
  double acc = 0.0;
  for (Index j = 0; j + 1 < m.cols(); ++j) acc += (m.col(j) - m.col(j + 1)).squaredNorm();
  return acc;
}

}  // namespace

double row_diff_squared_norm(const Matrix& m) { return diff_rows_sq(m); }
double row_diff_squared_norm(const CMatrix& m) { return diff_rows_sq(m); }
double col_diff_squared_norm(const Matrix& m) { return diff_cols_sq(m); }
double col_diff_squared_norm(const CMatrix& m) { return diff_cols_sq(m); }

ShiftedGram::ShiftedGram(Index m, double shift, double rho)
    : m_(m), shift_(shift), rho_(rho), dense_path_(m <= kDensePathLimit) {
  if (m < 1) throw ArgumentError("shifted Gram operator needs m >= 1");
  if (shift <= 0.0) throw ArgumentError("shifted Gram operator needs a positive shift");
  if (rho < 0.0) throw ArgumentError("shifted Gram operator needs rho >= 0");

  if (dense_path_) {
    dense_op_ = dense();
    llt_.compute(dense_op_);
    if (llt_.info() != Eigen::Success)
      throw NumericError("shifted Gram factorization failed");
    return;
  }
  // Tridiagonal LDL^T: d_i and subdiagonal multiplier l_i.
  ldl_d_.resize(static_cast<std::size_t>(m_));
  ldl_l_.resize(static_cast<std::size_t>(m_ > 0 ? m_ - 1 : 0));
  auto diag = [&](Index i) {
    double t = (i == 0 || i == m_ - 1) ? 1.0 : 2.0;
    return shift_ + rho_ * t;
  };
  const double off = -rho_;
  ldl_d_[0] = diag(0);
  for (Index i = 1; i < m_; ++i) {
    double l = off / ldl_d_[static_cast<std::size_t>(i - 1)];
    ldl_l_[static_cast<std::size_t>(i - 1)] = l;
    ldl_d_[static_cast<std::size_t>(i)] = diag(i) - l * off;
  }
}

Matrix ShiftedGram::dense() const {
  Matrix op = shift_ * Matrix::Identity(m_, m_);
  if (m_ >= 2 && rho_ != 0.0) {
    for (Index i = 0; i < m_; ++i) {
      double t = (i == 0 || i == m_ - 1) ? 1.0 : 2.0;
      op(i, i) += rho_ * t;
      if (i + 1 < m_) {
        op(i, i + 1) -= rho_;
        op(i + 1, i) -= rho_;
      }
    }
  }
  return op;
}

template <typename MatrixType>
MatrixType ShiftedGram::apply_impl(const MatrixType& x) const {
  if (x.rows() != m_)
    throw ArgumentError("shifted Gram apply: got " + std::to_string(x.rows()) +
                        " rows, expected " + std::to_string(m_));
  if (m_ == 1 || rho_ == 0.0) return shift_ * x;
  if constexpr (std::is_same_v<MatrixType, Matrix>) {
    if (dense_path_) return dense_op_ * x;
  }
  MatrixType out(x.rows(), x.cols());
  out.row(0) = (shift_ + rho_) * x.row(0) - rho_ * x.row(1);
  for (Index i = 1; i < m_ - 1; ++i)
    out.row(i) = (shift_ + 2.0 * rho_) * x.row(i) - rho_ * (x.row(i - 1) + x.row(i + 1));
  out.row(m_ - 1) = (shift_ + rho_) * x.row(m_ - 1) - rho_ * x.row(m_ - 2);
  return out;
}

template <typename MatrixType>
MatrixType ShiftedGram::solve_impl(const MatrixType& b) const {
  if (b.rows() != m_)
    throw ArgumentError("shifted Gram solve: got " + std::to_string(b.rows()) +
                        " rows, expected " + std::to_string(m_));
  if (m_ == 1 || rho_ == 0.0) return b / shift_;
  if constexpr (std::is_same_v<MatrixType, Matrix>) {
    if (dense_path_) return llt_.solve(b);
  } else {
    if (dense_path_) {
      MatrixType out(b.rows(), b.cols());
      out.real() = llt_.solve(Matrix(b.real()));
      out.imag() = llt_.solve(Matrix(b.imag()));
      return out;
    }
  }
  // Tridiagonal LDL^T forward/backward sweeps.
  MatrixType y = b;
  for (Index i = 1; i < m_; ++i)
    y.row(i) -= ldl_l_[static_cast<std::size_t>(i - 1)] * y.row(i - 1);
  for (Index i = 0; i < m_; ++i) y.row(i) /= ldl_d_[static_cast<std::size_t>(i)];
  for (Index i = m_ - 2; i >= 0; --i)
    y.row(i) -= ldl_l_[static_cast<std::size_t>(i)] * y.row(i + 1);
  return y;
}

Matrix ShiftedGram::apply(const Matrix& x) const { return apply_impl(x); }
CMatrix ShiftedGram::apply(const CMatrix& x) const { return apply_impl(x); }
Matrix ShiftedGram::solve(const Matrix& b) const { return solve_impl(b); }
CMatrix ShiftedGram::solve(const CMatrix& b) const { return solve_impl(b); }

double ShiftedGram::operator_norm() const {
  if (m_ == 1) return shift_;
  // lambda_max(D^T D) = 2 - 2 cos(pi (m-1)/m) for the free-boundary stencil.
  const double pi = 3.14159265358979323846264338328;
  double lam = 2.0 - 2.0 * std::cos(pi * static_cast<double>(m_ - 1) / static_cast<double>(m_));
  return shift_ + rho_ * lam;
}

}  // namespace tctf
