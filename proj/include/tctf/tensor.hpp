#pragma once

#include <Eigen/Core>

#include <vector>

#include "tctf/errors.hpp"

namespace tctf {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;

// Dense real third-order tensor, m1 x m2 x m3.
//
// Layout: frontal slices are contiguous and column-major, i.e.
// entry (i, j, k) lives at data[i + m1*j + m1*m2*k]. Frontal-slice
// extraction is therefore a zero-copy Eigen::Map.
class TrafficTensor {
 public:
  TrafficTensor() = default;

  // Zero tensor.
  TrafficTensor(Index m1, Index m2, Index m3);

  // Takes ownership of `data` (slice-major layout). Rejects wrong length
  // and non-finite entries.
  TrafficTensor(Index m1, Index m2, Index m3, std::vector<double> data);

  // Identity tensor: first frontal slice I_m, all other slices zero.
  static TrafficTensor identity(Index m, Index m3);

  Index m1() const { return m1_; }
  Index m2() const { return m2_; }
  Index m3() const { return m3_; }
  Index size() const { return m1_ * m2_ * m3_; }

  double operator()(Index i, Index j, Index k) const {
    return data_[i + m1_ * (j + m2_ * k)];
  }
  double& operator()(Index i, Index j, Index k) {
    return data_[i + m1_ * (j + m2_ * k)];
  }

  // Frontal slice A_k as an m1 x m2 view. k is 0-based.
  Eigen::Map<const Matrix> slice(Index k) const;
  Eigen::Map<Matrix> slice(Index k);

  const std::vector<double>& data() const { return data_; }
  double* raw() { return data_.data(); }
  const double* raw() const { return data_.data(); }

  double squared_norm() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  bool same_dims(const TrafficTensor& other) const {
    return m1_ == other.m1_ && m2_ == other.m2_ && m3_ == other.m3_;
  }

 private:
  void check_slice_index(Index k) const;

  Index m1_ = 0, m2_ = 0, m3_ = 0;
  std::vector<double> data_;
};

// Mode-1 unfolding [A_1, A_2, ..., A_m3] (m1 x m2*m3) or mode-2 unfolding
// [A_1^T, ..., A_m3^T] (m2 x m1*m3). Other modes are rejected.
Matrix unfold(const TrafficTensor& t, int mode);

// Inverse of unfold for the given mode and target dimensions.
TrafficTensor fold(const Matrix& m, int mode, Index m1, Index m2, Index m3);

// Block-circulant matrix (m1*m3 x m2*m3). Test oracle only: the solver
// never materializes it.
Matrix bcirc(const TrafficTensor& t);

// Stacked frontal slices [A_1; A_2; ...; A_m3] (m1*m3 x m2) and its inverse.
Matrix bvec(const TrafficTensor& t);
TrafficTensor bvfold(const Matrix& m, Index m1, Index m2, Index m3);

}  // namespace tctf
