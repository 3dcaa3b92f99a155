#include "tctf/tensor.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace tctf {

namespace {

void check_dims(Index m1, Index m2, Index m3) {
  if (m1 < 1 || m2 < 1 || m3 < 1)
    throw ArgumentError("tensor dimensions must be positive, got " + std::to_string(m1) +
                        "x" + std::to_string(m2) + "x" + std::to_string(m3));
}

}  // namespace

TrafficTensor::TrafficTensor(Index m1, Index m2, Index m3)
    : m1_(m1), m2_(m2), m3_(m3), data_(static_cast<std::size_t>(m1 * m2 * m3), 0.0) {
  check_dims(m1, m2, m3);
}

TrafficTensor::TrafficTensor(Index m1, Index m2, Index m3, std::vector<double> data)
    : m1_(m1), m2_(m2), m3_(m3), data_(std::move(data)) {
  check_dims(m1, m2, m3);
  if (static_cast<Index>(data_.size()) != m1 * m2 * m3)
    throw ArgumentError("tensor data length " + std::to_string(data_.size()) +
                        " does not match dims " + std::to_string(m1 * m2 * m3));
  if (!all_finite()) throw ArgumentError("tensor construction rejects NaN/Inf entries");
}

TrafficTensor TrafficTensor::identity(Index m, Index m3) {
  TrafficTensor t(m, m, m3);
  for (Index i = 0; i < m; ++i) t(i, i, 0) = 1.0;
  return t;
}

Eigen::Map<const Matrix> TrafficTensor::slice(Index k) const {
  check_slice_index(k);
  return {data_.data() + k * m1_ * m2_, m1_, m2_};
}

Eigen::Map<Matrix> TrafficTensor::slice(Index k) {
  check_slice_index(k);
  return {data_.data() + k * m1_ * m2_, m1_, m2_};
}

void TrafficTensor::check_slice_index(Index k) const {
  if (k < 0 || k >= m3_)
    throw std::out_of_range("frontal slice index " + std::to_string(k) +
                            " outside [0, " + std::to_string(m3_) + ")");
}

double TrafficTensor::squared_norm() const {
  double acc = 0.0;
  for (double v : data_) acc += v * v;
  return acc;
}

double TrafficTensor::frobenius_norm() const { return std::sqrt(squared_norm()); }

double TrafficTensor::max_abs() const {
  double acc = 0.0;
  for (double v : data_) acc = std::max(acc, std::abs(v));
  return acc;
}

bool TrafficTensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix unfold(const TrafficTensor& t, int mode) {
  if (mode == 1) {
    Matrix out(t.m1(), t.m2() * t.m3());
    for (Index k = 0; k < t.m3(); ++k) out.middleCols(k * t.m2(), t.m2()) = t.slice(k);
    return out;
  }
  if (mode == 2) {
    Matrix out(t.m2(), t.m1() * t.m3());
    for (Index k = 0; k < t.m3(); ++k)
      out.middleCols(k * t.m1(), t.m1()) = t.slice(k).transpose();
    return out;
  }
  throw ArgumentError("unfold supports modes 1 and 2, got " + std::to_string(mode));
}

TrafficTensor fold(const Matrix& m, int mode, Index m1, Index m2, Index m3) {
  TrafficTensor t(m1, m2, m3);
  if (mode == 1) {
    if (m.rows() != m1 || m.cols() != m2 * m3)
      throw ArgumentError("fold: matrix shape does not match mode-1 unfolding");
    for (Index k = 0; k < m3; ++k) t.slice(k) = m.middleCols(k * m2, m2);
    return t;
  }
  if (mode == 2) {
    if (m.rows() != m2 || m.cols() != m1 * m3)
      throw ArgumentError("fold: matrix shape does not match mode-2 unfolding");
    for (Index k = 0; k < m3; ++k) t.slice(k) = m.middleCols(k * m1, m1).transpose();
    return t;
  }
  throw ArgumentError("fold supports modes 1 and 2, got " + std::to_string(mode));
}

Matrix bcirc(const TrafficTensor& t) {
  const Index m1 = t.m1(), m2 = t.m2(), m3 = t.m3();
  Matrix out(m1 * m3, m2 * m3);
  for (Index bi = 0; bi < m3; ++bi)
    for (Index bj = 0; bj < m3; ++bj) {
      Index k = (bi - bj + m3) % m3;  // block (bi, bj) holds slice bi - bj (mod m3)
      out.block(bi * m1, bj * m2, m1, m2) = t.slice(k);
    }
  return out;
}

Matrix bvec(const TrafficTensor& t) {
  Matrix out(t.m1() * t.m3(), t.m2());
  for (Index k = 0; k < t.m3(); ++k) out.middleRows(k * t.m1(), t.m1()) = t.slice(k);
  return out;
}

TrafficTensor bvfold(const Matrix& m, Index m1, Index m2, Index m3) {
  if (m.rows() != m1 * m3 || m.cols() != m2)
    throw ArgumentError("bvfold: matrix shape does not match target dims");
  TrafficTensor t(m1, m2, m3);
  for (Index k = 0; k < m3; ++k) t.slice(k) = m.middleRows(k * m1, m1);
  return t;
}

}  // namespace tctf
