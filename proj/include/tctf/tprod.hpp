#pragma once

#include "tctf/spectral.hpp"
#include "tctf/tensor.hpp"

namespace tctf {

// t-product a * b, computed slice-wise in the spectral domain. Inner
// tensor dimensions must agree (a is m1 x p x m3, b is p x m2 x m3).
TrafficTensor tproduct(const TrafficTensor& a, const TrafficTensor& b);

// Tensor conjugate transpose: slice 0 transposed, slice k (k >= 1) holds
// the transpose of slice m3 - k.
TrafficTensor conj_transpose(const TrafficTensor& a);

struct TsvdResult {
  TrafficTensor u;  // m1 x m1 x m3, orthogonal
  TrafficTensor s;  // m1 x m2 x m3, f-diagonal
  TrafficTensor v;  // m2 x m2 x m3, orthogonal
};

// t-SVD a = u * s * v^T via per-slice SVDs on the half spectrum. The
// spectral slices of s are diagonal with nonnegative, nonincreasing
// entries; the real-domain slices of s are diagonal (tubes), with the
// ordering guarantee living in the spectral domain.
TsvdResult tsvd(const TrafficTensor& a);

// Tubal rank: max over slices of the number of spectral singular values
// exceeding tol * (largest singular value over all slices).
Index tubal_rank(const TrafficTensor& a, double tol = 1e-10);

}  // namespace tctf
