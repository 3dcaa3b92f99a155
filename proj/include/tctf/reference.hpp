#pragma once

#include <vector>

#include "tctf/spectral.hpp"
#include "tctf/tensor.hpp"

namespace tctf::reference {

// Serial reference implementations, kept deliberately naive. They are the
// ground truth the parallel kernels are tested against and the baseline the
// bench target times.

// Full-spectrum mode-3 DFT by the literal O(m3^2) double loop.
std::vector<CMatrix> dft_forward_naive(const TrafficTensor& t);

// Literal inverse formula applied to a full spectrum.
TrafficTensor dft_inverse_naive(const std::vector<CMatrix>& slices, Index m1,
                                Index m2, Index m3);

// Serial half-spectrum transforms with the same conventions as
// tctf::forward / tctf::inverse.
SpectralSlices forward_serial(const TrafficTensor& t);
TrafficTensor inverse_serial(const SpectralSlices& s);

// t-product through the block-circulant definition:
// bvfold(bcirc(a) * bvec(b)). O(m1*m2*m3^2) memory and time.
TrafficTensor tproduct_bcirc(const TrafficTensor& a, const TrafficTensor& b);

}  // namespace tctf::reference
