#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "tctf/tensor.hpp"

namespace tctf {

// Mode-3 DFT of a real tensor, stored as half-spectrum complex frontal
// slices. Conventions (0-based k):
//
//   forward:  S_k = sum_l w^{k l} A_l,          w = exp(2*pi*i / m3)
//   inverse:  A_l = (1/m3) sum_k conj(w)^{k l} S_k
//
// Note the positive exponent in the forward kernel (a conventional FFT's
// forward uses the negative one). Conjugate symmetry of real data,
// S_k = conj(S_{m3-k}) for k >= 1, means only slices k = 0 .. floor(m3/2)
// are stored; slice 0 is real, and so is slice m3/2 when m3 is even.
class SpectralSlices {
 public:
  SpectralSlices() = default;
  SpectralSlices(Index m1, Index m2, Index m3);

  Index m1() const { return m1_; }
  Index m2() const { return m2_; }
  Index m3() const { return m3_; }

  Index half_count() const { return m3_ / 2 + 1; }

  CMatrix& half(Index k) { return half_[static_cast<std::size_t>(k)]; }
  const CMatrix& half(Index k) const { return half_[static_cast<std::size_t>(k)]; }

  // Any slice of the full spectrum, reconstructing k > m3/2 by conjugation.
  CMatrix full_slice(Index k) const;

  // Multiplicity of stored slice k in full-spectrum sums: 1 for k = 0 and
  // for the Nyquist slice (even m3), 2 otherwise.
  double weight(Index k) const;

  // Full-spectrum sum of squared Frobenius norms, sum_k ||S_k||_F^2.
  double squared_norm() const;

  // Largest entry modulus over the full spectrum.
  double max_abs() const;

 private:
  Index m1_ = 0, m2_ = 0, m3_ = 0;
  std::vector<CMatrix> half_;
};

// Mode-3 DFT. Parallel over spectral slices; output is independent of the
// thread count.
SpectralSlices forward(const TrafficTensor& t);

// Inverse mode-3 DFT. Checks the realness part of the conjugate-symmetry
// invariant (slices 0 and m3/2 must be real up to 1e-9 relative) and throws
// NumericError on violation: that always indicates an algorithmic bug, not
// roundoff.
TrafficTensor inverse(const SpectralSlices& s);

// (||t||_F^2, (1/m3) * sum_k ||S_k||_F^2) — the two sides of the Parseval
// identity the separable reformulation rests on.
std::pair<double, double> spectral_norm_identity_check(const TrafficTensor& t);

namespace detail {
// Table of the m3 roots w^j = exp(2*pi*i*j/m3), j = 0..m3-1, with the four
// axis values snapped exactly so that real-output slices carry exactly zero
// imaginary part.
std::vector<std::complex<double>> root_table(Index m3);
}  // namespace detail

}  // namespace tctf
