#include "tctf/reference.hpp"

#include <cmath>
#include <complex>

namespace tctf::reference {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

std::vector<CMatrix> dft_forward_naive(const TrafficTensor& t) {
  const Index m3 = t.m3();
  std::vector<CMatrix> out(static_cast<std::size_t>(m3));
  for (Index k = 0; k < m3; ++k) {
    CMatrix acc = CMatrix::Zero(t.m1(), t.m2());
    for (Index l = 0; l < m3; ++l) {
      std::complex<double> w =
          std::polar(1.0, kTwoPi * static_cast<double>(k * l) / static_cast<double>(m3));
      acc += w * t.slice(l);
    }
    out[static_cast<std::size_t>(k)] = acc;
  }
  return out;
}

TrafficTensor dft_inverse_naive(const std::vector<CMatrix>& slices, Index m1, Index m2,
                                Index m3) {
  TrafficTensor out(m1, m2, m3);
  for (Index l = 0; l < m3; ++l) {
    CMatrix acc = CMatrix::Zero(m1, m2);
    for (Index k = 0; k < m3; ++k) {
      std::complex<double> w =
          std::polar(1.0, -kTwoPi * static_cast<double>(k * l) / static_cast<double>(m3));
      acc += w * slices[static_cast<std::size_t>(k)];
    }
    out.slice(l) = acc.real() / static_cast<double>(m3);
  }
  return out;
}

SpectralSlices forward_serial(const TrafficTensor& t) {
  const Index m3 = t.m3();
  SpectralSlices out(t.m1(), t.m2(), m3);
  const auto roots = detail::root_table(m3);
  for (Index k = 0; k < out.half_count(); ++k) {
    Matrix re = Matrix::Zero(t.m1(), t.m2());
    Matrix im = Matrix::Zero(t.m1(), t.m2());
    for (Index l = 0; l < m3; ++l) {
      const auto w = roots[static_cast<std::size_t>((k * l) % m3)];
      re.noalias() += w.real() * t.slice(l);
      if (w.imag() != 0.0) im.noalias() += w.imag() * t.slice(l);
    }
    out.half(k).real() = re;
    out.half(k).imag() = im;
  }
  return out;
}

TrafficTensor inverse_serial(const SpectralSlices& s) {
  const Index m3 = s.m3();
  const Index h = s.half_count();
  const auto roots = detail::root_table(m3);
  const bool even = (m3 % 2 == 0);
  const Index paired_end = even ? h - 1 : h;
  TrafficTensor out(s.m1(), s.m2(), m3);
  for (Index l = 0; l < m3; ++l) {
    Matrix acc = s.half(0).real();
    for (Index k = 1; k < paired_end; ++k) {
      const auto w = roots[static_cast<std::size_t>((k * l) % m3)];
      acc.noalias() += 2.0 * w.real() * s.half(k).real();
      acc.noalias() += 2.0 * w.imag() * s.half(k).imag();
    }
    if (even && m3 > 1) {
      if (l % 2 == 0)
        acc += s.half(m3 / 2).real();
      else
        acc -= s.half(m3 / 2).real();
    }
    out.slice(l) = acc / static_cast<double>(m3);
  }
  return out;
}

TrafficTensor tproduct_bcirc(const TrafficTensor& a, const TrafficTensor& b) {
  if (a.m2() != b.m1() || a.m3() != b.m3())
    throw ArgumentError("tproduct_bcirc: inner dimensions do not match");
  Matrix product = bcirc(a) * bvec(b);
  return bvfold(product, a.m1(), b.m2(), a.m3());
}

}  // namespace tctf::reference
