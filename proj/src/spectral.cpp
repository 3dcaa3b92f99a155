#include "tctf/spectral.hpp"

#include <cmath>
#include <string>

namespace tctf {

namespace detail {

std::vector<std::complex<double>> root_table(Index m3) {
  std::vector<std::complex<double>> table(static_cast<std::size_t>(m3));
  const double two_pi = 6.283185307179586476925286766559;
  for (Index j = 0; j < m3; ++j) {
    // Snap the axis values so that k = 0 and the Nyquist slice come out
    // exactly real after a forward transform of real data.
    if (4 * j % m3 == 0) {
      switch (4 * j / m3) {
        case 0: table[j] = {1.0, 0.0}; continue;
        case 1: table[j] = {0.0, 1.0}; continue;
        case 2: table[j] = {-1.0, 0.0}; continue;
        case 3: table[j] = {0.0, -1.0}; continue;
        default: break;
      }
    }
    double angle = two_pi * static_cast<double>(j) / static_cast<double>(m3);
    table[j] = {std::cos(angle), std::sin(angle)};
  }
  return table;
}

}  // namespace detail

SpectralSlices::SpectralSlices(Index m1, Index m2, Index m3)
    : m1_(m1), m2_(m2), m3_(m3) {
  if (m1 < 1 || m2 < 1 || m3 < 1)
    throw ArgumentError("spectral dimensions must be positive");
  half_.assign(static_cast<std::size_t>(half_count()), CMatrix::Zero(m1, m2));
}

CMatrix SpectralSlices::full_slice(Index k) const {
  if (k < 0 || k >= m3_)
    throw std::out_of_range("spectral slice index " + std::to_string(k) +
                            " outside [0, " + std::to_string(m3_) + ")");
  if (k < half_count()) return half(k);
  return half(m3_ - k).conjugate();
}

double SpectralSlices::weight(Index k) const {
  if (k == 0) return 1.0;
  if (m3_ % 2 == 0 && k == m3_ / 2) return 1.0;
  return 2.0;
}

double SpectralSlices::squared_norm() const {
  double acc = 0.0;
  for (Index k = 0; k < half_count(); ++k) acc += weight(k) * half(k).squaredNorm();
  return acc;
}

double SpectralSlices::max_abs() const {
  double acc = 0.0;
  for (Index k = 0; k < half_count(); ++k) {
    const CMatrix& s = half(k);
    for (Index j = 0; j < s.cols(); ++j)
      for (Index i = 0; i < s.rows(); ++i) acc = std::max(acc, std::abs(s(i, j)));
  }
  return acc;
}

SpectralSlices forward(const TrafficTensor& t) {
  const Index m1 = t.m1(), m2 = t.m2(), m3 = t.m3();
  SpectralSlices out(m1, m2, m3);
  const auto roots = detail::root_table(m3);
  const Index h = out.half_count();

#pragma omp parallel for schedule(static)
  for (Index k = 0; k < h; ++k) {
    // Accumulate real and imaginary parts separately: all scalars are real,
    // and the snapped axis roots keep slice 0 (and Nyquist) exactly real.
    Matrix re = Matrix::Zero(m1, m2);
    Matrix im = Matrix::Zero(m1, m2);
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

TrafficTensor inverse(const SpectralSlices& s) {
  const Index m1 = s.m1(), m2 = s.m2(), m3 = s.m3();
  const Index h = s.half_count();

  // Realness check on the self-conjugate slices. A violation beyond the
  // relative tolerance means an upstream update broke conjugate symmetry.
  double scale = std::max(1.0, s.max_abs());
  double violation = s.half(0).imag().cwiseAbs().maxCoeff();
  if (m3 % 2 == 0 && m3 > 1)
    violation = std::max(violation, s.half(m3 / 2).imag().cwiseAbs().maxCoeff());
  if (violation > 1e-9 * scale)
    throw NumericError("conjugate-symmetry violation in inverse transform: " +
                       std::to_string(violation / scale) + " relative");

  TrafficTensor out(m1, m2, m3);
  const auto roots = detail::root_table(m3);
  const bool even = (m3 % 2 == 0);
  // Last stored slice that has a conjugate partner.
  const Index paired_end = even ? h - 1 : h;

  // Dense copies of the stored parts; the strided .real()/.imag() views are
  // too slow inside the accumulation loop.
  std::vector<Matrix> re(static_cast<std::size_t>(h)), im(static_cast<std::size_t>(h));
  for (Index k = 0; k < h; ++k) {
    re[static_cast<std::size_t>(k)] = s.half(k).real();
    im[static_cast<std::size_t>(k)] = s.half(k).imag();
  }

#pragma omp parallel for schedule(static)
  for (Index l = 0; l < m3; ++l) {
    // A_l = (1/m3) [ S_0 + 2 sum_k Re(conj(w)^{k l} S_k) (+ (-1)^l S_{m3/2}) ]
    auto acc = out.slice(l);
    acc = re[0];
    for (Index k = 1; k < paired_end; ++k) {
      const auto w = roots[static_cast<std::size_t>((k * l) % m3)];  // conj applied below
      acc.noalias() += 2.0 * w.real() * re[static_cast<std::size_t>(k)];
      acc.noalias() += 2.0 * w.imag() * im[static_cast<std::size_t>(k)];
    }
    if (even && m3 > 1) {
      if (l % 2 == 0)
        acc += re[static_cast<std::size_t>(m3 / 2)];
      else
        acc -= re[static_cast<std::size_t>(m3 / 2)];
    }
    acc /= static_cast<double>(m3);
  }
  return out;
}

std::pair<double, double> spectral_norm_identity_check(const TrafficTensor& t) {
  SpectralSlices s = forward(t);
  return {t.squared_norm(), s.squared_norm() / static_cast<double>(t.m3())};
}

}  // namespace tctf
