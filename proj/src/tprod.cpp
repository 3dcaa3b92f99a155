#include "tctf/tprod.hpp"

#include <Eigen/SVD>

#include <string>

#include "tctf/errors.hpp"

namespace tctf {

TrafficTensor tproduct(const TrafficTensor& a, const TrafficTensor& b) {
  if (a.m2() != b.m1() || a.m3() != b.m3())
    throw ArgumentError("tproduct: dimensions " + std::to_string(a.m2()) + " vs " +
                        std::to_string(b.m1()) + " (inner), " + std::to_string(a.m3()) +
                        " vs " + std::to_string(b.m3()) + " (slices) do not match");
  SpectralSlices sa = forward(a);
  SpectralSlices sb = forward(b);
  SpectralSlices sc(a.m1(), b.m2(), a.m3());
  const Index h = sc.half_count();
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < h; ++k) sc.half(k).noalias() = sa.half(k) * sb.half(k);
  return inverse(sc);
}

TrafficTensor conj_transpose(const TrafficTensor& a) {
  TrafficTensor out(a.m2(), a.m1(), a.m3());
  out.slice(0) = a.slice(0).transpose();
  for (Index k = 1; k < a.m3(); ++k) out.slice(k) = a.slice(a.m3() - k).transpose();
  return out;
}

TsvdResult tsvd(const TrafficTensor& a) {
  const Index m1 = a.m1(), m2 = a.m2(), m3 = a.m3();
  SpectralSlices sa = forward(a);
  SpectralSlices su(m1, m1, m3), ss(m1, m2, m3), sv(m2, m2, m3);
  const Index h = sa.half_count();
  bool failed = false;
  Index failed_slice = -1;
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < h; ++k) {
    Eigen::JacobiSVD<CMatrix> svd(sa.half(k), Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) {
#pragma omp critical
      {
        failed = true;
        failed_slice = k;
      }
      continue;
    }
    su.half(k) = svd.matrixU();
    CMatrix s = CMatrix::Zero(m1, m2);
    const auto& values = svd.singularValues();
    for (Index i = 0; i < values.size(); ++i) s(i, i) = values(i);
    ss.half(k) = s;
    sv.half(k) = svd.matrixV();
  }
  if (failed)
    throw NumericError("tsvd: SVD failed on spectral slice " + std::to_string(failed_slice));
  return {inverse(su), inverse(ss), inverse(sv)};
}

Index tubal_rank(const TrafficTensor& a, double tol) {
  if (tol < 0.0) throw ArgumentError("tubal_rank: tolerance must be nonnegative");
  SpectralSlices sa = forward(a);
  const Index h = sa.half_count();
  std::vector<Eigen::VectorXd> values(static_cast<std::size_t>(h));
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < h; ++k) {
    Eigen::JacobiSVD<CMatrix> svd(sa.half(k));
    values[static_cast<std::size_t>(k)] = svd.singularValues();
  }
  double sigma_max = 0.0;
  for (const auto& v : values)
    if (v.size() > 0) sigma_max = std::max(sigma_max, v(0));
  if (sigma_max == 0.0) return 0;
  Index rank = 0;
  for (const auto& v : values) {
    Index count = 0;
    for (Index i = 0; i < v.size(); ++i)
      if (v(i) > tol * sigma_max) ++count;
    rank = std::max(rank, count);
  }
  return rank;
}

}  // namespace tctf
