#include "tctf/mask.hpp"

namespace tctf {

ObservationMask::ObservationMask(Index m1, Index m2, Index m3, bool observed)
    : m1_(m1), m2_(m2), m3_(m3),
      flags_(static_cast<std::size_t>(m1 * m2 * m3), observed ? 1 : 0) {
  if (m1 < 1 || m2 < 1 || m3 < 1) throw ArgumentError("mask dimensions must be positive");
}

Index ObservationMask::observed_count() const {
  Index count = 0;
  for (auto f : flags_) count += f;
  return count;
}

std::vector<Index> ObservationMask::observed_in_row(Index i, Index k) const {
  std::vector<Index> out;
  for (Index j = 0; j < m2_; ++j)
    if (observed(i, j, k)) out.push_back(j);
  return out;
}

std::vector<Index> ObservationMask::missing_in_row(Index i, Index k) const {
  std::vector<Index> out;
  for (Index j = 0; j < m2_; ++j)
    if (!observed(i, j, k)) out.push_back(j);
  return out;
}

bool ObservationMask::slice_fully_observed(Index k) const {
  for (Index j = 0; j < m2_; ++j)
    for (Index i = 0; i < m1_; ++i)
      if (!observed(i, j, k)) return false;
  return true;
}

TrafficTensor project_observed(const TrafficTensor& g, const ObservationMask& mask) {
  if (!mask.dims_match(g)) throw ArgumentError("mask and tensor dimensions do not match");
  TrafficTensor out(g.m1(), g.m2(), g.m3());
  for (Index k = 0; k < g.m3(); ++k)
    for (Index j = 0; j < g.m2(); ++j)
      for (Index i = 0; i < g.m1(); ++i)
        if (mask.observed(i, j, k)) out(i, j, k) = g(i, j, k);
  return out;
}

void impose_observed(TrafficTensor& target, const TrafficTensor& source,
                     const ObservationMask& mask) {
  if (!mask.dims_match(target) || !target.same_dims(source))
    throw ArgumentError("impose_observed: dimension mismatch");
  for (Index k = 0; k < target.m3(); ++k)
    for (Index j = 0; j < target.m2(); ++j)
      for (Index i = 0; i < target.m1(); ++i)
        if (mask.observed(i, j, k)) target(i, j, k) = source(i, j, k);
}

}  // namespace tctf
