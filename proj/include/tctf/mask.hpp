#pragma once

#include <cstdint>
#include <vector>

#include "tctf/tensor.hpp"

namespace tctf {

// Index set of observed tensor entries, stored densely. Layout matches
// TrafficTensor (slice-major, column-major within a slice).
class ObservationMask {
 public:
  ObservationMask() = default;
  ObservationMask(Index m1, Index m2, Index m3, bool observed = false);

  Index m1() const { return m1_; }
  Index m2() const { return m2_; }
  Index m3() const { return m3_; }
  Index size() const { return m1_ * m2_ * m3_; }

  bool observed(Index i, Index j, Index k) const {
    return flags_[static_cast<std::size_t>(i + m1_ * (j + m2_ * k))] != 0;
  }
  void set(Index i, Index j, Index k, bool value) {
    flags_[static_cast<std::size_t>(i + m1_ * (j + m2_ * k))] = value ? 1 : 0;
  }

  Index observed_count() const;
  Index missing_count() const { return size() - observed_count(); }

  // Column indices j with (i, j, k) observed, ascending.
  std::vector<Index> observed_in_row(Index i, Index k) const;
  std::vector<Index> missing_in_row(Index i, Index k) const;

  bool slice_fully_observed(Index k) const;

  bool dims_match(const TrafficTensor& t) const {
    return m1_ == t.m1() && m2_ == t.m2() && m3_ == t.m3();
  }

 private:
  Index m1_ = 0, m2_ = 0, m3_ = 0;
  std::vector<std::uint8_t> flags_;
};

// Zero-fill of the unobserved entries: P_Omega(g).
TrafficTensor project_observed(const TrafficTensor& g, const ObservationMask& mask);

// Overwrites the observed positions of `target` with the values of `source`
// (exact copies, no arithmetic).
void impose_observed(TrafficTensor& target, const TrafficTensor& source,
                     const ObservationMask& mask);

}  // namespace tctf
