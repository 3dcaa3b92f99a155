#pragma once

#include <Eigen/Cholesky>

#include <map>
#include <memory>
#include <vector>

#include "tctf/mask.hpp"
#include "tctf/tensor.hpp"

namespace tctf {

// Exact solver for the per-slice data subproblem
//
//   min_W  1/2 ( ||Z - W||_F^2 + rho2 * ||W K^T||_F^2 + mu * ||W||_F^2 )
//   s.t.   W = G on the observed positions of the slice,
//
// solved row by row: with the row split into observed and missing column
// blocks and K = [K1, K2] split accordingly, the missing block is
//
//   w_mis = (z_mis - rho2 * g_obs * K1^T K2) * ((1+mu) I + rho2 * K2^T K2)^{-1}
//
// and the observed block is copied from G verbatim. Rows sharing a missing
// pattern share one cached factorization.

// Cached per-pattern data: the missing-column system and the coupling block.
struct RowPattern {
  std::vector<Index> observed;
  std::vector<Index> missing;
  Matrix coupling;           // K1^T K2, |obs| x |mis| (empty when unused)
  Eigen::LLT<Matrix> llt;    // factorization of (1+mu) I + rho2 K2^T K2
};

// Rows of one frontal slice that have at least one missing entry.
struct SliceRows {
  struct Row {
    Index i;
    const RowPattern* pattern;
  };
  std::vector<Row> rows;
};

class WPartitions {
 public:
  // Precomputes patterns and factorizations for the whole mask. The mask is
  // fixed for a run, so this happens once. Requires mu > 0 (keeps every
  // row system positive definite), rho2 >= 0.
  WPartitions(const ObservationMask& mask, double mu, double rho2);

  double mu() const { return mu_; }
  double rho2() const { return rho2_; }
  Index m2() const { return m2_; }
  Index slice_count() const { return static_cast<Index>(slices_.size()); }

  const SliceRows& slice(Index k) const { return slices_[static_cast<std::size_t>(k)]; }
  Index pattern_count() const { return static_cast<Index>(patterns_.size()); }

 private:
  const RowPattern* intern(const std::vector<Index>& missing, const Matrix& k_dense);

  double mu_;
  double rho2_;
  Index m2_;
  std::vector<SliceRows> slices_;
  std::map<std::vector<Index>, std::unique_ptr<RowPattern>> patterns_;
};

// Full row (length m2) solving the KKT system for one (i, k).
Eigen::RowVectorXd solve_w_row(const RowPattern& pattern, double mu, double rho2,
                               const Eigen::RowVectorXd& z_row,
                               const Eigen::RowVectorXd& g_row);

// Minimizer of the slice subproblem; writes into w_k (m1 x m2).
void solve_w_slice(const WPartitions& parts, Index k, const Matrix& z_k,
                   const Matrix& g_k, Matrix& w_k);

// All slices; parallel over k, output independent of thread count.
TrafficTensor solve_w_all(const WPartitions& parts, const TrafficTensor& z,
                          const TrafficTensor& g, const ObservationMask& mask);

// Stationarity residual of the solved subproblem, evaluated in the
// row-times-operator orientation: max over missing (i,j) of
// |(W K_mu_rho2 - Z)_ij| with K_mu_rho2 = (1+mu) I + rho2 K^T K.
double w_kkt_residual(const Matrix& w_k, const Matrix& z_k,
                      const ObservationMask& mask, Index k, double mu, double rho2);

}  // namespace tctf
