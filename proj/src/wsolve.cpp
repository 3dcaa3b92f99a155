#include "tctf/wsolve.hpp"

#include <cmath>
#include <string>

#include "tctf/regularizers.hpp"

namespace tctf {

WPartitions::WPartitions(const ObservationMask& mask, double mu, double rho2)
    : mu_(mu), rho2_(rho2), m2_(mask.m2()) {
  if (!(mu > 0.0)) throw ArgumentError("w-subproblem requires mu > 0");
  if (rho2 < 0.0) throw ArgumentError("w-subproblem requires rho2 >= 0");

  Matrix k_dense;
  if (m2_ >= 2) k_dense = ToeplitzDiff(m2_).dense();

  slices_.resize(static_cast<std::size_t>(mask.m3()));
  for (Index k = 0; k < mask.m3(); ++k) {
    auto& slice = slices_[static_cast<std::size_t>(k)];
    for (Index i = 0; i < mask.m1(); ++i) {
      std::vector<Index> missing = mask.missing_in_row(i, k);
      if (missing.empty()) continue;  // nothing to solve for this row
      slice.rows.push_back({i, intern(missing, k_dense)});
    }
  }
}

const RowPattern* WPartitions::intern(const std::vector<Index>& missing,
                                      const Matrix& k_dense) {
  auto it = patterns_.find(missing);
  if (it != patterns_.end()) return it->second.get();

  auto pattern = std::make_unique<RowPattern>();
  pattern->missing = missing;
  pattern->observed.reserve(static_cast<std::size_t>(m2_) - missing.size());
  std::size_t pos = 0;
  for (Index j = 0; j < m2_; ++j) {
    if (pos < missing.size() && missing[pos] == j)
      ++pos;
    else
      pattern->observed.push_back(j);
  }

  const Index n_mis = static_cast<Index>(missing.size());
  const Index n_obs = static_cast<Index>(pattern->observed.size());

  Matrix system = (1.0 + mu_) * Matrix::Identity(n_mis, n_mis);
  if (rho2_ > 0.0 && m2_ >= 2) {
    Matrix k2(k_dense.rows(), n_mis);
    for (Index c = 0; c < n_mis; ++c) k2.col(c) = k_dense.col(missing[static_cast<std::size_t>(c)]);
    system.noalias() += rho2_ * (k2.transpose() * k2);
    if (n_obs > 0) {
      Matrix k1(k_dense.rows(), n_obs);
      for (Index c = 0; c < n_obs; ++c)
        k1.col(c) = k_dense.col(pattern->observed[static_cast<std::size_t>(c)]);
      pattern->coupling = k1.transpose() * k2;
    }
  }
  pattern->llt.compute(system);
  if (pattern->llt.info() != Eigen::Success)
    throw NumericError("w-subproblem row factorization failed");

  const RowPattern* raw = pattern.get();
  patterns_.emplace(missing, std::move(pattern));
  return raw;
}

Eigen::RowVectorXd solve_w_row(const RowPattern& pattern, double /*mu*/, double rho2,
                               const Eigen::RowVectorXd& z_row,
                               const Eigen::RowVectorXd& g_row) {
  if (!z_row.allFinite() || !g_row.allFinite())
    throw NumericError("w-subproblem received non-finite input row");
  const Index n_mis = static_cast<Index>(pattern.missing.size());
  const Index n_obs = static_cast<Index>(pattern.observed.size());

  Eigen::VectorXd rhs(n_mis);
  for (Index c = 0; c < n_mis; ++c) rhs(c) = z_row(pattern.missing[static_cast<std::size_t>(c)]);
  if (rho2 > 0.0 && n_obs > 0 && pattern.coupling.size() > 0) {
    Eigen::VectorXd g_obs(n_obs);
    for (Index c = 0; c < n_obs; ++c) g_obs(c) = g_row(pattern.observed[static_cast<std::size_t>(c)]);
    rhs.noalias() -= rho2 * (pattern.coupling.transpose() * g_obs);
  }
  Eigen::VectorXd w_mis = pattern.llt.solve(rhs);

  Eigen::RowVectorXd out(z_row.size());
  for (Index c = 0; c < n_obs; ++c) {
    Index j = pattern.observed[static_cast<std::size_t>(c)];
    out(j) = g_row(j);  // exact copy on the observed block
  }
  for (Index c = 0; c < n_mis; ++c) out(pattern.missing[static_cast<std::size_t>(c)]) = w_mis(c);
  return out;
}

void solve_w_slice(const WPartitions& parts, Index k, const Matrix& z_k,
                   const Matrix& g_k, Matrix& w_k) {
  w_k = g_k;  // rows with no missing entries keep the data verbatim
  const SliceRows& slice = parts.slice(k);
  for (const auto& row : slice.rows) {
    w_k.row(row.i) = solve_w_row(*row.pattern, parts.mu(), parts.rho2(),
                                 z_k.row(row.i), g_k.row(row.i));
  }
}

TrafficTensor solve_w_all(const WPartitions& parts, const TrafficTensor& z,
                          const TrafficTensor& g, const ObservationMask& mask) {
  if (!mask.dims_match(z) || !z.same_dims(g))
    throw ArgumentError("solve_w_all: dimension mismatch");
  if (parts.m2() != z.m2() || parts.slice_count() != z.m3())
    throw ArgumentError("solve_w_all: partitions built for different dimensions");
  TrafficTensor w(z.m1(), z.m2(), z.m3());
  const Index m3 = z.m3();
  const Index m2 = z.m2();
  const double rho2 = parts.rho2();
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < m3; ++k) {
    auto w_k = w.slice(k);
    auto z_k = z.slice(k);
    auto g_k = g.slice(k);
    w_k = g_k;
    Eigen::VectorXd rhs(m2), g_obs(m2);
    for (const auto& row : parts.slice(k).rows) {
      const RowPattern& p = *row.pattern;
      const Index n_mis = static_cast<Index>(p.missing.size());
      const Index n_obs = static_cast<Index>(p.observed.size());
      for (Index c = 0; c < n_mis; ++c)
        rhs(c) = z_k(row.i, p.missing[static_cast<std::size_t>(c)]);
      if (rho2 > 0.0 && n_obs > 0 && p.coupling.size() > 0) {
        for (Index c = 0; c < n_obs; ++c)
          g_obs(c) = g_k(row.i, p.observed[static_cast<std::size_t>(c)]);
        rhs.head(n_mis).noalias() -= rho2 * (p.coupling.transpose() * g_obs.head(n_obs));
      }
      p.llt.solveInPlace(rhs.head(n_mis));
      for (Index c = 0; c < n_mis; ++c)
        w_k(row.i, p.missing[static_cast<std::size_t>(c)]) = rhs(c);
    }
  }
  return w;
}

double w_kkt_residual(const Matrix& w_k, const Matrix& z_k,
                      const ObservationMask& mask, Index k, double mu, double rho2) {
  const Index m2 = w_k.cols();
  ShiftedGram k_mu_rho2(m2, 1.0 + mu, rho2);
  // Row-times-operator orientation: residual = W * K_mu_rho2 - Z.
  Matrix residual = k_mu_rho2.apply(Matrix(w_k.transpose())).transpose() - z_k;
  double acc = 0.0;
  for (Index j = 0; j < m2; ++j)
    for (Index i = 0; i < w_k.rows(); ++i)
      if (!mask.observed(i, j, k)) acc = std::max(acc, std::abs(residual(i, j)));
  return acc;
}

}  // namespace tctf
