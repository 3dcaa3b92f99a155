#include "tctf/solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "tctf/rng.hpp"

namespace tctf {

namespace {

constexpr int kMaxHalvings = 10;
// Substream tags for the seeded initialization draws.
constexpr std::uint64_t kStreamInitX = 11;
constexpr std::uint64_t kStreamInitY = 12;

TrafficTensor gaussian_tensor(Index m1, Index m2, Index m3, double sigma, Rng& rng) {
  TrafficTensor t(m1, m2, m3);
  for (Index k = 0; k < m3; ++k) {
    auto s = t.slice(k);
    for (Index j = 0; j < m2; ++j)
      for (Index i = 0; i < m1; ++i) s(i, j) = sigma * rng.next_gaussian();
  }
  return t;
}

// Pseudoinverse of a Hermitian PSD matrix from its eigendecomposition,
// with a relative eigenvalue cutoff. Also reports the largest eigenvalue
// and the smallest retained one (both 0 for the zero matrix).
struct HermitianPinv {
  CMatrix pinv;
  double lambda_max = 0.0;
  double lambda_min_kept = 0.0;
};

HermitianPinv hermitian_pinv(const CMatrix& m, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(m);
  HermitianPinv out;
  if (eig.info() != Eigen::Success) {
    // Degenerate (typically non-finite) input: report a zero operator so the
    // caller skips the step; the solver's divergence check reports the
    // iteration. Must not throw, this runs inside parallel slice loops.
    out.pinv = CMatrix::Zero(m.rows(), m.cols());
    return out;
  }
  const auto& values = eig.eigenvalues();  // ascending
  const Index n = values.size();
  out.lambda_max = std::max(0.0, values(n - 1));
  double cutoff = rel_tol * out.lambda_max;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(n);
  for (Index i = 0; i < n; ++i) {
    if (values(i) > cutoff && values(i) > 0.0) {
      inv(i) = 1.0 / values(i);
      if (out.lambda_min_kept == 0.0) out.lambda_min_kept = values(i);
    }
  }
  // Eigenvalues come sorted ascending, so the first retained one is the
  // smallest kept.
  out.pinv = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().adjoint();
  return out;
}

// Largest eigenvalue and smallest eigenvalue above the relative cutoff,
// eigenvalues only.
std::pair<double, double> hermitian_eig_range(const CMatrix& m, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(m, Eigen::EigenvaluesOnly);
  const auto& values = eig.eigenvalues();
  double lambda_max = std::max(0.0, values(values.size() - 1));
  double cutoff = rel_tol * lambda_max;
  double lambda_min_kept = 0.0;
  for (Index i = 0; i < values.size(); ++i) {
    if (values(i) > cutoff && values(i) > 0.0) {
      lambda_min_kept = values(i);
      break;
    }
  }
  return {lambda_max, lambda_min_kept};
}

// kappa(step) = (step / L) * (1 / ((1 + 4 rho1) lam_max) - step / (2 lam_min_kept^2))
// evaluated on the eigenvalues of the Gram matrix being preconditioned with
// (lam = sigma^2 of the underlying factor). Positive kappa certifies descent.
double kappa_coefficient(double step, double lipschitz, double rho1, double lambda_max,
                         double lambda_min_kept) {
  if (lipschitz <= 0.0 || lambda_max <= 0.0 || lambda_min_kept <= 0.0) return 0.0;
  double bracket = 1.0 / ((1.0 + 4.0 * rho1) * lambda_max)
                 - step / (2.0 * lambda_min_kept * lambda_min_kept);
  return (step / lipschitz) * bracket;
}

}  // namespace

Index SolverConfig::effective_rank(Index m1, Index m2) const {
  if (rank > 0) return rank;
  Index suggested = (std::min(m1, m2) + 3) / 4;  // ceil(min/4)
  return std::max<Index>(1, std::min<Index>(10, suggested));
}

void SolverConfig::validate() const {
  if (rank < 0) throw ArgumentError("rank must be >= 1 (or 0 for the default)");
  if (rho1 < 0.0 || rho2 < 0.0) throw ArgumentError("rho1 and rho2 must be >= 0");
  if (!(mu > 0.0)) throw ArgumentError("mu must be > 0");
  if (alpha < 0.0 || beta < 0.0) throw ArgumentError("alpha and beta must be >= 0");
  if (!(tol > 0.0)) throw ArgumentError("tol must be > 0");
  if (max_iters < 1) throw ArgumentError("max_iters must be >= 1");
  if (!(pinv_tol > 0.0) || !(pinv_tol < 1.0))
    throw ArgumentError("pinv_tol must lie in (0, 1)");
}

CMatrix grad_h_x(const CMatrix& x, const CMatrix& y, const CMatrix& w,
                 const ShiftedGram& h_rho1) {
  // (X Y - W) Y^* + rho1 D^T D X Y Y^*  ==  H_rho1 (X (Y Y^*)) - W Y^*
  return h_rho1.apply(CMatrix(x * (y * y.adjoint()))) - w * y.adjoint();
}

CMatrix grad_h_y(const CMatrix& x, const CMatrix& y, const CMatrix& w,
                 const ShiftedGram& h_rho1) {
  // X^* (X Y - W) + rho1 X^* D^T D X Y  ==  (X^* H_rho1 X) Y - X^* W
  return x.adjoint() * (h_rho1.apply(CMatrix(x * y)) - w);
}

double factor_objective(const CMatrix& x, const CMatrix& y, const CMatrix& w,
                        double rho1) {
  CMatrix z = x * y;
  double value = (z - w).squaredNorm();
  if (rho1 > 0.0) value += rho1 * row_diff_squared_norm(z);
  return 0.5 * value;
}

Solver::Solver(const TrafficTensor& g, const ObservationMask& mask, SolverConfig config)
    : g_(g),
      mask_(mask),
      cfg_(config),
      rank_(config.effective_rank(g.m1(), g.m2())),
      h_rho1_(g.m1(), 1.0, config.rho1),
      h_norm_(h_rho1_.operator_norm()),
      parts_(mask, config.mu, config.rho2) {
  cfg_.validate();
  if (!mask.dims_match(g)) throw ArgumentError("mask and data dimensions do not match");
  if (mask.observed_count() == 0)
    throw ArgumentError("recovery requires at least one observed entry");
}

void Solver::initialize() {
  const Index m1 = g_.m1(), m2 = g_.m2(), m3 = g_.m3();
  const double sigma = 1.0 / std::sqrt(static_cast<double>(rank_));

  // Real Gaussian factor tensors, forward-transformed: conjugate symmetry
  // holds at iteration zero by construction.
  Rng rng_x(cfg_.seed, kStreamInitX);
  Rng rng_y(cfg_.seed, kStreamInitY);
  x_ = forward(gaussian_tensor(m1, rank_, m3, sigma, rng_x));
  y_ = forward(gaussian_tensor(rank_, m2, m3, sigma, rng_y));

  // W starts from the zero-filled data and one exact data-solve pass.
  TrafficTensor filled = project_observed(g_, mask_);
  w_ = solve_w_all(parts_, filled, g_, mask_);
  ws_ = forward(w_);

  zs_ = SpectralSlices(m1, m2, m3);
  const Index h = zs_.half_count();
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < h; ++k) zs_.half(k).noalias() = x_.half(k) * y_.half(k);
  z_ = inverse(zs_);

  step_info_.assign(static_cast<std::size_t>(h), StepInfo{});
  trace_.clear();
  trace_.push_back(objective_spectral());
  rank_drops_.clear();
  iter_ = 0;
  initialized_ = true;
}

FactorStepResult descent_step(const CMatrix& x, const CMatrix& y, const CMatrix& w,
                              const ShiftedGram& h_rho1, double h_norm,
                              const SolverConfig& cfg) {
  FactorStepResult r;
  r.x_next = x;
  r.y_next = y;
  r.x_direction = CMatrix::Zero(x.rows(), x.cols());
  r.y_direction = CMatrix::Zero(y.rows(), y.cols());

  // X update: d_x = -H_rho1^{-1} grad_x (Y Y^*)^+. A unit fraction of this
  // direction is the exact minimizer of h over X (the paper-units step
  // alpha_kl = L1), so the backtracking line search below almost never
  // shortens it; it only guards roundoff-level increases near stationarity.
  CMatrix gram_y = y * y.adjoint();
  HermitianPinv py = hermitian_pinv(gram_y, cfg.pinv_tol);
  r.info.l1 = h_norm * py.lambda_max;
  double h_current = factor_objective(x, y, w, cfg.rho1);
  if (r.info.l1 > 0.0) {
    CMatrix grad = h_rho1.apply(CMatrix(x * gram_y)) - w * y.adjoint();
    r.x_direction = -h_rho1.solve(grad) * py.pinv;
    double fraction = cfg.alpha;
    bool accepted = false;
    while (fraction > 0.0) {
      CMatrix trial = x + fraction * r.x_direction;
      double h_trial = factor_objective(trial, y, w, cfg.rho1);
      if (h_trial <= h_current) {
        r.x_next = std::move(trial);
        h_current = h_trial;
        accepted = true;
        break;
      }
      if (++r.info.halvings_x > kMaxHalvings) break;
      fraction *= 0.5;
    }
    r.info.alpha_used = accepted ? fraction : 0.0;
    // Descent coefficient of the accepted step (paper units a = fraction * L1).
    if (accepted)
      r.info.kappa_x = kappa_coefficient(fraction * r.info.l1, r.info.l1, cfg.rho1,
                                         py.lambda_max, py.lambda_min_kept);
  }

  // Y update with the refreshed X (Gauss-Seidel order):
  // d_y = -(X^* H_rho1 X)^+ grad_y.
  CMatrix gram_x = r.x_next.adjoint() * h_rho1.apply(r.x_next);
  HermitianPinv px = hermitian_pinv(gram_x, cfg.pinv_tol);
  r.info.l2 = px.lambda_max;
  if (r.info.l2 > 0.0) {
    CMatrix grad = gram_x * y - r.x_next.adjoint() * w;
    r.y_direction = -(px.pinv * grad);
    double fraction = cfg.beta;
    bool accepted = false;
    while (fraction > 0.0) {
      CMatrix trial = y + fraction * r.y_direction;
      double h_trial = factor_objective(r.x_next, trial, w, cfg.rho1);
      if (h_trial <= h_current) {
        r.y_next = std::move(trial);
        accepted = true;
        break;
      }
      if (++r.info.halvings_y > kMaxHalvings) break;
      fraction *= 0.5;
    }
    r.info.beta_used = accepted ? fraction : 0.0;
    if (accepted) {
      // The coefficient is stated on the singular values of X itself;
      // they are the root eigenvalues of X^* X.
      auto [sx_max, sx_min] =
          hermitian_eig_range(CMatrix(r.x_next.adjoint() * r.x_next), cfg.pinv_tol);
      r.info.kappa_y = kappa_coefficient(fraction * r.info.l2, r.info.l2, cfg.rho1,
                                         sx_max, sx_min);
    }
  }
  return r;
}

void Solver::factor_step(Index k) {
  FactorStepResult r =
      descent_step(x_.half(k), y_.half(k), ws_.half(k), h_rho1_, h_norm_, cfg_);
  x_.half(k) = std::move(r.x_next);
  y_.half(k) = std::move(r.y_next);
  step_info_[static_cast<std::size_t>(k)] = r.info;
}

void Solver::assemble_z() {
  const Index h = zs_.half_count();
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < h; ++k) zs_.half(k).noalias() = x_.half(k) * y_.half(k);
  z_ = inverse(zs_);
}

void Solver::update_w() {
  TrafficTensor w_next = solve_w_all(parts_, z_, g_, mask_);
  double acc = 0.0;
  const double* a = w_next.raw();
  const double* b = w_.raw();
  for (Index idx = 0; idx < w_next.size(); ++idx) {
    double d = a[idx] - b[idx];
    acc += d * d;
  }
  delta_w_ = std::sqrt(acc);
  w_ = std::move(w_next);
  ws_ = forward(w_);
}

bool Solver::maybe_decrease_rank() {
  if (cfg_.rank_adjust != RankAdjust::decrease_on_plateau) return false;
  if (rank_ <= 1) return false;
  if (trace_.size() < 11) return false;
  if (!rank_drops_.empty() && iter_ - rank_drops_.back() < 10) return false;
  double f_old = trace_[trace_.size() - 11];
  double f_new = trace_.back();
  if (f_old - f_new > 1e-4 * std::abs(f_old)) return false;

  const Index h = zs_.half_count();
  std::vector<Eigen::JacobiSVD<CMatrix>> svds(static_cast<std::size_t>(h));
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < h; ++k)
    svds[static_cast<std::size_t>(k)].compute(zs_.half(k),
                                              Eigen::ComputeThinU | Eigen::ComputeThinV);

  Index r_new = 1;
  for (Index k = 0; k < h; ++k) {
    const auto& sv = svds[static_cast<std::size_t>(k)].singularValues();
    double cutoff = sv.size() > 0 ? cfg_.pinv_tol * sv(0) : 0.0;
    Index kept = 0;
    for (Index i = 0; i < sv.size(); ++i)
      if (sv(i) > cutoff && sv(i) > 0.0) ++kept;
    r_new = std::max(r_new, kept);
  }
  if (r_new >= rank_) return false;

  // Refactor each slice from its truncated SVD, splitting the singular
  // values evenly between the two factors.
  for (Index k = 0; k < h; ++k) {
    const auto& svd = svds[static_cast<std::size_t>(k)];
    const auto& sv = svd.singularValues();
    Index take = std::min<Index>(r_new, sv.size());
    Eigen::VectorXd root = sv.head(take).cwiseSqrt();
    CMatrix x_new = CMatrix::Zero(g_.m1(), r_new);
    CMatrix y_new = CMatrix::Zero(r_new, g_.m2());
    x_new.leftCols(take) = svd.matrixU().leftCols(take) * root.asDiagonal();
    y_new.topRows(take) = root.asDiagonal() * svd.matrixV().leftCols(take).adjoint();
    x_.half(k) = x_new;
    y_.half(k) = y_new;
  }
  rank_ = r_new;
  rank_drops_.push_back(iter_);
  return true;
}

bool Solver::iterate() {
  if (!initialized_) throw std::logic_error("Solver::iterate before initialize");
  const Index h = x_.half_count();

  std::vector<CMatrix> x_prev(static_cast<std::size_t>(h)), y_prev(static_cast<std::size_t>(h));
  for (Index k = 0; k < h; ++k) {
    x_prev[static_cast<std::size_t>(k)] = x_.half(k);
    y_prev[static_cast<std::size_t>(k)] = y_.half(k);
  }

#pragma omp parallel for schedule(static)
  for (Index k = 0; k < h; ++k) factor_step(k);

  // Max-modulus factor displacements; mirrored slices repeat moduli and
  // cannot change the maximum.
  double dx = 0.0, dy = 0.0;
  for (Index k = 0; k < h; ++k) {
    dx = std::max(dx, (x_.half(k) - x_prev[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff());
    dy = std::max(dy, (y_.half(k) - y_prev[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff());
  }
  delta_x_ = dx;
  delta_y_ = dy;

  assemble_z();
  update_w();
  ++iter_;

  double f = objective_spectral();
  if (!std::isfinite(f))
    throw NumericError("objective diverged at iteration " + std::to_string(iter_));
  trace_.push_back(f);

  maybe_decrease_rank();

  return delta_x_ <= cfg_.tol && delta_y_ <= cfg_.tol && delta_w_ <= cfg_.tol;
}

RecoveryResult Solver::run() {
  initialize();
  KktReport initial = kkt_residuals();

  bool converged = false;
  for (Index l = 0; l < cfg_.max_iters; ++l) {
    if (iterate()) {
      converged = true;
      break;
    }
  }
  KktReport final = kkt_residuals();

  RecoveryResult result;
  result.recovered = w_;
  result.objective = trace_;
  result.iterations = iter_;
  result.converged = converged;
  result.delta_x = delta_x_;
  result.delta_y = delta_y_;
  result.delta_w = delta_w_;
  result.initial_proj_x = initial.proj_x_total;
  result.initial_proj_y = initial.proj_y_total;
  result.final_proj_x = final.proj_x_total;
  result.final_proj_y = final.proj_y_total;
  result.w_kkt_residual = final.w_residual;
  result.z_max_abs = final.z_max_abs;
  result.final_rank = rank_;
  result.rank_drops = rank_drops_;
  return result;
}

double Solver::objective_spectral() const {
  // f0 = 1/(2 m3) sum_k ( ||Z_k - W_k||^2 + rho1 ||D Z_k||^2
  //                       + rho2 ||W_k D^T||^2 + mu ||W_k||^2 )
  // over the full spectrum, via half-spectrum weights.
  const Index h = zs_.half_count();
  std::vector<double> partial(static_cast<std::size_t>(h), 0.0);
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < h; ++k) {
    const CMatrix& zk = zs_.half(k);
    const CMatrix& wk = ws_.half(k);
    double term = (zk - wk).squaredNorm();
    if (cfg_.rho1 > 0.0) term += cfg_.rho1 * row_diff_squared_norm(zk);
    if (cfg_.rho2 > 0.0) term += cfg_.rho2 * col_diff_squared_norm(wk);
    term += cfg_.mu * wk.squaredNorm();
    partial[static_cast<std::size_t>(k)] = zs_.weight(k) * term;
  }
  double acc = 0.0;
  for (double p : partial) acc += p;  // fixed order, independent of threads
  return acc / (2.0 * static_cast<double>(g_.m3()));
}

double Solver::objective_real() const {
  return objective_real_domain(z_, w_, cfg_.rho1, cfg_.rho2, cfg_.mu);
}

KktReport Solver::kkt_residuals() const {
  const Index h = x_.half_count();
  KktReport report;
  report.slices.assign(static_cast<std::size_t>(h), SliceResiduals{});

#pragma omp parallel for schedule(static)
  for (Index k = 0; k < h; ++k) {
    const CMatrix& x = x_.half(k);
    const CMatrix& y = y_.half(k);
    const CMatrix& w = ws_.half(k);
    SliceResiduals& r = report.slices[static_cast<std::size_t>(k)];

    CMatrix gx = grad_h_x(x, y, w, h_rho1_);
    CMatrix gy = grad_h_y(x, y, w, h_rho1_);
    r.kkt_x = gx.norm();
    r.kkt_y = gy.norm();

    // Range-restricted residuals: project onto the singular subspaces that
    // the pseudoinverse-preconditioned steps can actually see.
    Eigen::JacobiSVD<CMatrix> svd_y(y, Eigen::ComputeThinU);
    const auto& sy = svd_y.singularValues();
    if (sy.size() > 0 && sy(0) > 0.0) {
      double cut = std::sqrt(cfg_.pinv_tol) * sy(0);
      Index kept = 0;
      for (Index i = 0; i < sy.size(); ++i)
        if (sy(i) > cut) ++kept;
      if (kept > 0) r.proj_x = (gx * svd_y.matrixU().leftCols(kept)).norm();
    }
    Eigen::JacobiSVD<CMatrix> svd_x(x, Eigen::ComputeThinV);
    const auto& sx = svd_x.singularValues();
    if (sx.size() > 0 && sx(0) > 0.0) {
      double cut = std::sqrt(cfg_.pinv_tol) * sx(0);
      Index kept = 0;
      for (Index i = 0; i < sx.size(); ++i)
        if (sx(i) > cut) ++kept;
      if (kept > 0) r.proj_y = (svd_x.matrixV().leftCols(kept).adjoint() * gy).norm();
    }
  }

  double px = 0.0, py = 0.0;
  for (Index k = 0; k < h; ++k) {
    const SliceResiduals& r = report.slices[static_cast<std::size_t>(k)];
    px += x_.weight(k) * r.proj_x * r.proj_x;
    py += x_.weight(k) * r.proj_y * r.proj_y;
  }
  report.proj_x_total = std::sqrt(px);
  report.proj_y_total = std::sqrt(py);

  const Index m3 = g_.m3();
  std::vector<double> w_res(static_cast<std::size_t>(m3), 0.0);
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < m3; ++k)
    w_res[static_cast<std::size_t>(k)] =
        w_kkt_residual(w_.slice(k), z_.slice(k), mask_, k, cfg_.mu, cfg_.rho2);
  for (double v : w_res) report.w_residual = std::max(report.w_residual, v);
  report.z_max_abs = z_.max_abs();
  return report;
}

double objective_real_domain(const TrafficTensor& z, const TrafficTensor& w,
                             double rho1, double rho2, double mu) {
  if (!z.same_dims(w)) throw ArgumentError("objective: dimension mismatch");
  double fit = 0.0, smooth = 0.0, periodic = 0.0, ridge = 0.0;
  for (Index k = 0; k < z.m3(); ++k) {
    fit += (z.slice(k) - w.slice(k)).squaredNorm();
    smooth += row_diff_squared_norm(Matrix(z.slice(k)));
    periodic += col_diff_squared_norm(Matrix(w.slice(k)));
    ridge += w.slice(k).squaredNorm();
  }
  return 0.5 * fit + 0.5 * mu * ridge + 0.5 * rho1 * smooth + 0.5 * rho2 * periodic;
}

}  // namespace tctf
