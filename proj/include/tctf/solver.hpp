#pragma once

#include <cstdint>
#include <vector>

#include "tctf/mask.hpp"
#include "tctf/regularizers.hpp"
#include "tctf/spectral.hpp"
#include "tctf/tensor.hpp"
#include "tctf/wsolve.hpp"

namespace tctf {

enum class RankAdjust { off, decrease_on_plateau };

struct SolverConfig {
  Index rank = 0;  // 0 -> min(10, ceil(min(m1, m2) / 4))
  double rho1 = 0.01;
  double rho2 = 0.01;
  double mu = 1e-4;
  // Trial fraction of the full preconditioned step (1 = the per-block
  // minimizer). The line search backtracks from here whenever a trial would
  // increase the slice objective.
  double alpha = 1.0;
  double beta = 1.0;
  double tol = 1e-6;
  Index max_iters = 500;
  double pinv_tol = 1e-10;  // relative singular-value cutoff for pseudoinverses
  RankAdjust rank_adjust = RankAdjust::off;
  std::uint64_t seed = 1;

  Index effective_rank(Index m1, Index m2) const;
  void validate() const;  // throws ArgumentError
};

// Gradients of the per-slice factor objective
//   h(X, Y) = 1/2 ( ||X Y - W||_F^2 + rho1 * ||D X Y||_F^2 )
// with respect to X and Y, packed as complex matrices whose real/imaginary
// parts are the partial derivatives in the real/imaginary coordinates.
// h_rho1 must be the operator I + rho1 * D^T D, so that
//   grad_x = h_rho1(X Y Y^*) - W Y^*,  grad_y = (X^* h_rho1(X)) Y - X^* W.
CMatrix grad_h_x(const CMatrix& x, const CMatrix& y, const CMatrix& w,
                 const ShiftedGram& h_rho1);
CMatrix grad_h_y(const CMatrix& x, const CMatrix& y, const CMatrix& w,
                 const ShiftedGram& h_rho1);

// h itself, for finite-difference checks and descent assertions.
double factor_objective(const CMatrix& x, const CMatrix& y, const CMatrix& w,
                        double rho1);

// Per-slice, per-iteration step diagnostics. Step fractions are in units of
// the full preconditioned direction; the paper-units step size is
// fraction * L.
struct StepInfo {
  double l1 = 0.0;          // ||H_rho1||_2 * ||Y Y^*||_2
  double l2 = 0.0;          // ||X^* H_rho1 X||_2
  double alpha_used = 0.0;  // accepted fraction (0 = step skipped)
  double beta_used = 0.0;
  int halvings_x = 0;       // backtracking halvings before acceptance
  int halvings_y = 0;
  double kappa_x = 0.0;  // descent coefficient at the accepted step
  double kappa_y = 0.0;
};

// Single-slice preconditioned update: X against the current Y and W, then Y
// against the updated X (Gauss-Seidel order). Each step backtracks (halving
// its fraction) until the slice objective does not increase and is skipped
// after ten futile halvings, which keeps the objective trace nonincreasing
// at machine precision.
struct FactorStepResult {
  CMatrix x_next;
  CMatrix y_next;
  CMatrix x_direction;  // -H_rho1^{-1} grad_x (Y Y^*)^+ at (x, y)
  CMatrix y_direction;  // -(X^* H_rho1 X)^+ grad_y at (x_next, y)
  StepInfo info;
};

FactorStepResult descent_step(const CMatrix& x, const CMatrix& y, const CMatrix& w,
                              const ShiftedGram& h_rho1, double h_norm,
                              const SolverConfig& cfg);

struct SliceResiduals {
  double kkt_x = 0.0;    // ||H_rho1 X (Y Y^*) - W Y^*||_F
  double kkt_y = 0.0;    // ||(X^* H_rho1 X) Y - X^* W||_F
  double proj_x = 0.0;   // ||grad_x h * U_Y1||_F (range-restricted gradient)
  double proj_y = 0.0;   // ||V_X1^* grad_y h||_F
};

struct KktReport {
  std::vector<SliceResiduals> slices;  // one per stored half-spectrum slice
  double proj_x_total = 0.0;           // sqrt(sum_k weight_k * proj_x^2)
  double proj_y_total = 0.0;
  double w_residual = 0.0;  // max over slices/entries of |(W K_mu_rho2 - Z)| off-mask
  double z_max_abs = 0.0;   // scale for the W residual criterion
};

struct RecoveryResult {
  TrafficTensor recovered;
  std::vector<double> objective;  // objective[0] is the initial state
  Index iterations = 0;
  bool converged = false;
  double delta_x = 0.0;  // last-iteration max-modulus factor displacements
  double delta_y = 0.0;
  double delta_w = 0.0;  // last-iteration Frobenius displacement of W
  double initial_proj_x = 0.0;
  double initial_proj_y = 0.0;
  double final_proj_x = 0.0;
  double final_proj_y = 0.0;
  double w_kkt_residual = 0.0;
  double z_max_abs = 0.0;
  Index final_rank = 0;
  std::vector<Index> rank_drops;  // iterations at which the rank was reduced
};

// Block coordinate gradient descent on the separable spectral model: scaled
// factor updates with pseudoinverse preconditioning per half-spectrum slice,
// followed by the exact per-slice data solve and the inverse transform.
// Slices are processed in parallel; results are independent of thread count
// and bit-reproducible for a fixed seed.
class Solver {
 public:
  Solver(const TrafficTensor& g, const ObservationMask& mask, SolverConfig config);

  // Seeded factor draw plus one data-solve pass to fill the unobserved
  // entries; establishes the conjugate-symmetry invariant.
  void initialize();

  // One outer iteration: X and Y updates, Z assembly, W solve, optional rank
  // decrease. Returns true when the termination criterion is satisfied.
  bool iterate();

  RecoveryResult run();

  // State accessors (valid after initialize()).
  const SpectralSlices& x_hat() const { return x_; }
  const SpectralSlices& y_hat() const { return y_; }
  const SpectralSlices& w_hat() const { return ws_; }
  const TrafficTensor& w() const { return w_; }
  const TrafficTensor& z() const { return z_; }
  Index current_rank() const { return rank_; }
  Index iteration() const { return iter_; }

  double objective_spectral() const;
  double objective_real() const;
  KktReport kkt_residuals() const;
  const std::vector<StepInfo>& last_step_info() const { return step_info_; }
  const std::vector<double>& objective_trace() const { return trace_; }
  double last_delta_x() const { return delta_x_; }
  double last_delta_y() const { return delta_y_; }
  double last_delta_w() const { return delta_w_; }

 private:
  void factor_step(Index k);
  void assemble_z();
  void update_w();
  bool maybe_decrease_rank();

  const TrafficTensor& g_;
  const ObservationMask& mask_;
  SolverConfig cfg_;
  Index rank_;
  ShiftedGram h_rho1_;
  double h_norm_;  // ||H_rho1||_2
  WPartitions parts_;

  SpectralSlices x_, y_, zs_, ws_;
  TrafficTensor w_, z_;
  std::vector<StepInfo> step_info_;
  std::vector<double> trace_;
  std::vector<Index> rank_drops_;
  double delta_x_ = 0.0, delta_y_ = 0.0, delta_w_ = 0.0;
  Index iter_ = 0;
  bool initialized_ = false;
};

// Real-domain evaluation of the full model objective (cross-check for the
// spectral form):
//   1/2 ||z - w||_F^2 + mu/2 ||w||_F^2
//   + rho1/2 ||D_m1 unfold(z, 1)||_F^2 + rho2/2 ||D_m2 unfold(w, 2)||_F^2.
double objective_real_domain(const TrafficTensor& z, const TrafficTensor& w,
                             double rho1, double rho2, double mu);

}  // namespace tctf
