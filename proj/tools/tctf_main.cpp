// tctf: recover missing entries of traffic tensors by low-tubal-rank
// factorization with temporal-stability and periodicity smoothing.
//
// Subcommands:
//   synth    generate a low-tubal-rank ground-truth CSV plus a mask file
//   recover  complete one masked tensor and report NMAE on the held-out part
//   sweep    NMAE-versus-loss-probability table over seeded trials

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "tctf/data_io.hpp"
#include "tctf/solver.hpp"

namespace {

using nlohmann::json;
using namespace tctf;

struct CommonOptions {
  std::string input;
  Index slots_per_day = 0;
  char delimiter = ',';
  bool skip_header = false;
  bool clamp_negative = false;
  Index rank = 0;
  double rho1 = 0.01;
  double rho2 = 0.01;
  double mu = 1e-4;
  double alpha = 1.0;
  double beta = 1.0;
  double tol = 1e-6;
  Index max_iters = 500;
  double pinv_tol = 1e-10;
  bool rank_adjust = false;
  std::uint64_t seed = 1;
  int threads = 0;
  bool timing = false;
};

void add_solver_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--rank", opt.rank, "Factor rank r (0 = auto)");
  cmd->add_option("--rho1", opt.rho1, "Temporal-stability weight");
  cmd->add_option("--rho2", opt.rho2, "Periodicity weight");
  cmd->add_option("--mu", opt.mu, "Ridge weight on the completed tensor (> 0)");
  cmd->add_option("--alpha", opt.alpha, "Base step scale for the X update");
  cmd->add_option("--beta", opt.beta, "Base step scale for the Y update");
  cmd->add_option("--tol", opt.tol, "Termination tolerance");
  cmd->add_option("--max-iters", opt.max_iters, "Iteration cap");
  cmd->add_option("--pinv-tol", opt.pinv_tol, "Relative pseudoinverse cutoff");
  cmd->add_flag("--rank-adjust", opt.rank_adjust, "Decrease rank on objective plateaus");
  cmd->add_option("--seed", opt.seed, "Base seed");
  cmd->add_option("--threads", opt.threads, "Worker threads (0 = library default)");
  cmd->add_flag("--timing", opt.timing, "Record wall time in the report (breaks byte-identical reports)");
}

void add_input_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--input", opt.input, "Traffic CSV, rows = OD pairs, columns = time slots")
      ->required();
  cmd->add_option("--slots-per-day", opt.slots_per_day, "Time slots per day (t)")->required();
  cmd->add_option("--delimiter", opt.delimiter, "CSV delimiter");
  cmd->add_flag("--header", opt.skip_header, "Skip one header line");
  cmd->add_flag("--clamp-negative", opt.clamp_negative, "Zero negative cells instead of failing");
}

SolverConfig make_config(const CommonOptions& opt) {
  SolverConfig cfg;
  cfg.rank = opt.rank;
  cfg.rho1 = opt.rho1;
  cfg.rho2 = opt.rho2;
  cfg.mu = opt.mu;
  cfg.alpha = opt.alpha;
  cfg.beta = opt.beta;
  cfg.tol = opt.tol;
  cfg.max_iters = opt.max_iters;
  cfg.pinv_tol = opt.pinv_tol;
  cfg.rank_adjust = opt.rank_adjust ? RankAdjust::decrease_on_plateau : RankAdjust::off;
  return cfg;
}

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

// The thread count is deliberately left out: reports are byte-identical for
// any --threads value.
json config_json(const CommonOptions& opt, const SolverConfig& cfg, Index effective_rank) {
  return json{{"rank", effective_rank},
              {"rho1", cfg.rho1},
              {"rho2", cfg.rho2},
              {"mu", cfg.mu},
              {"alpha", cfg.alpha},
              {"beta", cfg.beta},
              {"tol", cfg.tol},
              {"max_iters", cfg.max_iters},
              {"pinv_tol", cfg.pinv_tol},
              {"rank_adjust", cfg.rank_adjust == RankAdjust::decrease_on_plateau},
              {"seed", opt.seed},
              {"slots_per_day", opt.slots_per_day}};
}

void write_report(const std::string& path, const json& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report '" + path + "'");
  out << report.dump(2) << '\n';
  if (!out) throw DataError("write failed for report '" + path + "'");
}

struct TrialOutcome {
  double nmae = 0.0;
  RecoveryResult result;
};

TrialOutcome run_trial(const TrafficTensor& truth, double loss_p,
                       const ObservationMask* fixed_mask, std::uint64_t seed,
                       SolverConfig cfg) {
  ObservationMask mask =
      fixed_mask ? *fixed_mask
                 : generate_mask(truth.m1(), truth.m2(), truth.m3(), {loss_p, seed});
  cfg.seed = seed;
  Solver solver(truth, mask, cfg);
  TrialOutcome outcome;
  outcome.result = solver.run();
  // Vacuous when nothing is missing: the recovered tensor equals the data.
  outcome.nmae =
      mask.missing_count() == 0 ? 0.0 : nmae(truth, outcome.result.recovered, mask);
  return outcome;
}

int cmd_recover(const CommonOptions& opt, const std::string& mask_path, double loss_p,
                Index trials, const std::string& out_path, const std::string& report_path) {
  if (mask_path.empty() && !(loss_p >= 0.0 && loss_p < 1.0))
    throw ArgumentError("provide --mask or --loss-p in [0, 1)");
  if (!mask_path.empty() && trials > 1)
    throw ArgumentError("--trials > 1 needs generated masks; it cannot be combined with --mask");
  if (trials < 1) throw ArgumentError("--trials must be >= 1");

  apply_threads(opt.threads);
  auto t0 = std::chrono::steady_clock::now();

  Matrix table = load_traffic_csv(opt.input, {opt.delimiter, opt.skip_header, opt.clamp_negative});
  TrafficTensor truth = shape_tensor(table, opt.slots_per_day);
  SolverConfig cfg = make_config(opt);

  ObservationMask fixed_mask;
  bool have_fixed = !mask_path.empty();
  if (have_fixed) {
    fixed_mask = load_mask(mask_path);
    if (!fixed_mask.dims_match(truth))
      throw DataError("mask dims do not match the shaped tensor");
  }

  std::vector<double> nmae_trials;
  TrialOutcome first;
  for (Index t = 0; t < trials; ++t) {
    TrialOutcome outcome = run_trial(truth, loss_p, have_fixed ? &fixed_mask : nullptr,
                                     opt.seed + static_cast<std::uint64_t>(t), cfg);
    if (t == 0) first = outcome;
    nmae_trials.push_back(outcome.nmae);
  }
  double mean = 0.0;
  for (double v : nmae_trials) mean += v;
  mean /= static_cast<double>(nmae_trials.size());

  auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - t0).count();

  if (!out_path.empty()) write_csv(out_path, unshape_tensor(first.result.recovered), opt.delimiter);

  if (!report_path.empty()) {
    json report{{"schema", 1},
                {"config", config_json(opt, cfg, cfg.effective_rank(truth.m1(), truth.m2()))},
                {"nmae_mean", mean},
                {"nmae_trials", nmae_trials},
                {"objective_trace", first.result.objective},
                {"iterations", first.result.iterations},
                {"wall_ms", nullptr}};
    report["config"]["loss_p"] = have_fixed ? json(nullptr) : json(loss_p);
    report["config"]["mask_file"] = have_fixed ? json(mask_path) : json(nullptr);
    report["config"]["trials"] = trials;
    if (opt.timing) report["wall_ms"] = wall_ms;
    write_report(report_path, report);
  }

  std::cerr << "recover: nmae_mean=" << mean << " iterations=" << first.result.iterations
            << (first.result.converged ? "" : " (iteration cap reached)")
            << " wall_ms=" << wall_ms << '\n';
  return 0;
}

int cmd_sweep(const CommonOptions& opt, std::vector<double> loss_ps, Index trials,
              const std::string& out_path, const std::string& report_path) {
  if (loss_ps.empty()) throw ArgumentError("sweep needs at least one loss probability");
  for (std::size_t i = 0; i < loss_ps.size(); ++i) {
    if (!(loss_ps[i] >= 0.0 && loss_ps[i] < 1.0))
      throw ArgumentError("loss probabilities must lie in [0, 1)");
    if (i > 0 && loss_ps[i] <= loss_ps[i - 1])
      throw ArgumentError("loss probabilities must be strictly increasing");
  }
  if (trials < 1) throw ArgumentError("--trials must be >= 1");

  apply_threads(opt.threads);
  auto t0 = std::chrono::steady_clock::now();

  Matrix table = load_traffic_csv(opt.input, {opt.delimiter, opt.skip_header, opt.clamp_negative});
  TrafficTensor truth = shape_tensor(table, opt.slots_per_day);
  SolverConfig cfg = make_config(opt);

  std::vector<double> means, stds;
  json points = json::array();
  for (double p : loss_ps) {
    std::vector<double> values;
    for (Index t = 0; t < trials; ++t)
      values.push_back(
          run_trial(truth, p, nullptr, opt.seed + static_cast<std::uint64_t>(t), cfg).nmae);
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    double std_dev = values.size() > 1
                         ? std::sqrt(var / static_cast<double>(values.size() - 1))
                         : 0.0;
    means.push_back(mean);
    stds.push_back(std_dev);
    points.push_back(json{{"loss_p", p}, {"nmae_mean", mean}, {"nmae_std", std_dev},
                          {"nmae_trials", values}});
    std::cerr << "sweep: p=" << p << " nmae_mean=" << mean << '\n';
  }

  std::ostringstream csv;
  csv << "loss_p,nmae_mean,nmae_std\n";
  for (std::size_t i = 0; i < loss_ps.size(); ++i)
    csv << format_double(loss_ps[i]) << ',' << format_double(means[i]) << ','
        << format_double(stds[i]) << '\n';
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(out_path);
    if (!out) throw DataError("cannot write '" + out_path + "'");
    out << csv.str();
  }

  if (!report_path.empty()) {
    auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0).count();
    json report{{"schema", 1},
                {"config", config_json(opt, cfg, cfg.effective_rank(truth.m1(), truth.m2()))},
                {"points", points},
                {"wall_ms", nullptr}};
    report["config"]["trials"] = trials;
    if (opt.timing) report["wall_ms"] = wall_ms;
    write_report(report_path, report);
  }
  return 0;
}

int cmd_synth(std::vector<Index> dims, Index r0, double noise, std::uint64_t seed,
              double loss_p, const std::string& out_path, const std::string& mask_out) {
  if (dims.size() != 3) throw ArgumentError("--dims needs exactly three values: m1 m2 m3");
  TrafficTensor truth = synth_low_tubal_rank(dims[0], dims[1], dims[2], r0, seed, noise);
  write_csv(out_path, unshape_tensor(truth));
  if (!mask_out.empty()) {
    if (!(loss_p >= 0.0 && loss_p < 1.0))
      throw ArgumentError("--loss-p must lie in [0, 1)");
    write_mask(mask_out, generate_mask(dims[0], dims[1], dims[2], {loss_p, seed}));
  }
  std::cerr << "synth: wrote " << out_path << " (" << dims[0] << "x" << dims[1] << "x"
            << dims[2] << ", r0=" << r0 << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traffic tensor completion by regularized t-product factorization"};
  app.require_subcommand(1);

  CommonOptions opt;

  auto* recover = app.add_subcommand("recover", "Complete one masked tensor");
  std::string mask_path, out_path, report_path;
  double loss_p = -1.0;
  Index trials = 1;
  add_input_flags(recover, opt);
  add_solver_flags(recover, opt);
  recover->add_option("--mask", mask_path, "Mask file of observed entries");
  recover->add_option("--loss-p", loss_p, "Generate a mask with this loss probability");
  recover->add_option("--trials", trials, "Seeded repetitions (mask + init redrawn)");
  recover->add_option("--out", out_path, "Recovered tensor CSV");
  recover->add_option("--report", report_path, "JSON report path");

  auto* sweep = app.add_subcommand("sweep", "NMAE vs loss probability table");
  std::vector<double> loss_ps{0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 0.95};
  Index sweep_trials = 10;
  std::string sweep_out, sweep_report;
  add_input_flags(sweep, opt);
  add_solver_flags(sweep, opt);
  sweep->add_option("--loss-ps", loss_ps, "Loss probabilities, strictly increasing");
  sweep->add_option("--trials", sweep_trials, "Trials per point");
  sweep->add_option("--out", sweep_out, "Output CSV (stdout when omitted)");
  sweep->add_option("--report", sweep_report, "JSON report path");

  auto* synth = app.add_subcommand("synth", "Generate ground truth + mask fixtures");
  std::vector<Index> dims;
  Index r0 = 2;
  double noise = 0.0, synth_loss_p = 0.5;
  std::uint64_t synth_seed = 1;
  std::string synth_out, synth_mask_out;
  synth->add_option("--dims", dims, "Tensor dims: m1 m2 m3")->required()->expected(3);
  synth->add_option("--r0", r0, "Tubal rank of the ground truth");
  synth->add_option("--noise", noise, "Additive Gaussian noise standard deviation");
  synth->add_option("--seed", synth_seed, "Seed");
  synth->add_option("--loss-p", synth_loss_p, "Loss probability for the mask file");
  synth->add_option("--out", synth_out, "Ground-truth CSV path")->required();
  synth->add_option("--mask-out", synth_mask_out, "Mask file path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (recover->parsed())
      return cmd_recover(opt, mask_path, loss_p, trials, out_path, report_path);
    if (sweep->parsed()) return cmd_sweep(opt, loss_ps, sweep_trials, sweep_out, sweep_report);
    if (synth->parsed())
      return cmd_synth(dims, r0, noise, synth_seed, synth_loss_p, synth_out, synth_mask_out);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
