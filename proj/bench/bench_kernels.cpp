// Timing comparison of the OpenMP kernels against their serial reference
// implementations. Build target: tctf_bench.

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cstdio>
#include <functional>

#include "tctf/data_io.hpp"
#include "tctf/reference.hpp"
#include "tctf/rng.hpp"
#include "tctf/solver.hpp"
#include "tctf/tprod.hpp"

using namespace tctf;

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    best = std::min(best, secs);
  }
  return best;
}

TrafficTensor random_tensor(Index m1, Index m2, Index m3, std::uint64_t seed) {
  Rng rng(seed);
  TrafficTensor t(m1, m2, m3);
  for (Index idx = 0; idx < t.size(); ++idx) t.raw()[idx] = rng.next_gaussian();
  return t;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s serial %8.4fs   parallel %8.4fs   speedup %5.2fx\n", name, serial,
              parallel, serial / parallel);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP disabled)\n");
#endif

  {
    TrafficTensor t = random_tensor(96, 7, 529, 1);
    SpectralSlices s = forward(t);
    double serial = time_best_of(3, [&] { (void)reference::forward_serial(t); });
    double parallel = time_best_of(3, [&] { (void)forward(t); });
    report("mode-3 DFT forward", serial, parallel);

    serial = time_best_of(3, [&] { (void)reference::inverse_serial(s); });
    parallel = time_best_of(3, [&] { (void)inverse(s); });
    report("mode-3 DFT inverse", serial, parallel);
  }

  {
    TrafficTensor a = random_tensor(30, 20, 40, 2);
    TrafficTensor b = random_tensor(20, 25, 40, 3);
    double serial = time_best_of(3, [&] { (void)reference::tproduct_bcirc(a, b); });
    double parallel = time_best_of(3, [&] { (void)tproduct(a, b); });
    report("t-product (30x20x40)", serial, parallel);
  }

  {
    TrafficTensor z = random_tensor(144, 7, 121, 4);
    TrafficTensor g = random_tensor(144, 7, 121, 5);
    ObservationMask mask = generate_mask(144, 7, 121, {0.7, 6});
    WPartitions parts(mask, 1e-4, 0.01);
    // Serial = one thread; parallel = all threads over slices.
#ifdef _OPENMP
    int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    double serial = time_best_of(3, [&] { (void)solve_w_all(parts, z, g, mask); });
    omp_set_num_threads(saved);
    double parallel = time_best_of(3, [&] { (void)solve_w_all(parts, z, g, mask); });
#else
    double serial = time_best_of(3, [&] { (void)solve_w_all(parts, z, g, mask); });
    double parallel = serial;
#endif
    report("data solve (144x7x121)", serial, parallel);
  }

  {
    TrafficTensor truth = synth_low_tubal_rank(64, 14, 61, 3, 7);
    ObservationMask mask = generate_mask(64, 14, 61, {0.5, 8});
    SolverConfig cfg;
    cfg.rank = 3;
    cfg.max_iters = 25;
#ifdef _OPENMP
    int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    double serial = time_best_of(2, [&] {
      Solver solver(truth, mask, cfg);
      (void)solver.run();
    });
    omp_set_num_threads(saved);
    double parallel = time_best_of(2, [&] {
      Solver solver(truth, mask, cfg);
      (void)solver.run();
    });
#else
    double serial = time_best_of(2, [&] {
      Solver solver(truth, mask, cfg);
      (void)solver.run();
    });
    double parallel = serial;
#endif
    report("25 solver iterations", serial, parallel);
  }

  return 0;
}
