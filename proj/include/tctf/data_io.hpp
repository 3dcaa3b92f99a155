#pragma once

#include <cstdint>
#include <string>

#include "tctf/mask.hpp"
#include "tctf/tensor.hpp"

namespace tctf {

struct CsvOptions {
  char delimiter = ',';
  bool skip_header = false;
  bool clamp_negative = false;  // default: negative cells are a data error
};

// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

// Rectangular numeric CSV: rows = OD pairs, columns = time slots. Parse
// errors carry 1-based row/column coordinates.
Matrix load_traffic_csv(const std::string& path, const CsvOptions& options = {});

// Shortest-roundtrip decimal output, one row per line.
void write_csv(const std::string& path, const Matrix& values, char delimiter = ',');

// Reshapes an o x (t*d) traffic matrix into the t x d x o tensor: entry
// (i, j, k) is OD pair k at slot i of day j. The column count must be
// divisible by slots_per_day.
TrafficTensor shape_tensor(const Matrix& m, Index slots_per_day);

// Exact inverse of shape_tensor.
Matrix unshape_tensor(const TrafficTensor& t);

struct MaskSpec {
  double loss_probability = 0.0;  // in [0, 1): each entry missing independently
  std::uint64_t seed = 1;
};

ObservationMask generate_mask(Index m1, Index m2, Index m3, const MaskSpec& spec);

// Text mask format: header line "dims m1 m2 m3", then one "i j k" line per
// observed entry, 1-based. Round-trips exactly.
void write_mask(const std::string& path, const ObservationMask& mask);
ObservationMask load_mask(const std::string& path);

// Normalized mean absolute error over the missing entries only:
//   sum_missing |orig - rec| / sum_missing |orig|.
// A zero denominator is reported as an error, never as NaN.
double nmae(const TrafficTensor& original, const TrafficTensor& recovered,
            const ObservationMask& mask);

// Ground-truth generator: product of two seeded Gaussian factor tensors with
// inner dimension r0 (tubal rank <= r0), plus optional additive Gaussian
// noise of the given standard deviation.
TrafficTensor synth_low_tubal_rank(Index m1, Index m2, Index m3, Index r0,
                                   std::uint64_t seed, double noise_level = 0.0);

}  // namespace tctf
