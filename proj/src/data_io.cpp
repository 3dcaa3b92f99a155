#include "tctf/data_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tctf/rng.hpp"
#include "tctf/tprod.hpp"

namespace tctf {

namespace {

// Substream tags for the synthetic generator.
constexpr std::uint64_t kStreamFactorC = 21;
constexpr std::uint64_t kStreamFactorH = 22;
constexpr std::uint64_t kStreamNoise = 23;

double parse_cell(const std::string& cell, Index row, Index col) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r'))
    --end;
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw DataError("non-numeric cell at row " + std::to_string(row + 1) + ", column " +
                    std::to_string(col + 1) + ": '" + cell + "'");
  return value;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Matrix load_traffic_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  Index line_no = 0;
  bool skipped_header = false;
  while (std::getline(in, line)) {
    if (options.skip_header && !skipped_header) {
      skipped_header = true;
      continue;
    }
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    Index col = 0;
    while (std::getline(ss, cell, options.delimiter)) {
      row.push_back(parse_cell(cell, line_no, col));
      ++col;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError("ragged row " + std::to_string(line_no + 1) + ": got " +
                      std::to_string(row.size()) + " cells, expected " +
                      std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
    ++line_no;
  }
  if (rows.empty()) throw DataError("'" + path + "' contains no data rows");

  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) {
      double v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (!std::isfinite(v))
        throw DataError("non-finite value at row " + std::to_string(i + 1) + ", column " +
                        std::to_string(j + 1));
      if (v < 0.0) {
        if (!options.clamp_negative)
          throw DataError("negative traffic value at row " + std::to_string(i + 1) +
                          ", column " + std::to_string(j + 1) +
                          " (pass clamp option to zero it)");
        v = 0.0;
      }
      out(i, j) = v;
    }
  return out;
}

void write_csv(const std::string& path, const Matrix& values, char delimiter) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) out << delimiter;
      out << format_double(values(i, j));
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

TrafficTensor shape_tensor(const Matrix& m, Index slots_per_day) {
  const Index o = m.rows(), total = m.cols();
  if (slots_per_day < 1) throw ArgumentError("slots_per_day must be >= 1");
  if (total % slots_per_day != 0)
    throw ArgumentError("time-slot count " + std::to_string(total) +
                        " is not divisible by slots-per-day " + std::to_string(slots_per_day));
  const Index days = total / slots_per_day;
  TrafficTensor t(slots_per_day, days, o);
  for (Index k = 0; k < o; ++k) {
    auto s = t.slice(k);
    for (Index j = 0; j < days; ++j)
      for (Index i = 0; i < slots_per_day; ++i) s(i, j) = m(k, j * slots_per_day + i);
  }
  return t;
}

Matrix unshape_tensor(const TrafficTensor& t) {
  Matrix m(t.m3(), t.m1() * t.m2());
  for (Index k = 0; k < t.m3(); ++k) {
    auto s = t.slice(k);
    for (Index j = 0; j < t.m2(); ++j)
      for (Index i = 0; i < t.m1(); ++i) m(k, j * t.m1() + i) = s(i, j);
  }
  return m;
}

ObservationMask generate_mask(Index m1, Index m2, Index m3, const MaskSpec& spec) {
  if (!(spec.loss_probability >= 0.0 && spec.loss_probability < 1.0))
    throw ArgumentError("loss probability must lie in [0, 1)");
  ObservationMask mask(m1, m2, m3);
  Rng rng(spec.seed);
  // Linear layout order, one uniform draw per entry.
  for (Index k = 0; k < m3; ++k)
    for (Index j = 0; j < m2; ++j)
      for (Index i = 0; i < m1; ++i)
        mask.set(i, j, k, rng.next_unit() >= spec.loss_probability);
  return mask;
}

void write_mask(const std::string& path, const ObservationMask& mask) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "dims " << mask.m1() << ' ' << mask.m2() << ' ' << mask.m3() << '\n';
  for (Index k = 0; k < mask.m3(); ++k)
    for (Index j = 0; j < mask.m2(); ++j)
      for (Index i = 0; i < mask.m1(); ++i)
        if (mask.observed(i, j, k))
          out << (i + 1) << ' ' << (j + 1) << ' ' << (k + 1) << '\n';
  if (!out) throw DataError("write failed for '" + path + "'");
}

ObservationMask load_mask(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw DataError("mask file '" + path + "' is empty");
  std::istringstream hs(header);
  std::string tag;
  Index m1 = 0, m2 = 0, m3 = 0;
  if (!(hs >> tag >> m1 >> m2 >> m3) || tag != "dims")
    throw DataError("mask file '" + path + "' must start with 'dims m1 m2 m3'");
  if (m1 < 1 || m2 < 1 || m3 < 1) throw DataError("mask file declares invalid dims");

  ObservationMask mask(m1, m2, m3);
  std::string line;
  Index line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    Index i = 0, j = 0, k = 0;
    std::string extra;
    if (!(ls >> i >> j >> k) || (ls >> extra))
      throw DataError("malformed mask entry at line " + std::to_string(line_no));
    if (i < 1 || i > m1 || j < 1 || j > m2 || k < 1 || k > m3)
      throw DataError("mask entry out of range at line " + std::to_string(line_no));
    mask.set(i - 1, j - 1, k - 1, true);
  }
  return mask;
}

double nmae(const TrafficTensor& original, const TrafficTensor& recovered,
            const ObservationMask& mask) {
  if (!original.same_dims(recovered) || !mask.dims_match(original))
    throw ArgumentError("nmae: dimension mismatch");
  double num = 0.0, den = 0.0;
  for (Index k = 0; k < original.m3(); ++k)
    for (Index j = 0; j < original.m2(); ++j)
      for (Index i = 0; i < original.m1(); ++i) {
        if (mask.observed(i, j, k)) continue;
        num += std::abs(original(i, j, k) - recovered(i, j, k));
        den += std::abs(original(i, j, k));
      }
  if (den == 0.0)
    throw DataError("NMAE undefined: missing entries of the reference sum to zero");
  return num / den;
}

TrafficTensor synth_low_tubal_rank(Index m1, Index m2, Index m3, Index r0,
                                   std::uint64_t seed, double noise_level) {
  if (r0 < 0 || r0 > std::min(m1, m2))
    throw ArgumentError("synthetic rank must lie in [0, min(m1, m2)]");
  if (noise_level < 0.0) throw ArgumentError("noise level must be >= 0");
  if (r0 == 0) return TrafficTensor(m1, m2, m3);

  // Half-normal factor entries: a t-product of entrywise nonnegative tensors
  // is entrywise nonnegative (block-circulant action involves no
  // subtraction), so the fixture behaves like traffic volumes while keeping
  // tubal rank <= r0.
  Rng rng_c(seed, kStreamFactorC);
  Rng rng_h(seed, kStreamFactorH);
  TrafficTensor c(m1, r0, m3), h(r0, m2, m3);
  for (Index k = 0; k < m3; ++k) {
    auto cs = c.slice(k);
    for (Index j = 0; j < r0; ++j)
      for (Index i = 0; i < m1; ++i) cs(i, j) = std::abs(rng_c.next_gaussian());
    auto hs = h.slice(k);
    for (Index j = 0; j < m2; ++j)
      for (Index i = 0; i < r0; ++i) hs(i, j) = std::abs(rng_h.next_gaussian());
  }
  TrafficTensor out = tproduct(c, h);
  if (noise_level > 0.0) {
    Rng rng_n(seed, kStreamNoise);
    for (Index k = 0; k < m3; ++k) {
      auto s = out.slice(k);
      for (Index j = 0; j < m2; ++j)
        for (Index i = 0; i < m1; ++i)
          s(i, j) = std::max(0.0, s(i, j) + noise_level * rng_n.next_gaussian());
    }
  }
  return out;
}

}  // namespace tctf
