#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gil/array2d.hpp"
#include "gil/forward.hpp"

namespace gil {

class RecordReader;
class RecordWriter;

/// Streaming sufficient statistics for the intensity-fluctuation correlation
///
///   dG_s(x) = <B_s I(x)> - <B_s><I(x)>,  s = 1..m
///
/// Plain double sums; merge() adds fields, so any partition of the
/// measurement multiset reduces to the same statistics.
class CorrelationAccumulator {
public:
  CorrelationAccumulator() = default;
  CorrelationAccumulator(std::size_t m, std::size_t nx, std::size_t ny);

  /// Rejects (without modifying state) mismatched sizes and non-finite
  /// values; errors name measurement `index`.
  void add(std::span<const float> intensity, std::span<const double> slices, std::uint64_t index);
  void add(std::span<const float> intensity, std::span<const double> slices) {
    add(intensity, slices, n_);
  }
  void add(const Measurement &m) { add(m.frame.intensity.flat(), m.slices.B, m.index); }
  void merge(const CorrelationAccumulator &other);

  std::uint64_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  const std::vector<double> &sum_B() const noexcept { return sum_B_; }
  const std::vector<double> &sum_I() const noexcept { return sum_I_; }
  /// Slice-major: element (s, pixel) at s * nx * ny + pixel.
  const std::vector<double> &sum_BI() const noexcept { return sum_BI_; }

private:
  std::size_t m_ = 0, nx_ = 0, ny_ = 0;
  std::uint64_t n_ = 0;
  std::vector<double> sum_B_, sum_I_, sum_BI_;
  std::vector<double> scratch_;
};

enum class Normalization { None, PerSliceMinMax, PerSliceZScore, GlobalMinMax };

std::string to_string(Normalization n);
Normalization parse_normalization(const std::string &s);

/// m tomographic slice images; dG values are signed.
struct SliceStack {
  std::size_t m = 0, nx = 0, ny = 0;
  std::uint64_t n_used = 0;
  Normalization normalization = Normalization::None;
  std::vector<double> data; // slice-major, row-major within a slice

  double &at(std::size_t s0, std::size_t ix, std::size_t iy) { return data[(s0 * ny + iy) * nx + ix]; }
  double at(std::size_t s0, std::size_t ix, std::size_t iy) const { return data[(s0 * ny + iy) * nx + ix]; }
  /// Copy of 1-based slice s.
  Image slice(int s) const;

  bool operator==(const SliceStack &) const = default;
};

/// Throws InsufficientDataError when fewer than two measurements were seen.
SliceStack finalize(const CorrelationAccumulator &acc);

/// per_slice_minmax maps each slice onto [0, 1]; per_slice_zscore gives each
/// slice zero mean and unit population variance; global_minmax maps the whole
/// stack onto [0, 1]. Constant slices (or a constant stack) become zeros.
SliceStack normalize_slices(const SliceStack &stack, Normalization mode);

/// dG for 1-based slice s from a set of measurements.
Image reconstruct_slice(std::span<const Measurement> measurements, int s);

/// Measurements per accumulation block. Blocks are accumulated in order and
/// merged in block order, so the reduction tree (and hence every bit of the
/// result) is independent of the worker count and of replay vs. live runs.
inline constexpr std::uint64_t kAccumulationBlock = 256;

/// Simulates measurements 0..n-1, optionally recording them, and returns the
/// reduced statistics.
CorrelationAccumulator accumulate_campaign(const Campaign &campaign, std::uint64_t n, unsigned workers,
                                           RecordWriter *record = nullptr);

/// Replays a record through the same blocked reduction.
CorrelationAccumulator accumulate_record(RecordReader &reader);

/// Stack file, little-endian: u32 magic "GISK", u32 version (1), u32 m,
/// u32 nx, u32 ny, u64 n_used, u32 normalization (0 none, 1 per-slice
/// min-max, 2 per-slice z-score, 3 global min-max), then m*ny*nx float64.
inline constexpr std::uint32_t kStackMagic = 0x4B534947; // "GISK"
void write_stack(const std::string &path, const SliceStack &stack);
SliceStack read_stack(const std::string &path);

} // namespace gil
