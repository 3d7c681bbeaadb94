#include "gil/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "gil/error.hpp"
#include "gil/io.hpp"
#include "gil/parallel.hpp"
#include "gil/record.hpp"

namespace gil {

CorrelationAccumulator::CorrelationAccumulator(std::size_t m, std::size_t nx, std::size_t ny)
    : m_(m), nx_(nx), ny_(ny), sum_B_(m, 0.0), sum_I_(nx * ny, 0.0), sum_BI_(m * nx * ny, 0.0),
      scratch_(nx * ny) {}

void CorrelationAccumulator::add(std::span<const float> intensity, std::span<const double> slices,
                                 std::uint64_t index) {
  const std::size_t npix = nx_ * ny_;
  if (intensity.size() != npix || slices.size() != m_)
    throw DimensionError("accumulate: measurement " + std::to_string(index) + " has " +
                         std::to_string(intensity.size()) + " pixels and " + std::to_string(slices.size()) +
                         " slices, expected " + std::to_string(npix) + " and " + std::to_string(m_));
  for (std::size_t i = 0; i < npix; ++i) {
    if (!std::isfinite(intensity[i]))
      throw NonFiniteError("accumulate: non-finite intensity in measurement " + std::to_string(index));
    scratch_[i] = intensity[i];
  }
  for (double b : slices)
    if (!std::isfinite(b))
      throw NonFiniteError("accumulate: non-finite bucket value in measurement " + std::to_string(index));

  for (std::size_t i = 0; i < npix; ++i)
    sum_I_[i] += scratch_[i];
  const double *I = scratch_.data();
  for (std::size_t s = 0; s < m_; ++s) {
    const double b = slices[s];
    sum_B_[s] += b;
    if (b == 0.0)
      continue; // adds exact zeros
    double *row = sum_BI_.data() + s * npix;
    for (std::size_t i = 0; i < npix; ++i)
      row[i] += b * I[i];
  }
  ++n_;
}

void CorrelationAccumulator::merge(const CorrelationAccumulator &other) {
  if (other.m_ != m_ || other.nx_ != nx_ || other.ny_ != ny_)
    throw DimensionError("accumulate: cannot merge accumulators of different shape");
  for (std::size_t i = 0; i < sum_B_.size(); ++i)
    sum_B_[i] += other.sum_B_[i];
  for (std::size_t i = 0; i < sum_I_.size(); ++i)
    sum_I_[i] += other.sum_I_[i];
  for (std::size_t i = 0; i < sum_BI_.size(); ++i)
    sum_BI_[i] += other.sum_BI_[i];
  n_ += other.n_;
}

std::string to_string(Normalization n) {
  switch (n) {
  case Normalization::None: return "none";
  case Normalization::PerSliceMinMax: return "per_slice_minmax";
  case Normalization::PerSliceZScore: return "per_slice_zscore";
  case Normalization::GlobalMinMax: return "global_minmax";
  }
  return "none";
}

Normalization parse_normalization(const std::string &s) {
  for (auto n : {Normalization::None, Normalization::PerSliceMinMax, Normalization::PerSliceZScore,
                 Normalization::GlobalMinMax})
    if (to_string(n) == s)
      return n;
  throw ConfigError("unknown normalization '" + s +
                    "' (expected none, per_slice_minmax, per_slice_zscore or global_minmax)");
}

Image SliceStack::slice(int s) const {
  if (s < 1 || static_cast<std::size_t>(s) > m)
    throw IndexError("slice index " + std::to_string(s) + " outside [1, " + std::to_string(m) + "]");
  const auto begin = data.begin() + static_cast<std::ptrdiff_t>((s - 1) * nx * ny);
  return Image(nx, ny, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(nx * ny)));
}

SliceStack finalize(const CorrelationAccumulator &acc) {
  if (acc.n() < 2)
    throw InsufficientDataError("finalize: need at least 2 measurements, have " + std::to_string(acc.n()));
  SliceStack st;
  st.m = acc.m();
  st.nx = acc.nx();
  st.ny = acc.ny();
  st.n_used = acc.n();
  const std::size_t npix = st.nx * st.ny;
  const double n = static_cast<double>(acc.n());
  st.data.resize(st.m * npix);
  for (std::size_t s = 0; s < st.m; ++s) {
    const double mean_b = acc.sum_B()[s] / n;
    for (std::size_t i = 0; i < npix; ++i)
      st.data[s * npix + i] = acc.sum_BI()[s * npix + i] / n - mean_b * (acc.sum_I()[i] / n);
  }
  return st;
}

SliceStack normalize_slices(const SliceStack &stack, Normalization mode) {
  SliceStack out = stack;
  out.normalization = mode;
  const std::size_t npix = stack.nx * stack.ny;
  auto minmax = [](auto first, auto last) {
    if (first == last)
      return;
    const auto [lo_it, hi_it] = std::minmax_element(first, last);
    const double lo = *lo_it, hi = *hi_it;
    for (auto it = first; it != last; ++it)
      *it = hi > lo ? (*it - lo) / (hi - lo) : 0.0;
  };
  switch (mode) {
  case Normalization::None:
    break;
  case Normalization::GlobalMinMax:
    minmax(out.data.begin(), out.data.end());
    break;
  case Normalization::PerSliceMinMax:
    for (std::size_t s = 0; s < stack.m; ++s)
      minmax(out.data.begin() + static_cast<std::ptrdiff_t>(s * npix),
             out.data.begin() + static_cast<std::ptrdiff_t>((s + 1) * npix));
    break;
  case Normalization::PerSliceZScore:
    for (std::size_t s = 0; s < stack.m; ++s) {
      double *v = out.data.data() + s * npix;
      double mean = 0.0;
      for (std::size_t i = 0; i < npix; ++i)
        mean += v[i];
      mean /= static_cast<double>(npix);
      double var = 0.0;
      for (std::size_t i = 0; i < npix; ++i)
        var += (v[i] - mean) * (v[i] - mean);
      var /= static_cast<double>(npix);
      const double sd = std::sqrt(var);
      for (std::size_t i = 0; i < npix; ++i)
        v[i] = sd > 0.0 ? (v[i] - mean) / sd : 0.0;
    }
    break;
  }
  return out;
}

Image reconstruct_slice(std::span<const Measurement> measurements, int s) {
  if (measurements.empty())
    throw InsufficientDataError("reconstruct_slice: no measurements");
  const auto &first = measurements.front();
  if (s < 1 || static_cast<std::size_t>(s) > first.slices.B.size())
    throw IndexError("slice index " + std::to_string(s) + " outside [1, " +
                     std::to_string(first.slices.B.size()) + "]");
  CorrelationAccumulator acc(first.slices.B.size(), first.frame.intensity.nx(), first.frame.intensity.ny());
  for (const auto &m : measurements)
    acc.add(m);
  return finalize(acc).slice(s);
}

CorrelationAccumulator accumulate_campaign(const Campaign &campaign, std::uint64_t n, unsigned workers,
                                           RecordWriter *record) {
  if (n < 2)
    throw InsufficientDataError("campaign: need at least 2 measurements, got " + std::to_string(n));
  const auto &cfg = campaign.config();
  const auto m = static_cast<std::size_t>(cfg.n_slices);
  const auto nx = static_cast<std::size_t>(cfg.grid_nx), ny = static_cast<std::size_t>(cfg.grid_ny);
  struct Block {
    CorrelationAccumulator acc;
    std::vector<Measurement> measurements;
  };
  CorrelationAccumulator total(m, nx, ny);
  const std::uint64_t blocks = (n + kAccumulationBlock - 1) / kAccumulationBlock;
  ordered_parallel(
      static_cast<std::size_t>(blocks), workers,
      [&](std::size_t b) {
        Block blk{CorrelationAccumulator(m, nx, ny), {}};
        const std::uint64_t begin = b * kAccumulationBlock, end = std::min(n, begin + kAccumulationBlock);
        for (auto k = begin; k < end; ++k) {
          auto meas = campaign.measure(k);
          blk.acc.add(meas);
          if (record)
            blk.measurements.push_back(std::move(meas));
        }
        return blk;
      },
      [&](std::size_t, Block &&blk) {
        if (record)
          for (const auto &meas : blk.measurements)
            record->write(meas);
        total.merge(blk.acc);
      });
  return total;
}

CorrelationAccumulator accumulate_record(RecordReader &reader) {
  const auto &h = reader.header();
  if (h.n < 2)
    throw InsufficientDataError("record holds " + std::to_string(h.n) + " measurements; need at least 2");
  CorrelationAccumulator total(h.m, h.nx, h.ny);
  CorrelationAccumulator block(h.m, h.nx, h.ny);
  const CorrelationAccumulator empty(h.m, h.nx, h.ny);
  std::uint64_t in_block = 0;
  while (reader.remaining() > 0) {
    block.add(reader.next());
    if (++in_block == kAccumulationBlock || reader.remaining() == 0) {
      total.merge(block);
      block = empty;
      in_block = 0;
    }
  }
  return total;
}

void write_stack(const std::string &path, const SliceStack &stack) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write stack '" + path + "'");
  write_u32(out, kStackMagic);
  write_u32(out, 1);
  write_u32(out, static_cast<std::uint32_t>(stack.m));
  write_u32(out, static_cast<std::uint32_t>(stack.nx));
  write_u32(out, static_cast<std::uint32_t>(stack.ny));
  write_u64(out, stack.n_used);
  write_u32(out, static_cast<std::uint32_t>(stack.normalization));
  for (double v : stack.data)
    write_f64(out, v);
  if (!out)
    throw IoError("write failed for stack '" + path + "'");
}

SliceStack read_stack(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open stack '" + path + "'");
  SliceStack st;
  try {
    if (read_u32(in) != kStackMagic)
      throw IoError("not a slice stack");
    if (read_u32(in) != 1)
      throw IoError("unsupported stack version");
    st.m = read_u32(in);
    st.nx = read_u32(in);
    st.ny = read_u32(in);
    st.n_used = read_u64(in);
    const auto norm = read_u32(in);
    if (norm > 3)
      throw IoError("bad normalization code");
    st.normalization = static_cast<Normalization>(norm);
    st.data.resize(st.m * st.nx * st.ny);
    for (auto &v : st.data)
      v = read_f64(in);
  } catch (const IoError &e) {
    throw IoError("stack '" + path + "': " + e.what());
  }
  return st;
}

} // namespace gil
