#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "gil/array2d.hpp"
#include "gil/geometry.hpp"

namespace gil {

/// One pseudo-thermal speckle realization on the reference (CCD) grid.
/// By conjugacy the same array is the illumination on the target grid.
struct SpeckleFrame {
  Array2D<float> intensity;
  std::uint64_t frame_index = 0;
  std::uint64_t rng_seed = 0;
  GridSpec grid;
};

/// Speckle correlation length expressed in target-grid pixels.
double corr_len_pixels(const GridSpec &grid, double corr_len_target);

/// Generator of fully developed speckle with a prescribed intensity
/// autocovariance FWHM. A circular complex Gaussian field is drawn directly in
/// the spatial-frequency domain, shaped by the aperture, inverse transformed on
/// a padded (non-periodic at the crop) grid, and squared. Frames are
/// normalized to unit ensemble-mean intensity.
///
/// Construction builds the FFT plan and is not cheap; frame() is const and
/// safe to call concurrently.
class SpeckleSource {
public:
  SpeckleSource(const GridSpec &grid, double corr_len_target,
                ApertureShape aperture = ApertureShape::Gaussian);
  ~SpeckleSource();
  SpeckleSource(SpeckleSource &&) noexcept;
  SpeckleSource &operator=(SpeckleSource &&) noexcept;

  SpeckleFrame frame(std::uint64_t master_seed, std::uint64_t frame_index) const;

  const GridSpec &grid() const noexcept { return grid_; }
  std::size_t fft_nx() const noexcept { return fft_nx_; }
  std::size_t fft_ny() const noexcept { return fft_ny_; }

private:
  struct Plan;
  GridSpec grid_;
  std::size_t fft_nx_ = 0;
  std::size_t fft_ny_ = 0;
  std::vector<double> filter_; // aperture amplitude, already normalized
  std::unique_ptr<Plan> plan_;
};

SpeckleFrame generate_frame(std::uint64_t master_seed, std::uint64_t frame_index, const GridSpec &grid,
                            double corr_len_target, ApertureShape aperture = ApertureShape::Gaussian);

/// Frame values viewed on the target plane: identical samples, target pitch.
struct TargetIllumination {
  Array2D<float> values;
  double pitch = 0.0;
};

TargetIllumination sample_on_target(const SpeckleFrame &frame, const GridSpec &grid);

struct EnsembleStats {
  Image mean_map;
  Image var_map; // population variance per pixel
  double contrast = 0.0;
};

/// Per-pixel ensemble mean/variance and the pooled contrast
/// sqrt(mean(var_map)) / mean(mean_map).
EnsembleStats frame_ensemble_stats(std::span<const SpeckleFrame> frames);

} // namespace gil
