#include "gil/speckle.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "gil/error.hpp"
#include "gil/rng.hpp"

namespace gil {

namespace {

// The FFTW planner is not reentrant; fftw_execute_dft on an existing plan is.
std::mutex &planner_mutex() {
  static std::mutex m;
  return m;
}

double signed_freq(std::size_t k, std::size_t n) {
  const auto kk = static_cast<double>(k);
  return (2 * k <= n ? kk : kk - static_cast<double>(n)) / static_cast<double>(n);
}

// Disk radius in cycles/pixel giving a jinc^2 autocovariance of unit FWHM
// (first half-maximum of (2 J1(u)/u)^2 at u = 1.61634).
constexpr double kDiskFwhmConstant = 0.514496985;

} // namespace

struct SpeckleSource::Plan {
  fftw_plan plan = nullptr;
  ~Plan() {
    if (plan) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

double corr_len_pixels(const GridSpec &grid, double corr_len_target) {
  return corr_len_target / grid.pitch_target;
}

SpeckleSource::SpeckleSource(const GridSpec &grid, double corr_len_target, ApertureShape aperture)
    : grid_(grid) {
  if (grid.nx == 0 || grid.ny == 0)
    throw ConfigError("speckle: grid must be non-empty");
  if (!(grid.pitch_target > 0.0))
    throw ConfigError("speckle: target pitch must be > 0");
  if (!(std::isfinite(corr_len_target) && corr_len_target >= grid.pitch_target))
    throw ConfigError("speckle: correlation length " + std::to_string(corr_len_target) +
                      " m is below the resolvable bound of one target pixel (" +
                      std::to_string(grid.pitch_target) + " m)");

  const double w = corr_len_pixels(grid, corr_len_target);
  const auto pad = static_cast<std::size_t>(std::max(8.0, std::ceil(4.0 * w)));
  fft_nx_ = grid.nx + pad;
  fft_ny_ = grid.ny + pad;

  filter_.resize(fft_nx_ * fft_ny_);
  double power = 0.0;
  if (aperture == ApertureShape::Gaussian) {
    // Field correlation exp(-r^2 / 2 s^2) gives intensity covariance
    // exp(-r^2 / s^2), whose FWHM is 2 s sqrt(ln 2).
    const double s = w / (2.0 * std::sqrt(std::numbers::ln2));
    const double k = std::numbers::pi * std::numbers::pi * s * s;
    for (std::size_t iy = 0; iy < fft_ny_; ++iy)
      for (std::size_t ix = 0; ix < fft_nx_; ++ix) {
        const double fx = signed_freq(ix, fft_nx_);
        const double fy = signed_freq(iy, fft_ny_);
        const double h = std::exp(-k * (fx * fx + fy * fy));
        filter_[iy * fft_nx_ + ix] = h;
        power += h * h;
      }
  } else {
    const double fc = kDiskFwhmConstant / w;
    for (std::size_t iy = 0; iy < fft_ny_; ++iy)
      for (std::size_t ix = 0; ix < fft_nx_; ++ix) {
        const double fx = signed_freq(ix, fft_nx_);
        const double fy = signed_freq(iy, fft_ny_);
        const double h = (fx * fx + fy * fy <= fc * fc) ? 1.0 : 0.0;
        filter_[iy * fft_nx_ + ix] = h;
        power += h;
      }
  }
  if (!(power > 0.0))
    throw ConfigError("speckle: aperture passes no spatial frequencies");
  const double norm = 1.0 / std::sqrt(power);
  for (auto &h : filter_)
    h *= norm;

  std::vector<std::complex<double>> scratch(fft_nx_ * fft_ny_);
  auto *buf = reinterpret_cast<fftw_complex *>(scratch.data());
  plan_ = std::make_unique<Plan>();
  std::lock_guard lock(planner_mutex());
  plan_->plan = fftw_plan_dft_2d(static_cast<int>(fft_ny_), static_cast<int>(fft_nx_), buf, buf,
                                 FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan_->plan)
    throw ConfigError("speckle: FFT planning failed");
}

SpeckleSource::~SpeckleSource() = default;
SpeckleSource::SpeckleSource(SpeckleSource &&) noexcept = default;
SpeckleSource &SpeckleSource::operator=(SpeckleSource &&) noexcept = default;

SpeckleFrame SpeckleSource::frame(std::uint64_t master_seed, std::uint64_t frame_index) const {
  auto rng = substream(master_seed, Substream::Speckle, frame_index);
  std::vector<std::complex<double>> field(fft_nx_ * fft_ny_);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double h = filter_[i];
    if (h == 0.0)
      continue;
    const auto [a, b] = rng.normal_pair();
    field[i] = std::complex<double>(a, b) * (h * std::numbers::sqrt2 / 2.0);
  }
  auto *buf = reinterpret_cast<fftw_complex *>(field.data());
  fftw_execute_dft(plan_->plan, buf, buf);

  SpeckleFrame out;
  out.intensity = Array2D<float>(grid_.nx, grid_.ny);
  out.frame_index = frame_index;
  out.rng_seed = master_seed;
  out.grid = grid_;
  for (std::size_t iy = 0; iy < grid_.ny; ++iy)
    for (std::size_t ix = 0; ix < grid_.nx; ++ix)
      out.intensity(ix, iy) = static_cast<float>(std::norm(field[iy * fft_nx_ + ix]));
  return out;
}

SpeckleFrame generate_frame(std::uint64_t master_seed, std::uint64_t frame_index, const GridSpec &grid,
                            double corr_len_target, ApertureShape aperture) {
  return SpeckleSource(grid, corr_len_target, aperture).frame(master_seed, frame_index);
}

TargetIllumination sample_on_target(const SpeckleFrame &frame, const GridSpec &grid) {
  if (!frame.intensity.same_shape(grid.nx, grid.ny))
    throw DimensionError("speckle: frame is " + std::to_string(frame.intensity.nx()) + "x" +
                         std::to_string(frame.intensity.ny()) + ", target grid is " +
                         std::to_string(grid.nx) + "x" + std::to_string(grid.ny));
  return {frame.intensity, grid.pitch_target};
}

EnsembleStats frame_ensemble_stats(std::span<const SpeckleFrame> frames) {
  if (frames.size() < 2)
    throw InsufficientDataError("speckle: ensemble statistics need at least 2 frames");
  const auto nx = frames[0].intensity.nx();
  const auto ny = frames[0].intensity.ny();
  EnsembleStats st{Image(nx, ny), Image(nx, ny), 0.0};
  for (const auto &f : frames) {
    if (!f.intensity.same_shape(nx, ny))
      throw DimensionError("speckle: ensemble frames differ in shape");
    for (std::size_t i = 0; i < st.mean_map.size(); ++i)
      st.mean_map[i] += f.intensity[i];
  }
  const double n = static_cast<double>(frames.size());
  for (std::size_t i = 0; i < st.mean_map.size(); ++i)
    st.mean_map[i] /= n;
  for (const auto &f : frames)
    for (std::size_t i = 0; i < st.var_map.size(); ++i) {
      const double d = f.intensity[i] - st.mean_map[i];
      st.var_map[i] += d * d;
    }
  double mean_all = 0.0, var_all = 0.0;
  for (std::size_t i = 0; i < st.var_map.size(); ++i) {
    st.var_map[i] /= n;
    mean_all += st.mean_map[i];
    var_all += st.var_map[i];
  }
  mean_all /= static_cast<double>(st.mean_map.size());
  var_all /= static_cast<double>(st.var_map.size());
  st.contrast = mean_all > 0.0 ? std::sqrt(var_all) / mean_all : 0.0;
  return st;
}

} // namespace gil
