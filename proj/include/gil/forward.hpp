#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gil/geometry.hpp"
#include "gil/rng.hpp"
#include "gil/scene.hpp"
#include "gil/speckle.hpp"

namespace gil {

/// Laser pulse, centred on t = 0. `samples` holds the power density (1/s) on
/// the digitizer grid starting at `t_first`, so sum(samples) * dt = 1.
struct PulseShape {
  double width = 10e-9;
  PulseProfile profile = PulseProfile::Rect;
  double dt = 1e-9;
  double half_support = 5e-9;
  double t_first = -5e-9;
  std::vector<double> samples;

  /// Fraction of the pulse energy emitted before time t.
  double cdf(double t) const;
};

/// Rect: full width `width`. Gaussian: FWHM `width`, truncated at +-width
/// and renormalized.
PulseShape make_pulse(double width, PulseProfile profile, double sample_rate);
PulseShape make_pulse(const OpticsConfig &cfg);

/// Digitized bucket signal; samples[k] is the energy collected during
/// [t_start + k dt, t_start + (k+1) dt), with time measured from the
/// nominal-range echo (2 l0 / c).
struct BucketTrace {
  std::vector<double> samples;
  double t_start = 0.0;
  double dt = 1e-9;
};

/// Per-slice integrated bucket signal B_s (index s-1 for 1-based slice s).
struct SliceVector {
  std::vector<double> B;
};

struct NoiseModel {
  double photon_scale = 100.0;  // photo-electrons per unit signal
  double background_rate = 0.0; // background photo-electrons per sample
  int quantization_bits = 0;    // 0 = no quantization
  double adc_full_scale = 0.0;  // signal units mapped to the top ADC code
  bool enable_shot_noise = true;

  static NoiseModel noiseless() { return {1.0, 0.0, 0, 0.0, false}; }
};

void validate(const NoiseModel &noise);

/// Precomputed per-scene impulse responses. Pixels at the same depth share a
/// response, so a frame costs one pass over the lit pixels plus one short
/// pulse per distinct depth.
class ForwardModel {
public:
  ForwardModel(const Scene &scene, const OpticsConfig &cfg);

  /// b(t) without noise.
  std::vector<double> noiseless(const SpeckleFrame &frame) const;
  BucketTrace simulate(const SpeckleFrame &frame, const NoiseModel &noise, Philox4x32 &rng) const;

  const PulseShape &pulse() const noexcept { return pulse_; }
  std::size_t trace_length() const noexcept { return length_; }

private:
  struct DepthGroup {
    std::vector<std::size_t> pixels;
    std::vector<double> reflectivity;
    std::size_t first_sample = 0;
    std::vector<double> weights; // pulse energy per sample
  };
  GridSpec grid_;
  PulseShape pulse_;
  std::size_t length_ = 0;
  double t_start_ = 0.0;
  std::vector<DepthGroup> groups_;
};

BucketTrace simulate_return(const Scene &scene, const SpeckleFrame &frame, const NoiseModel &noise,
                            const OpticsConfig &cfg, Philox4x32 &rng);

/// Throws DimensionError unless the trace length is a whole number of slices.
SliceVector bin_trace(const BucketTrace &trace, const OpticsConfig &cfg);

/// One measurement: the reference-arm frame and the binned bucket signal,
/// both at recording (float32) precision.
struct Measurement {
  std::uint64_t index = 0;
  SpeckleFrame frame;
  SliceVector slices;
};

/// Measurement k of a campaign is a pure function of (master_seed, k).
class Campaign {
public:
  Campaign(Scene scene, OpticsConfig cfg, NoiseModel noise, std::uint64_t master_seed);

  Measurement measure(std::uint64_t k) const;
  /// The noisy bucket trace behind measurement k.
  BucketTrace trace(std::uint64_t k) const;

  const OpticsConfig &config() const noexcept { return cfg_; }
  const Scene &scene() const noexcept { return scene_; }
  const NoiseModel &noise() const noexcept { return noise_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const ForwardModel &model() const noexcept { return model_; }

private:
  Scene scene_;
  OpticsConfig cfg_;
  NoiseModel noise_;
  std::uint64_t seed_;
  SpeckleSource speckle_;
  ForwardModel model_;
};

class RecordWriter;

/// Produces measurements 0..n-1 with `workers` threads and hands them to
/// `sink` in index order (and to `record`, if given).
void run_campaign(const Campaign &campaign, std::uint64_t n, unsigned workers,
                  const std::function<void(const Measurement &)> &sink, RecordWriter *record = nullptr);

} // namespace gil
