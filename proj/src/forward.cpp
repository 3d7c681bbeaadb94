#include "gil/forward.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "gil/error.hpp"
#include "gil/parallel.hpp"
#include "gil/record.hpp"

namespace gil {

namespace {

constexpr double kFwhmToSigma = 0.42466090014400953; // 1 / (2 sqrt(2 ln 2))

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Measurements per accumulation/production block.
constexpr std::uint64_t kCampaignChunk = 64;

const GridSpec &checked_grid(const Scene &scene, const OpticsConfig &cfg, const NoiseModel &noise) {
  validate(cfg);
  validate(noise);
  const auto g = grid_spec(cfg);
  if (scene.grid().nx != g.nx || scene.grid().ny != g.ny)
    throw DimensionError("campaign: scene grid does not match the configured grid");
  return scene.grid();
}

} // namespace

double PulseShape::cdf(double t) const {
  if (t <= -half_support)
    return 0.0;
  if (t >= half_support)
    return 1.0;
  if (profile == PulseProfile::Rect)
    return (t + half_support) / (2.0 * half_support);
  const double sigma = width * kFwhmToSigma;
  const double lo = std_normal_cdf(-half_support / sigma);
  const double hi = std_normal_cdf(half_support / sigma);
  return (std_normal_cdf(t / sigma) - lo) / (hi - lo);
}

PulseShape make_pulse(double width, PulseProfile profile, double sample_rate) {
  if (!(width > 0.0) || !(sample_rate > 0.0))
    throw ConfigError("pulse: width and sample rate must be > 0");
  PulseShape p;
  p.width = width;
  p.profile = profile;
  p.dt = 1.0 / sample_rate;
  p.half_support = profile == PulseProfile::Rect ? width / 2.0 : width;
  p.t_first = -p.half_support;
  const auto n = static_cast<std::size_t>(std::ceil(2.0 * p.half_support / p.dt - 1e-9));
  p.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = p.t_first + static_cast<double>(k) * p.dt;
    p.samples[k] = (p.cdf(a + p.dt) - p.cdf(a)) / p.dt;
  }
  return p;
}

PulseShape make_pulse(const OpticsConfig &cfg) {
  return make_pulse(cfg.pulse_width, cfg.pulse_profile, cfg.sample_rate);
}

void validate(const NoiseModel &noise) {
  if (!(std::isfinite(noise.photon_scale) && noise.photon_scale > 0.0))
    throw ConfigError("noise: photon_scale must be finite and > 0");
  if (!(std::isfinite(noise.background_rate) && noise.background_rate >= 0.0))
    throw ConfigError("noise: background_rate must be finite and >= 0");
  if (noise.quantization_bits < 0 || noise.quantization_bits > 24)
    throw ConfigError("noise: quantization_bits must be in [0, 24]");
  if (noise.quantization_bits > 0 && !(std::isfinite(noise.adc_full_scale) && noise.adc_full_scale > 0.0))
    throw ConfigError("noise: quantization needs adc_full_scale > 0");
}

ForwardModel::ForwardModel(const Scene &scene, const OpticsConfig &cfg)
    : grid_(scene.grid()), pulse_(make_pulse(cfg)), length_(gil::trace_length(cfg)),
      t_start_(-cfg.gate_lead) {
  const double dt = pulse_.dt;
  const double window = static_cast<double>(length_) * dt;
  std::map<double, DepthGroup> by_depth;
  const auto &mask = scene.mask();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i] || scene.reflectivity()[i] == 0.0)
      continue;
    auto &g = by_depth[scene.depth()[i]];
    g.pixels.push_back(i);
    g.reflectivity.push_back(scene.reflectivity()[i]);
  }
  for (auto &[z, g] : by_depth) {
    // Pulse centre, in window time.
    const double u = cfg.gate_lead + 2.0 * z / kSpeedOfLight;
    const double lo = u - pulse_.half_support, hi = u + pulse_.half_support;
    if (lo < -1e-6 * dt || hi > window + 1e-6 * dt)
      throw ConfigError("forward: echo of depth " + std::to_string(z) +
                        " m does not fit inside the digitizer window");
    const auto k0 = static_cast<std::size_t>(std::max(0.0, std::floor(lo / dt)));
    const auto k1 = std::min(length_, static_cast<std::size_t>(std::ceil(hi / dt)));
    g.first_sample = k0;
    g.weights.resize(k1 - k0);
    for (std::size_t k = k0; k < k1; ++k) {
      const double a = static_cast<double>(k) * dt - u;
      g.weights[k - k0] = pulse_.cdf(a + dt) - pulse_.cdf(a);
    }
    groups_.push_back(std::move(g));
  }
}

std::vector<double> ForwardModel::noiseless(const SpeckleFrame &frame) const {
  if (!frame.intensity.same_shape(grid_.nx, grid_.ny))
    throw DimensionError("forward: speckle frame does not match the scene grid");
  std::vector<double> trace(length_, 0.0);
  for (const auto &g : groups_) {
    double energy = 0.0;
    for (std::size_t j = 0; j < g.pixels.size(); ++j)
      energy += g.reflectivity[j] * static_cast<double>(frame.intensity[g.pixels[j]]);
    for (std::size_t k = 0; k < g.weights.size(); ++k)
      trace[g.first_sample + k] += energy * g.weights[k];
  }
  return trace;
}

BucketTrace ForwardModel::simulate(const SpeckleFrame &frame, const NoiseModel &noise, Philox4x32 &rng) const {
  validate(noise);
  BucketTrace out{noiseless(frame), t_start_, pulse_.dt};
  const double lambda = noise.photon_scale;
  auto poisson = [&rng](double mean) -> double {
    if (!(mean > 0.0))
      return 0.0;
    return static_cast<double>(std::poisson_distribution<long long>(mean)(rng));
  };
  const double levels = noise.quantization_bits > 0 ? std::ldexp(1.0, noise.quantization_bits) - 1.0 : 0.0;
  for (auto &v : out.samples) {
    if (noise.enable_shot_noise)
      v = poisson(lambda * v + noise.background_rate) / lambda;
    else if (noise.background_rate > 0.0)
      v += poisson(noise.background_rate) / lambda;
    if (levels > 0.0) {
      const double q = noise.adc_full_scale / levels;
      v = std::clamp(std::round(v / q), 0.0, levels) * q;
    }
  }
  return out;
}

BucketTrace simulate_return(const Scene &scene, const SpeckleFrame &frame, const NoiseModel &noise,
                            const OpticsConfig &cfg, Philox4x32 &rng) {
  if (!(frame.intensity.same_shape(scene.grid().nx, scene.grid().ny)))
    throw DimensionError("forward: speckle frame does not match the scene grid");
  return ForwardModel(scene, cfg).simulate(frame, noise, rng);
}

SliceVector bin_trace(const BucketTrace &trace, const OpticsConfig &cfg) {
  const auto sps = static_cast<std::size_t>(samples_per_slice(cfg));
  if (trace.samples.size() % sps != 0)
    throw DimensionError("bin_trace: trace length " + std::to_string(trace.samples.size()) +
                         " is not a multiple of " + std::to_string(sps) + " samples per slice");
  SliceVector out;
  out.B.assign(trace.samples.size() / sps, 0.0);
  for (std::size_t k = 0; k < trace.samples.size(); ++k)
    out.B[k / sps] += trace.samples[k];
  return out;
}

Campaign::Campaign(Scene scene, OpticsConfig cfg, NoiseModel noise, std::uint64_t master_seed)
    : scene_(std::move(scene)), cfg_(cfg), noise_(noise), seed_(master_seed),
      speckle_(checked_grid(scene_, cfg_, noise_), cfg_.speckle_corr_len_target, cfg_.speckle_aperture),
      model_(scene_, cfg_) {}

BucketTrace Campaign::trace(std::uint64_t k) const {
  const auto frame = speckle_.frame(seed_, k);
  auto rng = substream(seed_, Substream::Noise, k);
  return model_.simulate(frame, noise_, rng);
}

Measurement Campaign::measure(std::uint64_t k) const {
  Measurement m;
  m.index = k;
  m.frame = speckle_.frame(seed_, k);
  auto rng = substream(seed_, Substream::Noise, k);
  m.slices = bin_trace(model_.simulate(m.frame, noise_, rng), cfg_);
  for (auto &b : m.slices.B)
    b = static_cast<double>(static_cast<float>(b));
  return m;
}

void run_campaign(const Campaign &campaign, std::uint64_t n, unsigned workers,
                  const std::function<void(const Measurement &)> &sink, RecordWriter *record) {
  if (n < 2)
    throw InsufficientDataError("campaign: need at least 2 measurements, got " + std::to_string(n));
  const std::uint64_t chunks = (n + kCampaignChunk - 1) / kCampaignChunk;
  ordered_parallel(
      static_cast<std::size_t>(chunks), workers,
      [&](std::size_t c) {
        std::vector<Measurement> out;
        const std::uint64_t begin = c * kCampaignChunk, end = std::min(n, begin + kCampaignChunk);
        out.reserve(end - begin);
        for (auto k = begin; k < end; ++k)
          out.push_back(campaign.measure(k));
        return out;
      },
      [&](std::size_t, std::vector<Measurement> &&batch) {
        for (const auto &m : batch) {
          if (record)
            record->write(m);
          if (sink)
            sink(m);
        }
      });
}

} // namespace gil
