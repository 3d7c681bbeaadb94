#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gil/error.hpp"
#include "gil/forward.hpp"

using namespace gil;

namespace {

constexpr double c = 299792458.0;

GridSpec small_grid(const OpticsConfig &cfg, std::size_t n = 8) {
  auto g = grid_spec(cfg);
  g.nx = g.ny = n;
  return g;
}

OpticsConfig small_cfg(std::size_t n = 8) {
  OpticsConfig cfg;
  cfg.grid_nx = cfg.grid_ny = static_cast<int>(n);
  return cfg;
}

Scene single_pixel(const OpticsConfig &cfg, double z, std::size_t ix = 3, std::size_t iy = 4) {
  const auto g = grid_spec(cfg);
  Mask mask(g.nx, g.ny, 0);
  Image depth(g.nx, g.ny, 0.0);
  mask(ix, iy) = 1;
  depth(ix, iy) = z;
  return Scene(Image(g.nx, g.ny, 1.0), depth, mask, g);
}

SpeckleFrame flat_frame(const GridSpec &g, float v = 1.0f) {
  SpeckleFrame f;
  f.intensity = Array2D<float>(g.nx, g.ny, v);
  f.grid = g;
  return f;
}

// Overlap (ns) of sample k = [k, k+1) with the rect pulse [u - w/2, u + w/2).
double rect_overlap(std::size_t k, double u, double w) {
  const double a = std::max(static_cast<double>(k), u - w / 2);
  const double b = std::min(static_cast<double>(k + 1), u + w / 2);
  return std::max(0.0, b - a) / w;
}

// Contiguous runs of nonzero samples, as (first, last) pairs.
std::vector<std::pair<std::size_t, std::size_t>> runs(const std::vector<double> &s) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] <= 0)
      continue;
    if (!out.empty() && out.back().second + 1 == k)
      out.back().second = k;
    else
      out.push_back({k, k});
  }
  return out;
}

double centre_of_mass(const std::vector<double> &s, std::size_t first, std::size_t last) {
  double m = 0, w = 0;
  for (std::size_t k = first; k <= last; ++k) {
    m += (static_cast<double>(k) + 0.5) * s[k];
    w += s[k];
  }
  return m / w;
}

} // namespace

TEST_CASE("pulse shapes have unit energy and bounded support") {
  for (auto profile : {PulseProfile::Rect, PulseProfile::Gaussian}) {
    const auto p = make_pulse(10e-9, profile, 1e9);
    double sum = 0;
    for (double v : p.samples) {
      CHECK(v >= 0);
      sum += v * p.dt;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(static_cast<double>(p.samples.size()) * p.dt <= 4 * p.width + 1e-15);
    CHECK(p.cdf(-1) == 0.0);
    CHECK(p.cdf(1) == 1.0);
    CHECK(p.cdf(0) == doctest::Approx(0.5).epsilon(1e-12));
  }
  const auto rect = make_pulse(10e-9, PulseProfile::Rect, 1e9);
  CHECK(rect.samples.size() == 10);
  for (double v : rect.samples)
    CHECK(v * rect.dt == doctest::Approx(0.1));
  CHECK_THROWS_AS(make_pulse(0, PulseProfile::Rect, 1e9), ConfigError);
}

TEST_CASE("fully masked scene gives an all-zero trace") {
  const auto cfg = small_cfg();
  const auto g = grid_spec(cfg);
  const Scene empty(Image(g.nx, g.ny, 1.0), Image(g.nx, g.ny, 0.0), Mask(g.nx, g.ny, 0), g);
  auto rng = substream(1, Substream::Noise, 0);
  const auto t = simulate_return(empty, flat_frame(g, 3.0f), NoiseModel{}, cfg, rng);
  CHECK(t.samples.size() == trace_length(cfg));
  for (double v : t.samples)
    CHECK(v == 0.0);
  for (double b : bin_trace(t, cfg).B)
    CHECK(b == 0.0);
}

TEST_CASE("single pixel impulse response is the delayed pulse") {
  const auto cfg = small_cfg();
  for (double z : {0.0, 1.2, 3.7, 9.0}) {
    auto rng = substream(1, Substream::Noise, 0);
    const auto t = simulate_return(single_pixel(cfg, z), flat_frame(grid_spec(cfg)), NoiseModel::noiseless(),
                                   cfg, rng);
    CHECK(t.t_start == doctest::Approx(-cfg.gate_lead));
    const double u_ns = (cfg.gate_lead + 2 * z / c) * 1e9; // pulse centre in window time
    double total = 0;
    for (std::size_t k = 0; k < t.samples.size(); ++k) {
      CHECK(t.samples[k] == doctest::Approx(rect_overlap(k, u_ns, 10.0)).epsilon(1e-9));
      total += t.samples[k];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    // centre of mass = 2z/c (the rect pulse is centred at t = 0)
    const auto r = runs(t.samples);
    REQUIRE(r.size() == 1);
    const double com = t.t_start + centre_of_mass(t.samples, r[0].first, r[0].second) * t.dt;
    CHECK(std::abs(com - 2 * z / c) <= 0.5 * t.dt);
  }
}

TEST_CASE("gaussian pulse centre of mass follows the delay") {
  auto cfg = small_cfg();
  cfg.pulse_profile = PulseProfile::Gaussian;
  cfg.gate_lead = 16e-9;
  const double z = 2.5;
  auto rng = substream(1, Substream::Noise, 0);
  const auto t = simulate_return(single_pixel(cfg, z), flat_frame(grid_spec(cfg)), NoiseModel::noiseless(), cfg,
                                 rng);
  const double sum = std::accumulate(t.samples.begin(), t.samples.end(), 0.0);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  const double com = t.t_start + centre_of_mass(t.samples, 0, t.samples.size() - 1) * t.dt;
  CHECK(std::abs(com - 2 * z / c) <= 0.5 * t.dt);
}

TEST_CASE("two planes 9 m apart give echoes 60 samples apart") {
  OpticsConfig cfg;
  cfg.range_l0 = 570;
  const auto g = grid_spec(cfg);
  const auto scene = make_test_scene(parse_scene_spec("two_plane:9.0"), g, cfg);
  const auto t = ForwardModel(scene, cfg).noiseless(flat_frame(g));
  const auto r = runs(t);
  REQUIRE(r.size() == 2);
  const double sep = centre_of_mass(t, r[1].first, r[1].second) - centre_of_mass(t, r[0].first, r[0].second);
  CHECK(sep == doctest::Approx(2 * 9.0 / c * 1e9).epsilon(0.02));
  CHECK(std::abs(sep - 60) <= 1);
}

TEST_CASE("bin_trace index arithmetic") {
  const OpticsConfig cfg;
  BucketTrace t{std::vector<double>(128, 0.0), 0, 1e-9};
  CHECK(bin_trace(t, cfg).B == std::vector<double>(32, 0.0));

  t.samples[45 - 1] = 1.0; // 1-based sample 45
  const auto b = bin_trace(t, cfg).B;
  for (int s = 1; s <= 32; ++s)
    CHECK(b[s - 1] == (s == (45 - 1) / 4 + 1 ? 1.0 : 0.0));
  CHECK((45 - 1) / 4 + 1 == 12);

  // 10-sample rect starting at a slice boundary: 4:4:2
  std::fill(t.samples.begin(), t.samples.end(), 0.0);
  for (int k = 16; k < 26; ++k)
    t.samples[k] = 0.1;
  const auto r = bin_trace(t, cfg).B;
  CHECK(r[4] == doctest::Approx(0.4));
  CHECK(r[5] == doctest::Approx(0.4));
  CHECK(r[6] == doctest::Approx(0.2));
  CHECK(std::accumulate(r.begin(), r.end(), 0.0) == doctest::Approx(1.0));

  t.samples.resize(127);
  CHECK_THROWS_AS(bin_trace(t, cfg), DimensionError);
}

TEST_CASE("bin_trace is linear") {
  const OpticsConfig cfg;
  auto rng = substream(4, Substream::Test, 0);
  BucketTrace a{std::vector<double>(128), 0, 1e-9}, b = a, sum = a;
  for (std::size_t k = 0; k < 128; ++k) {
    a.samples[k] = rng.uniform();
    b.samples[k] = rng.uniform();
    sum.samples[k] = 2 * a.samples[k] + 3 * b.samples[k];
  }
  const auto ba = bin_trace(a, cfg).B, bb = bin_trace(b, cfg).B, bs = bin_trace(sum, cfg).B;
  for (std::size_t s = 0; s < 32; ++s)
    CHECK(bs[s] == doctest::Approx(2 * ba[s] + 3 * bb[s]).epsilon(1e-12));
}

TEST_CASE("noiseless energy bookkeeping") {
  const OpticsConfig cfg;
  const auto g = grid_spec(cfg);
  for (const char *spec : {"facade", "landscape", "staircase:4:0.6"}) {
    const auto scene = make_test_scene(parse_scene_spec(spec), g, cfg);
    const auto frame = generate_frame(5, 0, g, cfg.speckle_corr_len_target);
    double expected = 0;
    for (std::size_t i = 0; i < scene.mask().size(); ++i)
      if (scene.mask()[i])
        expected += scene.reflectivity()[i] * frame.intensity[i];
    auto rng = substream(5, Substream::Noise, 0);
    const auto t = simulate_return(scene, frame, NoiseModel::noiseless(), cfg, rng);
    const auto b = bin_trace(t, cfg).B;
    const double got = std::accumulate(b.begin(), b.end(), 0.0);
    CHECK(std::abs(got - expected) <= 1e-10 * expected);
    for (double v : b)
      CHECK(v >= 0);
  }
}

TEST_CASE("shot noise has Poisson mean and variance") {
  const auto cfg = small_cfg();
  const auto scene = single_pixel(cfg, 0.0);
  const ForwardModel model(scene, cfg);
  // rect pulse: 10 samples of 0.1 * S each; S = 5 gives v = 0.5 per sample
  const auto frame = flat_frame(grid_spec(cfg), 5.0f);
  const double lambda = 20.0, v = 0.5;
  NoiseModel noise{lambda, 0.0, 0, 0.0, true};
  const int reps = 4000;
  const std::size_t k = static_cast<std::size_t>(std::round(cfg.gate_lead * 1e9)); // first lit sample
  double s1 = 0, s2 = 0;
  for (int r = 0; r < reps; ++r) {
    auto rng = substream(9, Substream::Noise, r);
    const auto t = model.simulate(frame, noise, rng);
    for (std::size_t j = k - 5; j < k + 5; ++j) {
      s1 += t.samples[j];
      s2 += t.samples[j] * t.samples[j];
    }
  }
  const double n = reps * 10.0;
  const double mean = s1 / n, var = s2 / n - mean * mean;
  CHECK(std::abs(mean - v) < 5 * std::sqrt(v / lambda / n));
  CHECK(var == doctest::Approx(v / lambda).epsilon(0.05));
}

TEST_CASE("background-only and quantized traces") {
  const auto cfg = small_cfg();
  const auto g = grid_spec(cfg);
  const Scene empty(Image(g.nx, g.ny, 1.0), Image(g.nx, g.ny, 0.0), Mask(g.nx, g.ny, 0), g);
  const ForwardModel model(empty, cfg);
  NoiseModel bg{10.0, 3.0, 0, 0.0, true};
  double sum = 0;
  for (int r = 0; r < 500; ++r) {
    auto rng = substream(2, Substream::Noise, r);
    for (double v : model.simulate(flat_frame(g), bg, rng).samples)
      sum += v;
  }
  CHECK(sum / (500.0 * 128) == doctest::Approx(3.0 / 10.0).epsilon(0.03));

  NoiseModel q{10.0, 3.0, 4, 1.5, true};
  auto rng = substream(2, Substream::Noise, 0);
  for (double v : model.simulate(flat_frame(g), q, rng).samples) {
    const double code = v / (1.5 / 15.0);
    CHECK(code == doctest::Approx(std::round(code)));
    CHECK(v <= 1.5 + 1e-12);
  }
  CHECK_THROWS_AS(validate(NoiseModel{0.0, 0.0, 0, 0.0, true}), ConfigError);
  CHECK_THROWS_AS(validate(NoiseModel{1.0, -1.0, 0, 0.0, true}), ConfigError);
  CHECK_THROWS_AS(validate(NoiseModel{1.0, 0.0, 8, 0.0, true}), ConfigError);
}

TEST_CASE("forward model errors") {
  const auto cfg = small_cfg();
  auto rng = substream(1, Substream::Noise, 0);
  const auto scene = single_pixel(cfg, 0.0);
  CHECK_THROWS_AS(simulate_return(scene, flat_frame(small_grid(cfg, 9)), NoiseModel{}, cfg, rng), DimensionError);
  // echo beyond the 128 ns window
  CHECK_THROWS_AS(ForwardModel(single_pixel(cfg, 30.0), cfg), ConfigError);
  CHECK_THROWS_AS(ForwardModel(single_pixel(cfg, -3.0), cfg), ConfigError);
}

TEST_CASE("campaign measurements are pure functions of (seed, k)") {
  const auto cfg = small_cfg(16);
  const auto scene = make_test_scene(parse_scene_spec("two_plane:1.2"), grid_spec(cfg), cfg);
  const Campaign a(scene, cfg, NoiseModel{}, 42), b(scene, cfg, NoiseModel{}, 42);
  for (std::uint64_t k : {0u, 5u, 2u}) {
    const auto ma = a.measure(k), mb = b.measure(k);
    CHECK(ma.index == k);
    CHECK(ma.frame.intensity == mb.frame.intensity);
    CHECK(ma.slices.B == mb.slices.B);
    for (double v : ma.slices.B)
      CHECK(v == static_cast<double>(static_cast<float>(v)));
  }
  CHECK_FALSE(a.measure(0).slices.B == a.measure(1).slices.B);

  std::vector<Measurement> s1, s2;
  run_campaign(a, 2, 1, [&](const Measurement &m) { s1.push_back(m); });
  run_campaign(b, 2, 3, [&](const Measurement &m) { s2.push_back(m); });
  REQUIRE(s1.size() == 2);
  REQUIRE(s2.size() == 2);
  for (int k = 0; k < 2; ++k) {
    CHECK(s1[k].index == static_cast<std::uint64_t>(k));
    CHECK(s1[k].slices.B == s2[k].slices.B);
    CHECK(s1[k].frame.intensity == s2[k].frame.intensity);
  }
  CHECK_THROWS_AS(run_campaign(a, 1, 1, [](const Measurement &) {}), InsufficientDataError);
}

TEST_CASE("campaign stream is identical for any worker count") {
  const auto cfg = small_cfg(16);
  const auto scene = make_test_scene(parse_scene_spec("facade"), grid_spec(cfg), cfg);
  const Campaign camp(scene, cfg, NoiseModel{}, 7);
  std::vector<std::vector<double>> ref;
  run_campaign(camp, 300, 1, [&](const Measurement &m) { ref.push_back(m.slices.B); });
  for (unsigned w : {2u, 5u}) {
    std::vector<std::vector<double>> got;
    std::vector<std::uint64_t> order;
    run_campaign(camp, 300, w, [&](const Measurement &m) {
      got.push_back(m.slices.B);
      order.push_back(m.index);
    });
    CHECK(got == ref);
    CHECK(std::is_sorted(order.begin(), order.end()));
  }
}

TEST_CASE("campaign rejects a scene on the wrong grid") {
  const auto cfg = small_cfg(16);
  const auto scene = make_test_scene(parse_scene_spec("facade"), grid_spec(small_cfg(8)), small_cfg(8));
  CHECK_THROWS_AS(Campaign(scene, cfg, NoiseModel{}, 1), DimensionError);
}
