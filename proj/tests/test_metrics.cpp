#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "gil/error.hpp"
#include "gil/metrics.hpp"

using namespace gil;

namespace {

OpticsConfig cfg_n(int n) {
  OpticsConfig cfg;
  cfg.grid_nx = cfg.grid_ny = n;
  return cfg;
}

Scene scene_of(const char *spec, const OpticsConfig &cfg) {
  return make_test_scene(parse_scene_spec(spec), grid_spec(cfg), cfg);
}

// Depth map that assigns every lit pixel its true slice shifted by `offset`.
DepthMap truth_map(const Scene &scene, const OpticsConfig &cfg, int offset) {
  const auto t = truth_slices(scene, cfg);
  const auto nx = scene.grid().nx, ny = scene.grid().ny;
  DepthMap dm{nx, ny, cfg.n_slices, Image(nx, ny, std::nan("")), Array2D<float>(nx, ny, 0.0f), Mask(nx, ny, 0),
              Array2D<int>(nx, ny, 0)};
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] > 0) {
      dm.valid[i] = 1;
      dm.slice[i] = t[i] + offset;
      dm.depth[i] = slice_to_depth(t[i] + offset, cfg);
      dm.confidence[i] = 1.0f;
    }
  return dm;
}

// Expected dG of an ideal edge: each pixel collects the Gaussian correlation
// (width tau, pixels) with every lit pixel q >= column.
Image blurred_edge(std::size_t n, std::size_t column, double tau, double amplitude = 1.0) {
  Image img(n, n);
  for (std::size_t iy = 0; iy < n; ++iy)
    for (std::size_t p = 0; p < n; ++p) {
      double v = 0;
      for (std::size_t q = column; q < n; ++q) {
        const double d = static_cast<double>(p) - static_cast<double>(q);
        v += tau > 0 ? std::exp(-d * d / (2 * tau * tau)) : (d == 0 ? 1.0 : 0.0);
      }
      img(p, iy) = amplitude * v;
    }
  return img;
}

} // namespace

TEST_CASE("depth accuracy: perfect and off-by-one") {
  const auto cfg = cfg_n(16);
  const auto scene = scene_of("two_plane:1.2", cfg);
  const auto perfect = depth_accuracy(truth_map(scene, cfg, 0), scene, cfg);
  CHECK(perfect.rmse == 0.0);
  CHECK(perfect.bin_accuracy == 1.0);
  CHECK(perfect.compared == scene.lit_count());

  const auto off = depth_accuracy(truth_map(scene, cfg, 1), scene, cfg);
  CHECK(off.rmse == doctest::Approx(0.59958).epsilon(1e-5));
  CHECK(off.rmse == doctest::Approx(299792458.0 * 4e-9 / 2).epsilon(1e-12));
  CHECK(off.bin_accuracy == 0.0);

  auto none = truth_map(scene, cfg, 0);
  std::fill(none.valid.flat().begin(), none.valid.flat().end(), 0);
  CHECK_THROWS_AS(depth_accuracy(none, scene, cfg), InsufficientDataError);
}

TEST_CASE("edge finder locates the half-plane edge") {
  const auto cfg = cfg_n(32);
  const auto e = find_vertical_edge(scene_of("edge", cfg), cfg);
  CHECK(e.column == 16);
  CHECK(e.row_begin == 2);
  CHECK(e.row_end == 30);
  CHECK_THROWS_AS(find_vertical_edge(scene_of("edge", cfg_n(8)), cfg_n(8)), MeasurementFailedError);
}

TEST_CASE("lateral resolution recovers a known 10-90 width") {
  const auto cfg = cfg_n(32);
  const auto scene = scene_of("edge", cfg);
  const double pitch = pixel_footprint(cfg);
  for (double tau : {0.6, 0.8, 1.3, 2.0}) {
    // 10-90 % width of a Gaussian-blurred step: 2 * 1.28155 * tau
    const double expected = 2 * 1.2815515655446004 * tau * pitch;
    const double got = lateral_resolution(blurred_edge(32, 16, tau, 3.0), scene, cfg);
    CHECK(got == doctest::Approx(expected).epsilon(1e-4));
  }
}

TEST_CASE("a perfectly sharp edge is floored at one pixel") {
  const auto cfg = cfg_n(32);
  const auto scene = scene_of("edge", cfg);
  CHECK(lateral_resolution(blurred_edge(32, 16, 0.0), scene, cfg) == pixel_footprint(cfg));
  CHECK(lateral_resolution(blurred_edge(32, 16, 0.1), scene, cfg) == pixel_footprint(cfg));
}

TEST_CASE("an edge buried in noise is reported as a failed measurement") {
  const auto cfg = cfg_n(32);
  const auto scene = scene_of("edge", cfg);
  Image noise(32, 32);
  auto rng = substream(1, Substream::Test, 0);
  for (auto &v : noise.flat())
    v = rng.normal_pair()[0];
  CHECK_THROWS_AS(lateral_resolution(noise, scene, cfg), MeasurementFailedError);
  Image flipped = blurred_edge(32, 16, 1.0);
  for (auto &v : flipped.flat())
    v = -v;
  CHECK_THROWS_AS(lateral_resolution(flipped, scene, cfg), MeasurementFailedError);
  CHECK_THROWS_AS(lateral_resolution(Image(16, 16), scene, cfg), DimensionError);
}

TEST_CASE("contrast to noise") {
  Image img(4, 4);
  Mask fg(4, 4, 0), bg(4, 4, 0);
  // background values 1, 3 (mean 2, population std 1); foreground 7
  for (std::size_t i = 0; i < 8; ++i) {
    bg[i] = 1;
    img[i] = i % 2 ? 3.0 : 1.0;
  }
  for (std::size_t i = 8; i < 16; ++i) {
    fg[i] = 1;
    img[i] = 7.0;
  }
  CHECK(contrast_to_noise(img, fg, bg) == doctest::Approx(5.0));

  // same statistics on both sides
  for (std::size_t i = 8; i < 16; ++i)
    img[i] = i % 2 ? 3.0 : 1.0;
  CHECK(contrast_to_noise(img, fg, bg) == doctest::Approx(0.0));

  Image flat(4, 4, 1.0);
  for (std::size_t i = 8; i < 16; ++i)
    flat[i] = 5.0;
  CHECK_THROWS_AS(contrast_to_noise(flat, fg, bg), DegenerateInputError);
  CHECK_THROWS_AS(contrast_to_noise(img, fg, Mask(4, 4, 0)), DegenerateInputError);
  CHECK_THROWS_AS(contrast_to_noise(img, fg, fg), DegenerateInputError);
  CHECK_THROWS_AS(contrast_to_noise(img, Mask(3, 4, 1), bg), DimensionError);
}

TEST_CASE("report formats carry the documented keys") {
  MetricsReport r{0.25, 0.875, 0.21, 4.5, 10000};
  const auto text = format_metrics_text(r);
  CHECK(text == "n_used = 10000\ndepth_rmse = 0.25\ndepth_bin_accuracy = 0.875\n"
                "lateral_res_estimate = 0.20999999999999999\ncnr = 4.5\n");
  const auto j = nlohmann::json::parse(format_metrics_json(r));
  CHECK(j["n_used"] == 10000);
  CHECK(j["depth_bin_accuracy"] == 0.875);
  CHECK(j["lateral_res_estimate"] == 0.21);
  r.lateral_res_estimate.reset();
  CHECK(format_metrics_text(r).find("lateral_res_estimate = none") != std::string::npos);
  CHECK(nlohmann::json::parse(format_metrics_json(r))["lateral_res_estimate"].is_null());
}
