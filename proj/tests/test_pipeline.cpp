#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gil/error.hpp"
#include "gil/pipeline.hpp"
#include "gil/record.hpp"
#include "temp_dir.hpp"

using namespace gil;

namespace {

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunSettings small_run(const char *scene, std::uint64_t n) {
  RunSettings s;
  s.cfg.grid_nx = s.cfg.grid_ny = 32;
  s.scene.synthetic = parse_scene_spec(scene);
  s.noise = NoiseModel{100.0, 5.0, 0, 0.0, true};
  s.n = n;
  s.seed = 17;
  return s;
}

} // namespace

TEST_CASE("presets encode the scenario geometry") {
  CHECK(find_preset("fig2-analogue").settings.cfg.range_l0 == 570.0);
  CHECK(find_preset("fig3-analogue").settings.cfg.range_l0 == 1200.0);
  CHECK(find_preset("fig4-analogue").settings.cfg.range_l0 == 900.0);
  CHECK(find_preset("default").settings.cfg.range_l0 == 1000.0);
  CHECK(find_preset("edge-1000m").settings.cfg.speckle_corr_len_target == 0.25);
  CHECK(find_preset("fig2-analogue").settings.scene.id() == "two_plane:9");
  for (const auto &p : presets()) {
    CHECK(p.settings.n == 10000);
    CHECK_NOTHROW(build_scene(p.settings.scene, p.settings.cfg));
  }
  CHECK_THROWS_AS(find_preset("fig5"), ConfigError);
}

TEST_CASE("manifest round trip reproduces the settings") {
  auto s = small_run("staircase:3:0.9", 123);
  s.cfg.range_l0 = 777.125;
  s.noise.quantization_bits = 10;
  s.noise.adc_full_scale = 50;
  s.threshold = 0.45;
  const auto text = format_manifest("pipeline", s, 4, {{"record", "r.bin"}}, 1.5);
  const auto back = parse_manifest(text);
  CHECK(format_config(back.cfg) == format_config(s.cfg));
  CHECK(back.scene.id() == s.scene.id());
  CHECK(back.n == 123);
  CHECK(back.seed == 17);
  CHECK(back.noise.quantization_bits == 10);
  CHECK(back.noise.adc_full_scale == 50);
  CHECK(back.threshold == 0.45);
  CHECK(back.normalization == Normalization::GlobalMinMax);
  CHECK_THROWS_AS(parse_manifest("{}"), ConfigError);
  CHECK_THROWS_AS(parse_manifest("not json"), ConfigError);
}

TEST_CASE("pipeline writes every artifact and is reproducible") {
  TempDir dir;
  const auto s = small_run("two_plane:1.2", 1500);
  const auto r1 = run_pipeline(s, dir.file("a"), 1);
  const auto r2 = run_pipeline(s, dir.file("b"), 3);
  for (const char *f : {"record.bin", "stack.bin", "cloud.ply", "depth.csv", "depth.pgm", "metrics.txt",
                        "metrics.json", "slices/slice_01.pgm", "slices/slice_32.pgm"}) {
    INFO(f);
    REQUIRE(std::filesystem::exists(dir.file(std::string("a/") + f)));
    CHECK(slurp(dir.file(std::string("a/") + f)) == slurp(dir.file(std::string("b/") + f)));
  }
  CHECK(r1.stack == r2.stack);
  CHECK(r1.metrics.n_used == 1500);

  // the manifest replays to the same bytes
  const auto replay = parse_manifest(slurp(dir.file("a/manifest.json")));
  run_pipeline(replay, dir.file("c"), 2);
  CHECK(slurp(dir.file("a/stack.bin")) == slurp(dir.file("c/stack.bin")));
  CHECK(slurp(dir.file("a/cloud.ply")) == slurp(dir.file("c/cloud.ply")));

  // and the record replays to the same stack
  RecordReader reader(dir.file("a/record.bin"));
  CHECK(finalize(accumulate_record(reader)) == r1.stack);
}

TEST_CASE("landscape analogue occupies at least three depth bins") {
  TempDir dir;
  auto s = find_preset("fig4-analogue").settings;
  s.n = 4000;
  const auto r = run_pipeline(s, dir.file("l"), 2);
  const auto bins = dominant_slices(depth_histogram(r.depth));
  INFO("dominant bins: " << bins.size());
  CHECK(bins.size() >= 3);
}

// Oracle for argmax + global min-max on a stack of independent Gaussian noise:
// Monte Carlo distribution of the fraction of pixels whose maximum clears the
// threshold.
std::vector<double> noise_fp_oracle(std::size_t m, std::size_t npix, double threshold, int draws) {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd;
  std::vector<double> x(m * npix), out;
  for (int d = 0; d < draws; ++d) {
    for (auto &v : x)
      v = nd(gen);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double cut = *lo + threshold * (*hi - *lo);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < npix; ++i) {
      double best = x[i];
      for (std::size_t s = 1; s < m; ++s)
        best = std::max(best, x[s * npix + i]);
      hits += best >= cut ? 1 : 0;
    }
    out.push_back(static_cast<double>(hits) / static_cast<double>(npix));
  }
  std::sort(out.begin(), out.end());
  return out;
}

TEST_CASE("pure background false detections at threshold 0.8 follow the noise oracle") {
  OpticsConfig cfg;
  cfg.grid_nx = cfg.grid_ny = 32;
  const auto g = grid_spec(cfg);
  const Scene empty(Image(32, 32, 1.0), Image(32, 32, 0.0), Mask(32, 32, 0), g);
  const Campaign camp(empty, cfg, NoiseModel{100.0, 5.0, 0, 0.0, true}, 5);
  const auto st = finalize(accumulate_campaign(camp, 2000, 2));
  const auto dm = assemble_3d(normalize_slices(st, Normalization::GlobalMinMax), cfg, 0.8);
  const double fp = static_cast<double>(dm.valid_count()) / 1024.0;

  const auto oracle = noise_fp_oracle(32, 1024, 0.8, 400);
  const double lo = oracle[10], hi = oracle[389]; // central 95%
  INFO("false-positive rate " << fp << ", oracle 95% range [" << lo << ", " << hi << "]");
  CHECK(fp >= lo);
  CHECK(fp <= hi);
}

TEST_CASE("bin accuracy does not improve with more noise") {
  // averaged over seeds: one realization can gain a pixel or two by chance
  double previous = 2.0;
  for (double background : {0.0, 5000.0, 50000.0}) {
    double mean = 0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      auto s = small_run("two_plane:1.2", 2000);
      s.noise.background_rate = background;
      s.seed = seed;
      const Scene scene = build_scene(s.scene, s.cfg);
      const Campaign camp(scene, s.cfg, s.noise, s.seed);
      const auto raw = finalize(accumulate_campaign(camp, s.n, 2));
      const auto dm = assemble_3d(normalize_slices(raw, Normalization::GlobalMinMax), s.cfg, 0.0);
      mean += depth_accuracy(dm, scene, s.cfg).bin_accuracy / 4;
    }
    INFO("background " << background << " mean bin accuracy " << mean);
    CHECK(mean <= previous);
    previous = mean;
  }
}

TEST_CASE("scene from files") {
  TempDir dir;
  auto s = small_run("two_plane:1.2", 10);
  s.scene = SceneSource{std::nullopt, dir.file("r.csv"), dir.file("missing.csv")};
  std::ofstream(dir.file("r.csv")) << "1,1\n1,1\n";
  CHECK_THROWS_AS(build_scene(s.scene, s.cfg), IoError);
  s.scene = SceneSource{};
  CHECK_THROWS_AS(build_scene(s.scene, s.cfg), ConfigError);
}
