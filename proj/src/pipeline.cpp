#include "gil/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "gil/error.hpp"
#include "gil/io.hpp"
#include "gil/record.hpp"

namespace gil {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string SceneSource::id() const {
  if (synthetic)
    return synthetic->id();
  return "files:" + reflectivity_path + "," + depth_path;
}

Scene build_scene(const SceneSource &src, const OpticsConfig &cfg) {
  const auto grid = grid_spec(cfg);
  if (src.synthetic)
    return make_test_scene(*src.synthetic, grid, cfg);
  if (src.reflectivity_path.empty() || src.depth_path.empty())
    throw ConfigError("scene: give either a synthetic scene or both reflectivity and depth files");
  return load_scene(src.reflectivity_path, src.depth_path, grid);
}

const std::vector<Preset> &presets() {
  static const std::vector<Preset> all = [] {
    auto make = [](std::string name, std::string desc, double range, SceneSpec scene) {
      Preset p{std::move(name), std::move(desc), {}};
      p.settings.cfg.range_l0 = range;
      p.settings.scene.synthetic = scene;
      p.settings.noise = NoiseModel{100.0, 5.0, 0, 0.0, true};
      return p;
    };
    SceneSpec two_plane_12{SceneKind::TwoPlane, 1.2, 0, 0.0};
    SceneSpec two_plane_90{SceneKind::TwoPlane, 9.0, 0, 0.0};
    SceneSpec facade{SceneKind::Facade, 0.0, 0, 0.0};
    SceneSpec landscape{SceneKind::Landscape, 0.0, 0, 0.0};
    SceneSpec edge{SceneKind::Edge, 0.0, 0, 0.0};
    return std::vector<Preset>{
        make("default", "two planes 1.2 m apart at 1000 m", 1000.0, two_plane_12),
        make("fig2-analogue", "tower analogue: two planes 9 m apart at 570 m", 570.0, two_plane_90),
        make("fig3-analogue", "building facade spanning several range bins at 1200 m", 1200.0, facade),
        make("fig4-analogue", "landscape of trees and houses at four depths, 900 m", 900.0, landscape),
        make("edge-1000m", "half-plane reflectivity edge at 1000 m (lateral resolution)", 1000.0, edge),
    };
  }();
  return all;
}

const Preset &find_preset(const std::string &name) {
  for (const auto &p : presets())
    if (p.name == name)
      return p;
  std::string names;
  for (const auto &p : presets())
    names += (names.empty() ? "" : ", ") + p.name;
  throw ConfigError("unknown preset '" + name + "' (available: " + names + ")");
}

std::string format_manifest(const std::string &command, const RunSettings &s, unsigned workers,
                            const std::vector<std::pair<std::string, std::string>> &outputs,
                            double wall_seconds) {
  ordered_json j;
  j["tool"] = "gil";
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["config"] = format_config(s.cfg);
  j["master_seed"] = s.seed;
  j["n"] = s.n;
  j["scene"] = s.scene.id();
  if (!s.scene.synthetic) {
    j["scene_files"] = {{"reflectivity", s.scene.reflectivity_path}, {"depth", s.scene.depth_path}};
  }
  j["noise"] = {{"photon_scale", s.noise.photon_scale},
                {"background_rate", s.noise.background_rate},
                {"quantization_bits", s.noise.quantization_bits},
                {"adc_full_scale", s.noise.adc_full_scale},
                {"enable_shot_noise", s.noise.enable_shot_noise}};
  j["threshold"] = s.threshold;
  j["normalization"] = to_string(s.normalization);
  j["workers"] = workers;
  ordered_json outs = ordered_json::object();
  for (const auto &[k, v] : outputs)
    outs[k] = v;
  j["outputs"] = outs;
  j["wall_clock_seconds"] = wall_seconds;
  return j.dump(2) + "\n";
}

RunSettings parse_manifest(const std::string &json_text) {
  RunSettings s;
  try {
    const auto j = nlohmann::json::parse(json_text);
    s.cfg = parse_config(j.at("config").get<std::string>());
    s.seed = j.at("master_seed").get<std::uint64_t>();
    s.n = j.at("n").get<std::uint64_t>();
    const auto scene = j.at("scene").get<std::string>();
    if (j.contains("scene_files")) {
      s.scene.reflectivity_path = j["scene_files"].at("reflectivity").get<std::string>();
      s.scene.depth_path = j["scene_files"].at("depth").get<std::string>();
    } else {
      s.scene.synthetic = parse_scene_spec(scene);
    }
    const auto &n = j.at("noise");
    s.noise.photon_scale = n.at("photon_scale").get<double>();
    s.noise.background_rate = n.at("background_rate").get<double>();
    s.noise.quantization_bits = n.at("quantization_bits").get<int>();
    s.noise.adc_full_scale = n.at("adc_full_scale").get<double>();
    s.noise.enable_shot_noise = n.at("enable_shot_noise").get<bool>();
    if (j.contains("threshold"))
      s.threshold = j["threshold"].get<double>();
    if (j.contains("normalization"))
      s.normalization = parse_normalization(j["normalization"].get<std::string>());
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  return s;
}

void write_slice_pgms(const SliceStack &normalized, const std::string &dir) {
  fs::create_directories(dir);
  if (normalized.data.empty())
    return;
  const auto [lo, hi] = std::minmax_element(normalized.data.begin(), normalized.data.end());
  char name[32];
  for (std::size_t s = 1; s <= normalized.m; ++s) {
    std::snprintf(name, sizeof name, "slice_%02zu.pgm", s);
    write_pgm((fs::path(dir) / name).string(), to_pgm8(normalized.slice(static_cast<int>(s)), *lo, *hi));
  }
}

PipelineResult run_pipeline(const RunSettings &s, const std::string &outdir, unsigned workers) {
  const auto t_begin = std::chrono::steady_clock::now();
  fs::create_directories(outdir);
  const fs::path dir(outdir);
  auto path = [&](const char *name) { return (dir / name).string(); };

  const Scene scene = build_scene(s.scene, s.cfg);
  const Campaign campaign(scene, s.cfg, s.noise, s.seed);

  RecordWriter record(path("record.bin"),
                      RecordHeader{static_cast<std::uint32_t>(s.cfg.grid_nx),
                                   static_cast<std::uint32_t>(s.cfg.grid_ny),
                                   static_cast<std::uint32_t>(s.cfg.n_slices), s.n, s.seed});
  const auto acc = accumulate_campaign(campaign, s.n, workers, &record);
  record.close();

  PipelineResult r;
  r.stack = finalize(acc);
  write_stack(path("stack.bin"), r.stack);
  write_slice_pgms(normalize_slices(r.stack, s.normalization), path("slices"));

  r.depth = assemble_3d(normalize_slices(r.stack, Normalization::GlobalMinMax), s.cfg, s.threshold);
  export_pointcloud(r.depth, s.cfg, path("cloud.ply"));
  export_depth_csv(r.depth, path("depth.csv"));
  export_depth_pgm(r.depth, path("depth.pgm"));

  r.metrics = evaluate(r.stack, r.depth, scene, s.cfg);
  write_file_atomic(path("metrics.txt"), format_metrics_text(r.metrics));
  write_file_atomic(path("metrics.json"), format_metrics_json(r.metrics));

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  write_file_atomic(path("manifest.json"),
                    format_manifest("pipeline", s, workers,
                                    {{"record", "record.bin"},
                                     {"stack", "stack.bin"},
                                     {"slices", "slices/"},
                                     {"pointcloud", "cloud.ply"},
                                     {"depth_csv", "depth.csv"},
                                     {"depth_pgm", "depth.pgm"},
                                     {"metrics_text", "metrics.txt"},
                                     {"metrics_json", "metrics.json"}},
                                    secs));
  return r;
}

} // namespace gil
