#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gil/forward.hpp"
#include "gil/geometry.hpp"
#include "gil/metrics.hpp"
#include "gil/reconstruction.hpp"
#include "gil/scene.hpp"
#include "gil/tomography.hpp"

namespace gil {

inline constexpr const char *kToolVersion = "1.0.0";

/// Either a synthetic scene or a reflectivity/depth file pair.
struct SceneSource {
  std::optional<SceneSpec> synthetic;
  std::string reflectivity_path;
  std::string depth_path;

  std::string id() const;
};

Scene build_scene(const SceneSource &src, const OpticsConfig &cfg);

/// Everything needed to reproduce a run.
struct RunSettings {
  OpticsConfig cfg;
  SceneSource scene;
  NoiseModel noise;
  std::uint64_t n = 10000;
  std::uint64_t seed = 1;
  double threshold = 0.3;
  Normalization normalization = Normalization::GlobalMinMax;
};

struct Preset {
  std::string name;
  std::string description;
  RunSettings settings;
};

/// Named scenarios: "default", "fig2-analogue" (tower analogue, 570 m,
/// two planes 9 m apart), "fig3-analogue" (building facade, 1200 m),
/// "fig4-analogue" (landscape, 900 m), "edge-1000m" (half-plane edge, 1000 m).
const std::vector<Preset> &presets();
const Preset &find_preset(const std::string &name);

/// Run manifest as JSON (config snapshot, seed, N, scene, noise, outputs,
/// tool version, wall-clock seconds).
std::string format_manifest(const std::string &command, const RunSettings &s, unsigned workers,
                            const std::vector<std::pair<std::string, std::string>> &outputs,
                            double wall_seconds);
/// Rebuilds the settings stored in a manifest.
RunSettings parse_manifest(const std::string &json_text);

struct PipelineResult {
  SliceStack stack; // raw dG
  DepthMap depth;
  MetricsReport metrics;
};

/// Simulate -> record -> reconstruct -> assemble -> metrics, writing every
/// artifact into `outdir`:
///   record.bin, stack.bin, slices/slice_NN.pgm, cloud.ply, depth.csv,
///   depth.pgm, metrics.txt, metrics.json, manifest.json
PipelineResult run_pipeline(const RunSettings &s, const std::string &outdir, unsigned workers);

/// Writes one 8-bit PGM per slice of a normalized stack (values mapped from
/// [min, max] of the whole normalized stack).
void write_slice_pgms(const SliceStack &normalized, const std::string &dir);

} // namespace gil
