// gil: ghost-imaging ladar simulator and reconstruction tool.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gil/error.hpp"
#include "gil/io.hpp"
#include "gil/parallel.hpp"
#include "gil/pipeline.hpp"
#include "gil/record.hpp"

namespace fs = std::filesystem;
using namespace gil;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string read_text(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Options shared by every subcommand that needs a geometry.
struct ConfigOptions {
  std::string preset = "default";
  std::string config_path;
  std::vector<std::string> sets;

  void attach(CLI::App *cmd) {
    cmd->add_option("--preset", preset, "Named scenario to start from (see `gil presets`)");
    cmd->add_option("--config", config_path, "Config file (key = value) applied over the preset");
    cmd->add_option("--set", sets, "Override one config key, e.g. --set range_l0=570")->take_all();
  }

  OpticsConfig apply(OpticsConfig cfg) const {
    if (!config_path.empty())
      cfg = load_config(config_path, cfg);
    for (const auto &kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + kv + "'");
      set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    validate(cfg);
    return cfg;
  }
};

/// Scene, noise and campaign-size options.
struct RunOptions {
  ConfigOptions config;
  std::string scene;
  std::string reflectivity;
  std::string depth;
  std::optional<std::uint64_t> n;
  std::optional<std::uint64_t> seed;
  std::optional<double> photon_scale;
  std::optional<double> background;
  std::optional<int> quant_bits;
  std::optional<double> adc_full_scale;
  bool no_shot_noise = false;
  bool noiseless = false;

  void attach(CLI::App *cmd) {
    config.attach(cmd);
    cmd->add_option("--scene", scene, "Synthetic scene: two_plane:DZ, staircase:STEPS:DZ, facade, landscape, edge");
    cmd->add_option("--reflectivity", reflectivity, "Reflectivity map (PGM or CSV)");
    cmd->add_option("--depth", depth, "Depth map CSV (metres relative to range_l0, nan = no return)");
    cmd->add_option("-n,--measurements", n, "Number of measurements N");
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--photon-scale", photon_scale, "Photo-electrons per unit bucket signal");
    cmd->add_option("--background", background, "Background photo-electrons per sample");
    cmd->add_option("--quant-bits", quant_bits, "ADC bits (0 = no quantization)");
    cmd->add_option("--adc-full-scale", adc_full_scale, "Signal mapped to the top ADC code");
    cmd->add_flag("--no-shot-noise", no_shot_noise, "Disable Poisson shot noise");
    cmd->add_flag("--noiseless", noiseless, "Exact noiseless bucket signal");
  }

  RunSettings settings() const {
    RunSettings s = find_preset(config.preset).settings;
    s.cfg = config.apply(s.cfg);
    if (!scene.empty()) {
      s.scene = SceneSource{parse_scene_spec(scene), {}, {}};
    } else if (!reflectivity.empty() || !depth.empty()) {
      s.scene = SceneSource{std::nullopt, reflectivity, depth};
    }
    if (n)
      s.n = *n;
    if (seed)
      s.seed = *seed;
    if (noiseless)
      s.noise = NoiseModel::noiseless();
    if (photon_scale)
      s.noise.photon_scale = *photon_scale;
    if (background)
      s.noise.background_rate = *background;
    if (quant_bits)
      s.noise.quantization_bits = *quant_bits;
    if (adc_full_scale)
      s.noise.adc_full_scale = *adc_full_scale;
    if (no_shot_noise)
      s.noise.enable_shot_noise = false;
    validate(s.noise);
    return s;
  }
};

int cmd_simulate(const RunOptions &opt, const std::string &out, unsigned workers) {
  const auto t0 = Clock::now();
  const RunSettings s = opt.settings();
  const Scene scene = build_scene(s.scene, s.cfg);
  const Campaign campaign(scene, s.cfg, s.noise, s.seed);
  RecordWriter record(out, RecordHeader{static_cast<std::uint32_t>(s.cfg.grid_nx),
                                        static_cast<std::uint32_t>(s.cfg.grid_ny),
                                        static_cast<std::uint32_t>(s.cfg.n_slices), s.n, s.seed});
  run_campaign(campaign, s.n, workers, [](const Measurement &) {}, &record);
  record.close();
  write_file_atomic(out + ".manifest.json",
                    format_manifest("simulate", s, workers, {{"record", out}}, seconds_since(t0)));
  std::fprintf(stderr, "wrote %llu measurements to %s\n", static_cast<unsigned long long>(s.n), out.c_str());
  return 0;
}

int cmd_reconstruct(const std::string &record_path, const std::string &out, const std::string &norm_name,
                    const std::string &pgm_dir) {
  const auto norm = parse_normalization(norm_name);
  RecordReader reader(record_path);
  const auto acc = accumulate_record(reader);
  const SliceStack stack = normalize_slices(finalize(acc), norm);
  write_stack(out, stack);
  if (!pgm_dir.empty())
    write_slice_pgms(stack, pgm_dir);
  std::fprintf(stderr, "reconstructed %zu slices from %llu measurements\n", stack.m,
               static_cast<unsigned long long>(stack.n_used));
  return 0;
}

/// assemble_3d wants a globally normalized stack; raw stacks are normalized
/// here, other normalizations are refused by assemble_3d itself.
SliceStack assemble_input(const SliceStack &stack) {
  if (stack.normalization == Normalization::None)
    return normalize_slices(stack, Normalization::GlobalMinMax);
  return stack;
}

int cmd_assemble(const ConfigOptions &copt, const std::string &stack_path, double threshold,
                 const std::string &ply, const std::string &csv, const std::string &pgm) {
  const OpticsConfig cfg = copt.apply(find_preset(copt.preset).settings.cfg);
  const SliceStack stack = read_stack(stack_path);
  const DepthMap dm = assemble_3d(assemble_input(stack), cfg, threshold);
  if (!ply.empty())
    export_pointcloud(dm, cfg, ply);
  if (!csv.empty())
    export_depth_csv(dm, csv);
  if (!pgm.empty())
    export_depth_pgm(dm, pgm);
  std::size_t valid = 0;
  for (auto v : dm.valid.flat())
    valid += v != 0;
  std::fprintf(stderr, "%zu of %zu pixels assigned a depth\n", valid, dm.valid.flat().size());
  return 0;
}

int cmd_metrics(const RunOptions &opt, const std::string &stack_path, double threshold, const std::string &out,
                const std::string &json_out) {
  const RunSettings s = opt.settings();
  const SliceStack stack = read_stack(stack_path);
  if (stack.normalization != Normalization::None)
    throw ContractError("metrics need a raw (normalization none) stack");
  const Scene scene = build_scene(s.scene, s.cfg);
  const DepthMap dm = assemble_3d(assemble_input(stack), s.cfg, threshold);
  const auto report = evaluate(stack, dm, scene, s.cfg);
  const auto text = format_metrics_text(report);
  if (out.empty())
    std::cout << text;
  else
    write_file_atomic(out, text);
  if (!json_out.empty())
    write_file_atomic(json_out, format_metrics_json(report));
  return 0;
}

int cmd_pipeline(const RunOptions &opt, const std::string &replay, std::optional<double> threshold,
                 const std::string &outdir, unsigned workers) {
  RunSettings s = replay.empty() ? opt.settings() : parse_manifest(read_text(replay));
  if (threshold)
    s.threshold = *threshold;
  const auto r = run_pipeline(s, outdir, workers);
  std::cout << format_metrics_text(r.metrics);
  return 0;
}

int cmd_presets() {
  for (const auto &p : presets()) {
    const auto &s = p.settings;
    std::printf("%-14s  %s\n", p.name.c_str(), p.description.c_str());
    std::printf("%-14s  scene=%s range_l0=%g m N=%llu footprint=%.4f m\n", "", s.scene.id().c_str(),
                s.cfg.range_l0, static_cast<unsigned long long>(s.n), pixel_footprint(s.cfg));
  }
  return 0;
}

int cmd_info(const ConfigOptions &copt) {
  const OpticsConfig cfg = copt.apply(find_preset(copt.preset).settings.cfg);
  const auto grid = grid_spec(cfg);
  std::cout << format_config(cfg);
  std::printf("# derived\n");
  std::printf("scale_factor = %.9g\n", scale_factor(cfg));
  std::printf("pixel_footprint_m = %.9g\n", pixel_footprint(cfg));
  std::printf("fov_on_target_m = %.9g\n", fov_on_target(cfg));
  std::printf("axial_bin_depth_m = %.9g\n", axial_bin_depth(cfg));
  std::printf("samples_per_slice = %d\n", samples_per_slice(cfg));
  std::printf("trace_length = %zu\n", trace_length(cfg));
  std::printf("speckle_corr_len_px = %.9g\n", corr_len_pixels(grid, cfg.speckle_corr_len_target));
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Ghost-imaging ladar simulator and 3D reconstruction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  unsigned workers = 0;
  auto add_workers = [&](CLI::App *cmd) {
    cmd->add_option("-j,--workers", workers, "Worker threads (default: $GIL_WORKERS or 1)");
  };

  auto *sim = app.add_subcommand("simulate", "Simulate a measurement campaign into a record file");
  RunOptions sim_opt;
  std::string sim_out;
  sim_opt.attach(sim);
  add_workers(sim);
  sim->add_option("-o,--out", sim_out, "Record file to write")->required();

  auto *rec = app.add_subcommand("reconstruct", "Correlate a record into a slice stack");
  std::string rec_in, rec_out, rec_norm = "none", rec_pgm;
  rec->add_option("-r,--record", rec_in, "Record file")->required();
  rec->add_option("-o,--out", rec_out, "Stack file to write")->required();
  rec->add_option("--normalization", rec_norm, "none, per_slice_minmax, per_slice_zscore or global_minmax");
  rec->add_option("--pgm-dir", rec_pgm, "Directory for one PGM per slice");

  auto *asmb = app.add_subcommand("assemble", "Turn a slice stack into depth map and point cloud");
  ConfigOptions asm_cfg;
  std::string asm_stack, asm_ply, asm_csv, asm_pgm;
  double asm_threshold = 0.3;
  asm_cfg.attach(asmb);
  asmb->add_option("-s,--stack", asm_stack, "Stack file")->required();
  asmb->add_option("-t,--threshold", asm_threshold, "Validity threshold on the normalized peak");
  asmb->add_option("--ply", asm_ply, "Point cloud output (ASCII PLY)");
  asmb->add_option("--depth-csv", asm_csv, "Depth map CSV output");
  asmb->add_option("--depth-pgm", asm_pgm, "Depth map 16-bit PGM output");

  auto *met = app.add_subcommand("metrics", "Score a raw slice stack against the scene truth");
  RunOptions met_opt;
  std::string met_stack, met_out, met_json;
  double met_threshold = 0.3;
  met_opt.attach(met);
  met->add_option("-s,--stack", met_stack, "Raw stack file")->required();
  met->add_option("-t,--threshold", met_threshold, "Validity threshold");
  met->add_option("-o,--out", met_out, "Metrics text file (default: stdout)");
  met->add_option("--json", met_json, "Metrics JSON file");

  auto *pipe = app.add_subcommand("pipeline", "Simulate, reconstruct, assemble and score in one go");
  RunOptions pipe_opt;
  std::string pipe_outdir, pipe_replay;
  std::optional<double> pipe_threshold;
  pipe_opt.attach(pipe);
  add_workers(pipe);
  pipe->add_option("--replay", pipe_replay, "Re-run the settings stored in a manifest.json");
  pipe->add_option("-t,--threshold", pipe_threshold, "Validity threshold");
  pipe->add_option("-o,--outdir", pipe_outdir, "Output directory")->required();

  app.add_subcommand("presets", "List the named scenarios");

  auto *info = app.add_subcommand("info", "Print the resolved configuration and derived geometry");
  ConfigOptions info_cfg;
  info_cfg.attach(info);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorKind::Config);
  }

  try {
    if (workers == 0)
      workers = default_workers();
    if (*sim)
      return cmd_simulate(sim_opt, sim_out, workers);
    if (*rec)
      return cmd_reconstruct(rec_in, rec_out, rec_norm, rec_pgm);
    if (*asmb)
      return cmd_assemble(asm_cfg, asm_stack, asm_threshold, asm_ply, asm_csv, asm_pgm);
    if (*met)
      return cmd_metrics(met_opt, met_stack, met_threshold, met_out, met_json);
    if (*pipe)
      return cmd_pipeline(pipe_opt, pipe_replay, pipe_threshold, pipe_outdir, workers);
    if (app.got_subcommand("presets"))
      return cmd_presets();
    if (*info)
      return cmd_info(info_cfg);
  } catch (const Error &e) {
    std::fprintf(stderr, "gil: error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception &e) {
    std::fprintf(stderr, "gil: error: %s\n", e.what());
    return static_cast<int>(ErrorKind::Generic);
  }
  return 0;
}
