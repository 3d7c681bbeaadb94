#include "gil/geometry.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gil/error.hpp"

namespace gil {

namespace {

void require_positive(double v, const char *name) {
  if (!(std::isfinite(v) && v > 0.0))
    throw ConfigError(std::string("config: ") + name + " must be finite and > 0");
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string &key, const std::string &v) {
  double out = 0.0;
  const auto *end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  return out;
}

int parse_int(const std::string &key, const std::string &v) {
  int out = 0;
  const auto *end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

void validate(const OpticsConfig &cfg) {
  require_positive(cfg.wavelength, "wavelength");
  require_positive(cfg.pulse_width, "pulse_width");
  require_positive(cfg.sample_rate, "sample_rate");
  require_positive(cfg.slice_width, "slice_width");
  require_positive(cfg.f0, "f0");
  require_positive(cfg.mag_ref, "mag_ref");
  require_positive(cfg.range_l0, "range_l0");
  require_positive(cfg.pixel_pitch, "pixel_pitch");
  require_positive(cfg.speckle_corr_len_target, "speckle_corr_len_target");
  if (!(std::isfinite(cfg.gate_lead) && cfg.gate_lead >= 0.0))
    throw ConfigError("config: gate_lead must be finite and >= 0");
  if (cfg.grid_nx < 2 || cfg.grid_ny < 2)
    throw ConfigError("config: grid_nx and grid_ny must be >= 2");
  if (cfg.n_slices < 1)
    throw ConfigError("config: n_slices must be >= 1");
  const double sps = cfg.sample_rate * cfg.slice_width;
  if (std::round(sps) < 1.0 || std::abs(sps - std::round(sps)) > 1e-9 * sps)
    throw ConfigError("config: sample_rate * slice_width must be a positive integer, got " +
                      fmt_double(sps));
}

// Lateral geometry only depends on these; a single-pixel grid is fine here.
static void validate_lateral(const OpticsConfig &cfg) {
  require_positive(cfg.f0, "f0");
  require_positive(cfg.mag_ref, "mag_ref");
  require_positive(cfg.range_l0, "range_l0");
  require_positive(cfg.pixel_pitch, "pixel_pitch");
}

double scale_factor(const OpticsConfig &cfg) {
  validate_lateral(cfg);
  return (cfg.range_l0 / cfg.f0) / cfg.mag_ref;
}

double pixel_footprint(const OpticsConfig &cfg) { return cfg.pixel_pitch * scale_factor(cfg); }

double fov_on_target(const OpticsConfig &cfg) {
  if (cfg.grid_nx < 1)
    throw ConfigError("config: grid_nx must be >= 1");
  return static_cast<double>(cfg.grid_nx) * pixel_footprint(cfg);
}

double axial_bin_depth(double slice_width) { return kSpeedOfLight * slice_width / 2.0; }

double axial_bin_depth(const OpticsConfig &cfg) { return axial_bin_depth(cfg.slice_width); }

int samples_per_slice(const OpticsConfig &cfg) {
  validate(cfg);
  return static_cast<int>(std::lround(cfg.sample_rate * cfg.slice_width));
}

std::size_t trace_length(const OpticsConfig &cfg) {
  return static_cast<std::size_t>(cfg.n_slices) * static_cast<std::size_t>(samples_per_slice(cfg));
}

GridSpec grid_spec(const OpticsConfig &cfg) {
  return GridSpec{static_cast<std::size_t>(cfg.grid_nx), static_cast<std::size_t>(cfg.grid_ny),
                  cfg.pixel_pitch, pixel_footprint(cfg)};
}

double slice_to_depth(int s, const OpticsConfig &cfg, double t0) {
  if (s < 1 || s > cfg.n_slices)
    throw IndexError("slice index " + std::to_string(s) + " outside [1, " +
                     std::to_string(cfg.n_slices) + "]");
  const double t_center = (static_cast<double>(s) - 0.5) * cfg.slice_width;
  return kSpeedOfLight * (t_center - t0) / 2.0;
}

double slice_to_depth(int s, const OpticsConfig &cfg) { return slice_to_depth(s, cfg, cfg.gate_lead); }

int depth_to_slice(double z, const OpticsConfig &cfg, double t0) {
  const double t = t0 + 2.0 * z / kSpeedOfLight;
  return static_cast<int>(std::floor(t / cfg.slice_width)) + 1;
}

int depth_to_slice(double z, const OpticsConfig &cfg) { return depth_to_slice(z, cfg, cfg.gate_lead); }

std::string to_string(ApertureShape a) { return a == ApertureShape::Gaussian ? "gaussian" : "disk"; }
std::string to_string(PulseProfile p) { return p == PulseProfile::Rect ? "rect" : "gaussian"; }

void set_config_value(OpticsConfig &cfg, const std::string &key, const std::string &value) {
  const std::string v = trim(value);
  if (key == "wavelength") cfg.wavelength = parse_double(key, v);
  else if (key == "pulse_width") cfg.pulse_width = parse_double(key, v);
  else if (key == "sample_rate") cfg.sample_rate = parse_double(key, v);
  else if (key == "slice_width") cfg.slice_width = parse_double(key, v);
  else if (key == "f0") cfg.f0 = parse_double(key, v);
  else if (key == "mag_ref") cfg.mag_ref = parse_double(key, v);
  else if (key == "range_l0") cfg.range_l0 = parse_double(key, v);
  else if (key == "pixel_pitch") cfg.pixel_pitch = parse_double(key, v);
  else if (key == "grid_nx") cfg.grid_nx = parse_int(key, v);
  else if (key == "grid_ny") cfg.grid_ny = parse_int(key, v);
  else if (key == "n_slices") cfg.n_slices = parse_int(key, v);
  else if (key == "speckle_corr_len_target") cfg.speckle_corr_len_target = parse_double(key, v);
  else if (key == "gate_lead") cfg.gate_lead = parse_double(key, v);
  else if (key == "speckle_aperture") {
    if (v == "gaussian") cfg.speckle_aperture = ApertureShape::Gaussian;
    else if (v == "disk") cfg.speckle_aperture = ApertureShape::Disk;
    else throw ConfigError("config: speckle_aperture must be 'gaussian' or 'disk', got '" + v + "'");
  } else if (key == "pulse_profile") {
    if (v == "rect") cfg.pulse_profile = PulseProfile::Rect;
    else if (v == "gaussian") cfg.pulse_profile = PulseProfile::Gaussian;
    else throw ConfigError("config: pulse_profile must be 'rect' or 'gaussian', got '" + v + "'");
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

OpticsConfig parse_config(const std::string &text, const OpticsConfig &base) {
  OpticsConfig cfg = base;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  validate(cfg);
  return cfg;
}

OpticsConfig load_config(const std::string &path, const OpticsConfig &base) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

std::string format_config(const OpticsConfig &cfg) {
  std::ostringstream o;
  o << "wavelength = " << fmt_double(cfg.wavelength) << '\n'
    << "pulse_width = " << fmt_double(cfg.pulse_width) << '\n'
    << "pulse_profile = " << to_string(cfg.pulse_profile) << '\n'
    << "sample_rate = " << fmt_double(cfg.sample_rate) << '\n'
    << "slice_width = " << fmt_double(cfg.slice_width) << '\n'
    << "f0 = " << fmt_double(cfg.f0) << '\n'
    << "mag_ref = " << fmt_double(cfg.mag_ref) << '\n'
    << "range_l0 = " << fmt_double(cfg.range_l0) << '\n'
    << "pixel_pitch = " << fmt_double(cfg.pixel_pitch) << '\n'
    << "grid_nx = " << cfg.grid_nx << '\n'
    << "grid_ny = " << cfg.grid_ny << '\n'
    << "n_slices = " << cfg.n_slices << '\n'
    << "speckle_corr_len_target = " << fmt_double(cfg.speckle_corr_len_target) << '\n'
    << "speckle_aperture = " << to_string(cfg.speckle_aperture) << '\n'
    << "gate_lead = " << fmt_double(cfg.gate_lead) << '\n';
  return o.str();
}

} // namespace gil
