#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

namespace gil {

inline constexpr double kSpeedOfLight = 299792458.0; // m/s, exact SI value

enum class ApertureShape { Gaussian, Disk };
enum class PulseProfile { Rect, Gaussian };

/// System parameters of the ladar. SI units throughout.
///
/// Depth is measured relative to the nominal range `range_l0`; the digitizer
/// window opens `gate_lead` seconds before the nominal-range echo arrives, so
/// zero relative depth sits at that time inside the window.
struct OpticsConfig {
  double wavelength = 532e-9;
  double pulse_width = 10e-9;
  double sample_rate = 1e9;
  double slice_width = 4e-9;
  double f0 = 0.360;
  double mag_ref = 1.75;
  double range_l0 = 1000.0;
  double pixel_pitch = 112e-6;
  int grid_nx = 64;
  int grid_ny = 64;
  int n_slices = 32;
  double speckle_corr_len_target = 0.25;
  double gate_lead = 10e-9;
  ApertureShape speckle_aperture = ApertureShape::Gaussian;
  PulseProfile pulse_profile = PulseProfile::Rect;

  static constexpr double c_light = kSpeedOfLight;

  bool operator==(const OpticsConfig &) const = default;
};

/// CCD grid and its image on the target plane.
struct GridSpec {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double pitch_ccd = 0.0;
  double pitch_target = 0.0;

  std::size_t size() const noexcept { return nx * ny; }
  bool operator==(const GridSpec &) const = default;
};

/// Throws ConfigError describing the first violated constraint.
void validate(const OpticsConfig &cfg);

/// Lateral magnification from the CCD plane to the target plane.
double scale_factor(const OpticsConfig &cfg);

/// Size of one CCD pixel projected onto the target plane (m).
double pixel_footprint(const OpticsConfig &cfg);

/// Lateral extent of the grid on the target plane along x (m).
double fov_on_target(const OpticsConfig &cfg);

double axial_bin_depth(double slice_width);
double axial_bin_depth(const OpticsConfig &cfg);

int samples_per_slice(const OpticsConfig &cfg);
std::size_t trace_length(const OpticsConfig &cfg);

GridSpec grid_spec(const OpticsConfig &cfg);

/// Depth (relative to l0) of the centre of 1-based slice `s`, given the time
/// `t0` (measured from the window start) that corresponds to zero depth.
/// Throws IndexError if s is outside [1, n_slices].
double slice_to_depth(int s, const OpticsConfig &cfg, double t0);
double slice_to_depth(int s, const OpticsConfig &cfg);

/// 1-based slice containing the echo of a reflector at relative depth `z`.
/// May fall outside [1, n_slices]; callers validate.
int depth_to_slice(double z, const OpticsConfig &cfg, double t0);
int depth_to_slice(double z, const OpticsConfig &cfg);

// Config files: one `key = value` pair per line, `#` starts a comment.
// Keys are the OpticsConfig field names; unknown keys are rejected.
OpticsConfig parse_config(const std::string &text, const OpticsConfig &base = {});
OpticsConfig load_config(const std::string &path, const OpticsConfig &base = {});
/// Applies a single key/value override (same rules as the file format).
void set_config_value(OpticsConfig &cfg, const std::string &key, const std::string &value);
std::string format_config(const OpticsConfig &cfg);

std::string to_string(ApertureShape a);
std::string to_string(PulseProfile p);

} // namespace gil
