#pragma once

#include <string>
#include <vector>

#include "gil/array2d.hpp"
#include "gil/geometry.hpp"
#include "gil/reconstruction.hpp"

namespace gil {

/// Per-pixel range assignment. `slice` is the winning 1-based slice (0 where
/// invalid); depth lies on the slice-centre lattice and is NaN where invalid.
struct DepthMap {
  std::size_t nx = 0, ny = 0;
  int n_slices = 0;
  Image depth;
  Array2D<float> confidence; // normalized dG of the winning slice
  Mask valid;
  Array2D<int> slice;

  std::size_t valid_count() const;
  // NaN depths of invalid pixels compare equal
  bool operator==(const DepthMap &o) const;
};

/// Winner-take-all over slices: s*(x) = argmax_s dG[s, x], ties going to the
/// smaller s (nearer surface); the pixel is valid iff dG[s*, x] >= threshold.
/// The stack must be global_minmax normalized (ContractError otherwise) and
/// threshold must lie in [0, 1] (ConfigError otherwise).
DepthMap assemble_3d(const SliceStack &stack, const OpticsConfig &cfg, double threshold);

struct CloudPoint {
  float x, y, z, intensity;
};

/// Target-plane coordinates of pixel centres: x grows with the column, y with
/// decreasing row (image up), both centred on the optical axis.
std::vector<CloudPoint> to_pointcloud(const DepthMap &dm, const OpticsConfig &cfg);

/// ASCII PLY 1.0 with one `x y z intensity` float vertex per valid pixel.
void export_pointcloud(const DepthMap &dm, const OpticsConfig &cfg, const std::string &path);
std::vector<CloudPoint> read_pointcloud(const std::string &path);
/// Inverse of export_pointcloud for clouds written with the same config.
DepthMap import_pointcloud(const std::string &path, const OpticsConfig &cfg);

/// Valid-pixel count per slice (index s-1).
std::vector<std::size_t> depth_histogram(const DepthMap &dm);

/// Slices holding at least `fraction` of the fullest slice's count (1-based).
std::vector<int> dominant_slices(const std::vector<std::size_t> &histogram, double fraction = 0.25);

/// Depth in metres, "nan" where invalid.
void export_depth_csv(const DepthMap &dm, const std::string &path);
/// Rebuilds a DepthMap from a depth CSV (confidence is not stored and reads
/// back as zero).
DepthMap import_depth_csv(const std::string &path, const OpticsConfig &cfg);

/// 16-bit PGM: 0 = invalid, otherwise 1 + round(65534 * (s* - 1) / (m - 1))
/// (or 65535 for m = 1), i.e. near = dark, far = bright on the slice lattice.
void export_depth_pgm(const DepthMap &dm, const std::string &path);

} // namespace gil
