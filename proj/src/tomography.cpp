#include "gil/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gil/error.hpp"
#include "gil/io.hpp"

namespace gil {

namespace {

DepthMap empty_map(std::size_t nx, std::size_t ny, int m) {
  return DepthMap{nx,
                  ny,
                  m,
                  Image(nx, ny, std::nan("")),
                  Array2D<float>(nx, ny, 0.0f),
                  Mask(nx, ny, 0),
                  Array2D<int>(nx, ny, 0)};
}

void set_pixel(DepthMap &dm, std::size_t i, int s, float conf, const OpticsConfig &cfg) {
  dm.valid[i] = 1;
  dm.slice[i] = s;
  dm.depth[i] = slice_to_depth(s, cfg);
  dm.confidence[i] = conf;
}

} // namespace

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.flat().begin(), valid.flat().end(), 1));
}

bool DepthMap::operator==(const DepthMap &o) const {
  if (nx != o.nx || ny != o.ny || n_slices != o.n_slices || !(confidence == o.confidence) || !(valid == o.valid) ||
      !(slice == o.slice) || !depth.same_shape(o.depth))
    return false;
  for (std::size_t i = 0; i < depth.size(); ++i)
    if (depth[i] != o.depth[i] && !(std::isnan(depth[i]) && std::isnan(o.depth[i])))
      return false;
  return true;
}

DepthMap assemble_3d(const SliceStack &stack, const OpticsConfig &cfg, double threshold) {
  if (stack.normalization != Normalization::GlobalMinMax)
    throw ContractError("assemble_3d: stack must be global_minmax normalized (got " +
                        to_string(stack.normalization) + ")");
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw ConfigError("assemble_3d: threshold " + std::to_string(threshold) + " outside [0, 1]");
  if (stack.m != static_cast<std::size_t>(cfg.n_slices))
    throw DimensionError("assemble_3d: stack has " + std::to_string(stack.m) + " slices, config expects " +
                         std::to_string(cfg.n_slices));
  DepthMap dm = empty_map(stack.nx, stack.ny, static_cast<int>(stack.m));
  const std::size_t npix = stack.nx * stack.ny;
  for (std::size_t i = 0; i < npix; ++i) {
    std::size_t best = 0;
    double best_v = stack.data[i];
    for (std::size_t s = 1; s < stack.m; ++s) {
      const double v = stack.data[s * npix + i];
      if (v > best_v) {
        best_v = v;
        best = s;
      }
    }
    if (best_v >= threshold)
      set_pixel(dm, i, static_cast<int>(best) + 1, static_cast<float>(best_v), cfg);
  }
  return dm;
}

std::vector<CloudPoint> to_pointcloud(const DepthMap &dm, const OpticsConfig &cfg) {
  const double pitch = pixel_footprint(cfg);
  std::vector<CloudPoint> pts;
  pts.reserve(dm.valid_count());
  for (std::size_t iy = 0; iy < dm.ny; ++iy)
    for (std::size_t ix = 0; ix < dm.nx; ++ix) {
      if (!dm.valid(ix, iy))
        continue;
      const double x = (static_cast<double>(ix) + 0.5 - static_cast<double>(dm.nx) / 2.0) * pitch;
      const double y = (static_cast<double>(dm.ny) / 2.0 - static_cast<double>(iy) - 0.5) * pitch;
      pts.push_back({static_cast<float>(x), static_cast<float>(y), static_cast<float>(dm.depth(ix, iy)),
                     dm.confidence(ix, iy)});
    }
  return pts;
}

void export_pointcloud(const DepthMap &dm, const OpticsConfig &cfg, const std::string &path) {
  const auto pts = to_pointcloud(dm, cfg);
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write point cloud '" + path + "'");
  out << "ply\nformat ascii 1.0\nelement vertex " << pts.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nproperty float intensity\nend_header\n";
  char buf[128];
  for (const auto &p : pts) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %.9g\n", p.x, p.y, p.z, p.intensity);
    out << buf;
  }
  if (!out)
    throw IoError("write failed for point cloud '" + path + "'");
}

std::vector<CloudPoint> read_pointcloud(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open point cloud '" + path + "'");
  std::string line;
  std::size_t count = 0;
  bool have_count = false;
  if (!std::getline(in, line) || line != "ply")
    throw IoError("'" + path + "' is not a PLY file");
  while (std::getline(in, line) && line != "end_header") {
    std::istringstream ls(line);
    std::string a, b;
    ls >> a >> b;
    if (a == "format" && b != "ascii")
      throw IoError("'" + path + "': only ASCII PLY is supported");
    if (a == "element" && b == "vertex") {
      ls >> count;
      have_count = true;
    }
  }
  if (!have_count)
    throw IoError("'" + path + "': missing vertex element");
  std::vector<CloudPoint> pts(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (!(in >> pts[k].x >> pts[k].y >> pts[k].z >> pts[k].intensity))
      throw IoError("'" + path + "': truncated at vertex " + std::to_string(k));
  }
  return pts;
}

DepthMap import_pointcloud(const std::string &path, const OpticsConfig &cfg) {
  const auto pts = read_pointcloud(path);
  const auto nx = static_cast<std::size_t>(cfg.grid_nx), ny = static_cast<std::size_t>(cfg.grid_ny);
  const double pitch = pixel_footprint(cfg);
  DepthMap dm = empty_map(nx, ny, cfg.n_slices);
  for (const auto &p : pts) {
    const double fx = p.x / pitch + static_cast<double>(nx) / 2.0 - 0.5;
    const double fy = static_cast<double>(ny) / 2.0 - 0.5 - p.y / pitch;
    const long ix = std::lround(fx), iy = std::lround(fy);
    if (ix < 0 || iy < 0 || ix >= static_cast<long>(nx) || iy >= static_cast<long>(ny))
      throw DimensionError("'" + path + "': vertex outside the configured grid");
    // Depths sit on the slice lattice; recover the slice by nearest centre.
    const double s_real = (2.0 * p.z / kSpeedOfLight + cfg.gate_lead) / cfg.slice_width + 0.5;
    const int s = static_cast<int>(std::lround(s_real));
    set_pixel(dm, static_cast<std::size_t>(iy) * nx + static_cast<std::size_t>(ix), s, p.intensity, cfg);
  }
  return dm;
}

std::vector<std::size_t> depth_histogram(const DepthMap &dm) {
  std::vector<std::size_t> h(static_cast<std::size_t>(std::max(dm.n_slices, 0)), 0);
  for (std::size_t i = 0; i < dm.valid.size(); ++i)
    if (dm.valid[i])
      ++h.at(static_cast<std::size_t>(dm.slice[i] - 1));
  return h;
}

std::vector<int> dominant_slices(const std::vector<std::size_t> &histogram, double fraction) {
  std::vector<int> out;
  const auto peak = histogram.empty() ? 0 : *std::max_element(histogram.begin(), histogram.end());
  if (peak == 0)
    return out;
  for (std::size_t s = 0; s < histogram.size(); ++s)
    if (static_cast<double>(histogram[s]) >= fraction * static_cast<double>(peak))
      out.push_back(static_cast<int>(s) + 1);
  return out;
}

void export_depth_csv(const DepthMap &dm, const std::string &path) { write_csv(path, dm.depth); }

DepthMap import_depth_csv(const std::string &path, const OpticsConfig &cfg) {
  const Image depth = read_csv(path);
  DepthMap dm = empty_map(depth.nx(), depth.ny(), cfg.n_slices);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (std::isnan(depth[i]))
      continue;
    const int s = depth_to_slice(depth[i], cfg);
    if (s < 1 || s > cfg.n_slices)
      throw DimensionError("'" + path + "': depth outside the slice window");
    set_pixel(dm, i, s, 0.0f, cfg);
  }
  return dm;
}

void export_depth_pgm(const DepthMap &dm, const std::string &path) {
  GreyMap img{Array2D<std::uint16_t>(dm.nx, dm.ny, 0), 65535};
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    if (!dm.valid[i])
      continue;
    const double u = dm.n_slices > 1 ? static_cast<double>(dm.slice[i] - 1) / (dm.n_slices - 1) : 1.0;
    img.pixels[i] = static_cast<std::uint16_t>(1 + std::lround(u * 65534.0));
  }
  write_pgm(path, img);
}

} // namespace gil
