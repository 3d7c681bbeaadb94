#include "gil/scene.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "gil/error.hpp"
#include "gil/io.hpp"

namespace gil {

namespace {

std::string shape_str(std::size_t nx, std::size_t ny) {
  return std::to_string(nx) + "x" + std::to_string(ny);
}

std::string pixel_str(std::size_t ix, std::size_t iy) {
  return "(" + std::to_string(ix) + ", " + std::to_string(iy) + ")";
}

struct SceneBuilder {
  explicit SceneBuilder(const GridSpec &g)
      : grid(g), refl(g.nx, g.ny, 0.0), depth(g.nx, g.ny, std::nan("")), mask(g.nx, g.ny, 0) {}

  // Half-open pixel rectangle given as grid fractions.
  void rect(double x0, double x1, double y0, double y1, double z, double r) {
    const auto ix0 = frac(x0, grid.nx), ix1 = frac(x1, grid.nx);
    const auto iy0 = frac(y0, grid.ny), iy1 = frac(y1, grid.ny);
    for (std::size_t iy = iy0; iy < iy1; ++iy)
      for (std::size_t ix = ix0; ix < ix1; ++ix)
        set(ix, iy, z, r);
  }

  void disk(double cx, double cy, double radius, double z, double r) {
    const double px = cx * static_cast<double>(grid.nx), py = cy * static_cast<double>(grid.ny);
    const double rad = radius * static_cast<double>(grid.nx);
    for (std::size_t iy = 0; iy < grid.ny; ++iy)
      for (std::size_t ix = 0; ix < grid.nx; ++ix) {
        const double dx = static_cast<double>(ix) + 0.5 - px;
        const double dy = static_cast<double>(iy) + 0.5 - py;
        if (dx * dx + dy * dy <= rad * rad)
          set(ix, iy, z, r);
      }
  }

  void set(std::size_t ix, std::size_t iy, double z, double r) {
    refl(ix, iy) = r;
    depth(ix, iy) = z;
    mask(ix, iy) = 1;
  }

  static std::size_t frac(double f, std::size_t n) {
    return static_cast<std::size_t>(std::lround(f * static_cast<double>(n)));
  }

  Scene build() { return Scene(std::move(refl), std::move(depth), std::move(mask), grid); }

  GridSpec grid;
  Image refl;
  Image depth;
  Mask mask;
};

} // namespace

Scene::Scene(Image reflectivity, Image depth, Mask mask, GridSpec grid)
    : reflectivity_(std::move(reflectivity)), depth_(std::move(depth)), mask_(std::move(mask)),
      grid_(grid) {
  if (!reflectivity_.same_shape(grid_.nx, grid_.ny) || !depth_.same_shape(grid_.nx, grid_.ny) ||
      !mask_.same_shape(grid_.nx, grid_.ny))
    throw DimensionError("scene: reflectivity " + shape_str(reflectivity_.nx(), reflectivity_.ny()) +
                         ", depth " + shape_str(depth_.nx(), depth_.ny()) + ", mask " +
                         shape_str(mask_.nx(), mask_.ny()) + " must all match grid " +
                         shape_str(grid_.nx, grid_.ny));
  for (std::size_t iy = 0; iy < grid_.ny; ++iy)
    for (std::size_t ix = 0; ix < grid_.nx; ++ix) {
      const double r = reflectivity_(ix, iy);
      if (!(r >= 0.0 && r <= 1.0))
        throw ConfigError("scene: reflectivity " + std::to_string(r) + " at pixel " + pixel_str(ix, iy) +
                          " is outside [0, 1]");
      if (mask_(ix, iy) && !std::isfinite(depth_(ix, iy)))
        throw ConfigError("scene: non-finite depth at lit pixel " + pixel_str(ix, iy));
    }
}

std::size_t Scene::lit_count() const noexcept {
  std::size_t n = 0;
  for (auto m : mask_.flat())
    n += m ? 1 : 0;
  return n;
}

std::string SceneSpec::id() const {
  char buf[64];
  switch (kind) {
  case SceneKind::TwoPlane:
    std::snprintf(buf, sizeof buf, "two_plane:%g", dz);
    return buf;
  case SceneKind::Staircase:
    std::snprintf(buf, sizeof buf, "staircase:%d:%g", steps, dz);
    return buf;
  case SceneKind::Facade:
    return "facade";
  case SceneKind::Landscape:
    return "landscape";
  case SceneKind::Edge:
    return "edge";
  }
  return "unknown";
}

SceneSpec parse_scene_spec(const std::string &text) {
  std::vector<std::string> parts;
  std::istringstream in(text);
  for (std::string p; std::getline(in, p, ':');)
    parts.push_back(p);
  if (parts.empty())
    throw ConfigError("scene: empty scene specification");
  auto num = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      const double v = std::stod(parts.at(i), &used);
      if (used != parts[i].size())
        throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception &) {
      throw ConfigError("scene: bad parameter in '" + text + "'");
    }
  };
  SceneSpec s;
  const auto &name = parts[0];
  if (name == "two_plane" && parts.size() == 2) {
    s.kind = SceneKind::TwoPlane;
    s.dz = num(1);
  } else if (name == "staircase" && parts.size() == 3) {
    s.kind = SceneKind::Staircase;
    s.steps = static_cast<int>(num(1));
    s.dz = num(2);
  } else if (name == "facade" && parts.size() == 1) {
    s.kind = SceneKind::Facade;
  } else if (name == "landscape" && parts.size() == 1) {
    s.kind = SceneKind::Landscape;
  } else if (name == "edge" && parts.size() == 1) {
    s.kind = SceneKind::Edge;
  } else {
    throw ConfigError("scene: unrecognized scene '" + text +
                      "' (expected two_plane:DZ, staircase:N:DZ, facade, landscape or edge)");
  }
  return s;
}

Scene make_test_scene(const SceneSpec &spec, const GridSpec &grid, const OpticsConfig &cfg) {
  validate(cfg);
  if (grid.nx < 8 || grid.ny < 8)
    throw ConfigError("scene: synthetic scenes need at least an 8x8 grid");
  const double bin = axial_bin_depth(cfg);
  const double z0 = spec.depth;
  SceneBuilder b(grid);
  switch (spec.kind) {
  case SceneKind::TwoPlane:
    if (!(spec.dz > 0.0))
      throw ConfigError("scene: two_plane separation must be > 0");
    b.rect(1.0 / 8, 3.0 / 8, 1.0 / 4, 3.0 / 4, z0, 1.0);
    b.rect(5.0 / 8, 7.0 / 8, 1.0 / 4, 3.0 / 4, z0 + spec.dz, 1.0);
    break;
  case SceneKind::Staircase: {
    if (!(spec.dz > 0.0))
      throw ConfigError("scene: staircase step must be > 0");
    if (spec.steps < 1)
      throw ConfigError("scene: staircase needs at least one step");
    const double w = 6.0 / 8 / spec.steps;
    for (int k = 0; k < spec.steps; ++k)
      b.rect(1.0 / 8 + k * w, 1.0 / 8 + (k + 1) * w, 1.0 / 4, 3.0 / 4, z0 + k * spec.dz, 1.0);
    break;
  }
  case SceneKind::Facade:
    b.rect(1.0 / 8, 7.0 / 8, 1.0 / 2, 7.0 / 8, z0, 0.8);           // main face
    b.rect(3.0 / 8, 5.0 / 8, 1.0 / 8, 1.0 / 2, z0 + 2 * bin, 0.9); // set-back tower
    b.rect(1.0 / 8, 3.0 / 8, 3.0 / 8, 1.0 / 2, z0 + 4 * bin, 0.6); // left wing roof
    b.rect(5.0 / 8, 7.0 / 8, 3.0 / 8, 1.0 / 2, z0 + 6 * bin, 0.7); // right wing roof
    break;
  case SceneKind::Landscape:
    b.disk(0.20, 0.30, 0.11, z0, 0.5);                             // near tree crown
    b.rect(0.18, 0.22, 0.41, 0.60, z0, 0.4);                       // its trunk
    b.rect(0.38, 0.60, 0.50, 0.80, z0 + 4 * bin, 0.9);             // house
    b.disk(0.80, 0.28, 0.11, z0 + 8 * bin, 0.6);                   // far tree crown
    b.rect(0.78, 0.82, 0.39, 0.55, z0 + 8 * bin, 0.4);             // its trunk
    b.rect(0.68, 0.92, 0.66, 0.90, z0 + 12 * bin, 0.8);            // shed
    break;
  case SceneKind::Edge:
    b.rect(1.0 / 2, 1.0, 0.0, 1.0, z0, 1.0);
    break;
  }
  Scene scene = b.build();
  for (std::size_t i = 0; i < scene.mask().size(); ++i) {
    if (!scene.mask()[i])
      continue;
    const int s = depth_to_slice(scene.depth()[i], cfg);
    if (s < 1 || s > cfg.n_slices)
      throw ConfigError("scene: surface at depth " + std::to_string(scene.depth()[i]) +
                        " m falls outside the " + std::to_string(cfg.n_slices) + "-slice window");
  }
  return scene;
}

Array2D<int> truth_slices(const Scene &scene, const OpticsConfig &cfg) {
  Array2D<int> out(scene.grid().nx, scene.grid().ny, 0);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (scene.mask()[i])
      out[i] = depth_to_slice(scene.depth()[i], cfg);
  return out;
}

Scene load_scene(const std::string &reflectivity_path, const std::string &depth_path, const GridSpec &grid) {
  for (const auto &p : {reflectivity_path, depth_path})
    if (!std::filesystem::exists(p))
      throw IoError("scene: file not found '" + p + "'");

  Image refl;
  if (std::filesystem::path(reflectivity_path).extension() == ".pgm") {
    const auto pgm = read_pgm(reflectivity_path);
    refl = Image(pgm.pixels.nx(), pgm.pixels.ny());
    for (std::size_t i = 0; i < refl.size(); ++i)
      refl[i] = static_cast<double>(pgm.pixels[i]) / pgm.maxval;
  } else {
    refl = read_csv(reflectivity_path);
  }
  Image depth = read_csv(depth_path);
  if (!refl.same_shape(grid.nx, grid.ny) || !depth.same_shape(grid.nx, grid.ny))
    throw DimensionError("scene: reflectivity " + shape_str(refl.nx(), refl.ny()) + " / depth " +
                         shape_str(depth.nx(), depth.ny()) + " do not match grid " +
                         shape_str(grid.nx, grid.ny));
  Mask mask(grid.nx, grid.ny, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (std::isinf(depth[i]))
      throw ConfigError("scene: infinite depth at pixel " + pixel_str(i % grid.nx, i / grid.nx));
    mask[i] = std::isnan(depth[i]) ? 0 : 1;
  }
  return Scene(std::move(refl), std::move(depth), std::move(mask), grid);
}

} // namespace gil
