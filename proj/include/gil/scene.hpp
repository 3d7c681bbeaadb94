#pragma once

#include <string>

#include "gil/array2d.hpp"
#include "gil/geometry.hpp"

namespace gil {

/// Remote target on the target grid. Depth is relative to the nominal range.
/// Pixels with mask == 0 return no light, whatever their other values.
class Scene {
public:
  Scene() = default;
  /// Validates ranges and shapes; throws with the offending pixel coordinates.
  Scene(Image reflectivity, Image depth, Mask mask, GridSpec grid);

  const Image &reflectivity() const noexcept { return reflectivity_; }
  const Image &depth() const noexcept { return depth_; }
  const Mask &mask() const noexcept { return mask_; }
  const GridSpec &grid() const noexcept { return grid_; }
  std::size_t lit_count() const noexcept;

private:
  Image reflectivity_;
  Image depth_;
  Mask mask_;
  GridSpec grid_;
};

enum class SceneKind { TwoPlane, Staircase, Facade, Landscape, Edge };

struct SceneSpec {
  SceneKind kind = SceneKind::TwoPlane;
  double dz = 1.2;   // plane/step separation (m) for two_plane and staircase
  int steps = 4;     // staircase only
  double depth = 0.0; // base depth of the nearest surface (m)

  std::string id() const;
};

/// Parses "two_plane:1.2", "staircase:4:0.6", "facade", "landscape", "edge".
SceneSpec parse_scene_spec(const std::string &text);

/// Synthetic scenes. Layouts are fixed fractions of the grid:
///  - two_plane: two rectangles (columns [nx/8, 3nx/8) and [5nx/8, 7nx/8),
///    rows [ny/4, 3ny/4)) at depths `depth` and `depth + dz`;
///  - staircase: `steps` vertical strips across [nx/8, 7nx/8) at depth + k dz;
///  - facade: building silhouette whose parts sit 0, 2, 4 and 6 bins deep;
///  - landscape: disjoint trees and houses at four separated depths;
///  - edge: right half-plane at `depth`, left half dark (lateral resolution).
/// Throws ConfigError for nonpositive dz or a surface whose echo falls
/// outside the slice window.
Scene make_test_scene(const SceneSpec &spec, const GridSpec &grid, const OpticsConfig &cfg);

/// 1-based slice of each lit pixel's echo (0 where unlit).
Array2D<int> truth_slices(const Scene &scene, const OpticsConfig &cfg);

/// Reflectivity from 8-bit PGM (value/maxval) or CSV; depth from CSV with
/// "nan" marking no return.
Scene load_scene(const std::string &reflectivity_path, const std::string &depth_path, const GridSpec &grid);

} // namespace gil
