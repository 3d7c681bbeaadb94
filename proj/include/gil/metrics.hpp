#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gil/array2d.hpp"
#include "gil/geometry.hpp"
#include "gil/reconstruction.hpp"
#include "gil/scene.hpp"
#include "gil/tomography.hpp"

namespace gil {

struct DepthAccuracy {
  double rmse = 0.0;          // m, against the lattice depth of the true slice
  double bin_accuracy = 0.0;  // fraction of compared pixels in the true slice
  std::size_t compared = 0;   // pixels valid in both map and scene
};

/// Compares pixels valid in both the map and the scene mask. Throws
/// InsufficientDataError if there are none.
DepthAccuracy depth_accuracy(const DepthMap &dm, const Scene &scene, const OpticsConfig &cfg);

/// Location of a dark-to-lit vertical edge used for edge-response scans.
struct EdgeLocation {
  std::size_t column = 0;    // first lit column
  std::size_t row_begin = 0; // rows [row_begin, row_end) are used
  std::size_t row_end = 0;
  int slice = 0;             // true slice of the lit side
};

/// Finds the leftmost dark-to-lit column boundary shared by the most rows,
/// with at least `half_width` dark and lit columns on either side. Throws
/// MeasurementFailedError when the scene has no such edge.
EdgeLocation find_vertical_edge(const Scene &scene, const OpticsConfig &cfg, std::size_t half_width = 6);

/// 10-90% edge-spread width (m) across the scene edge. Illumination and
/// target are sampled at pixel centres, so the row-averaged profile is fitted
/// with a + b * sum_{q lit} exp(-(p - q)^2 / 2 tau^2), the response of a
/// lattice of lit points to a Gaussian correlation of width tau. The reported
/// width is that of the continuous edge, 2 * 1.2816 * tau, floored at one
/// target pixel. Throws MeasurementFailedError if the fitted step is not
/// clearly above the fit residual.
double lateral_resolution(const Image &slice, const Scene &edge_scene, const OpticsConfig &cfg);
double lateral_resolution(const SliceStack &stack, const Scene &edge_scene, const OpticsConfig &cfg);

/// (mean_fg - mean_bg) / std_bg with population std. Masks must be disjoint
/// and non-empty; a zero-variance background is a DegenerateInputError.
double contrast_to_noise(const Image &slice, const Mask &fg, const Mask &bg);

struct MetricsReport {
  double depth_rmse = 0.0;
  double depth_bin_accuracy = 0.0;
  std::optional<double> lateral_res_estimate; // absent when the scene has no usable edge
  double cnr = 0.0;
  std::uint64_t n_used = 0;
};

/// Full report for a reconstructed scene. CNR uses the slice holding most
/// lit pixels, with those pixels as foreground and all unlit pixels as
/// background.
MetricsReport evaluate(const SliceStack &raw_stack, const DepthMap &dm, const Scene &scene,
                       const OpticsConfig &cfg);

/// Flat `key = value` lines in fixed order.
std::string format_metrics_text(const MetricsReport &r);
/// The same keys as a JSON object.
std::string format_metrics_json(const MetricsReport &r);

} // namespace gil
