#include "gil/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "gil/error.hpp"

namespace gil {

namespace {

constexpr double kTenNinetyPerSigma = 2.5631031310892007; // 2 * Phi^-1(0.9)

// Edge response of a lattice of lit point samples (columns >= the edge) seen
// through a Gaussian covariance of width tau (pixels), at offset d = p - edge.
// Normalized so the far lit side tends to 1.
double lattice_edge(double d, double tau) {
  if (tau < 1e-3)
    return d >= 0 ? 1.0 : 0.0;
  const double inv = 1.0 / (2.0 * tau * tau);
  const int reach = static_cast<int>(std::ceil(10.0 * tau)) + 1;
  double sum = 0.0, total = 0.0;
  for (int j = -reach; j <= reach; ++j) {
    const double g = std::exp(-static_cast<double>(j) * j * inv);
    total += g;
    // lit sample at p - j when p - j >= edge, i.e. j <= d
    if (static_cast<double>(j) <= d)
      sum += g;
  }
  return sum / total;
}

struct StepFit {
  double offset = 0.0, step = 0.0, sigma = 0.0, rss = 0.0;
};

// Linear least squares for (a, b) in a + b * lattice_edge(x, sigma).
StepFit fit_fixed_sigma(const std::vector<double> &x, const std::vector<double> &y, double sigma) {
  double sf = 0, sff = 0, sy = 0, sfy = 0;
  const double n = static_cast<double>(x.size());
  std::vector<double> f(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    f[i] = lattice_edge(x[i], sigma);
    sf += f[i];
    sff += f[i] * f[i];
    sy += y[i];
    sfy += f[i] * y[i];
  }
  const double det = n * sff - sf * sf;
  StepFit fit;
  fit.sigma = sigma;
  if (std::abs(det) < 1e-300) {
    fit.offset = sy / n;
    fit.step = 0.0;
  } else {
    fit.step = (n * sfy - sf * sy) / det;
    fit.offset = (sy - fit.step * sf) / n;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.offset - fit.step * f[i];
    fit.rss += r * r;
  }
  return fit;
}

StepFit fit_step(const std::vector<double> &x, const std::vector<double> &y) {
  // Coarse scan in log(sigma), then golden-section refinement around the best.
  constexpr int kGrid = 240;
  const double lo = std::log(0.02), hi = std::log(12.0);
  auto at = [&](double ls) { return fit_fixed_sigma(x, y, std::exp(ls)); };
  int best = 0;
  StepFit best_fit = at(lo);
  for (int i = 1; i <= kGrid; ++i) {
    const auto f = at(lo + (hi - lo) * i / kGrid);
    if (f.rss < best_fit.rss) {
      best_fit = f;
      best = i;
    }
  }
  double a = lo + (hi - lo) * std::max(best - 1, 0) / kGrid;
  double b = lo + (hi - lo) * std::min(best + 1, kGrid) / kGrid;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  auto fc = at(c), fd = at(d);
  for (int it = 0; it < 60; ++it) {
    if (fc.rss <= fd.rss) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = at(d);
    }
  }
  const auto refined = fc.rss <= fd.rss ? fc : fd;
  return refined.rss < best_fit.rss ? refined : best_fit;
}

} // namespace

DepthAccuracy depth_accuracy(const DepthMap &dm, const Scene &scene, const OpticsConfig &cfg) {
  if (!dm.valid.same_shape(scene.mask()))
    throw DimensionError("depth_accuracy: depth map and scene grids differ");
  DepthAccuracy out;
  double sq = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < dm.valid.size(); ++i) {
    if (!dm.valid[i] || !scene.mask()[i])
      continue;
    const int truth = depth_to_slice(scene.depth()[i], cfg);
    const double truth_depth = (truth >= 1 && truth <= cfg.n_slices)
                                   ? slice_to_depth(truth, cfg)
                                   : scene.depth()[i];
    const double e = dm.depth[i] - truth_depth;
    sq += e * e;
    hits += dm.slice[i] == truth ? 1 : 0;
    ++out.compared;
  }
  if (out.compared == 0)
    throw InsufficientDataError("depth_accuracy: no pixel is valid in both the depth map and the scene");
  out.rmse = std::sqrt(sq / static_cast<double>(out.compared));
  out.bin_accuracy = static_cast<double>(hits) / static_cast<double>(out.compared);
  return out;
}

EdgeLocation find_vertical_edge(const Scene &scene, const OpticsConfig &cfg, std::size_t half_width) {
  const auto &mask = scene.mask();
  const std::size_t nx = mask.nx(), ny = mask.ny();
  const auto truth = truth_slices(scene, cfg);
  auto row_ok = [&](std::size_t c, std::size_t r) {
    for (std::size_t k = 1; k <= half_width; ++k)
      if (mask(c - k, r))
        return false;
    for (std::size_t k = 0; k < half_width; ++k)
      if (!mask(c + k, r) || truth(c + k, r) != truth(c, r))
        return false;
    return true;
  };
  EdgeLocation best;
  std::size_t best_len = 0;
  for (std::size_t c = half_width; c + half_width <= nx; ++c) {
    // Longest run of consecutive qualifying rows at this column.
    std::size_t run = 0, run_begin = 0;
    for (std::size_t r = 0; r <= ny; ++r) {
      if (r < ny && row_ok(c, r)) {
        if (run++ == 0)
          run_begin = r;
        continue;
      }
      if (run > best_len) {
        best_len = run;
        best = {c, run_begin, run_begin + run, truth(c, run_begin)};
      }
      run = 0;
    }
  }
  // Rows next to the run ends see light from the edges above and below.
  if (best_len < 8)
    throw MeasurementFailedError("lateral_resolution: scene has no straight vertical edge of usable length");
  best.row_begin += 2;
  best.row_end -= 2;
  return best;
}

double lateral_resolution(const Image &slice, const Scene &edge_scene, const OpticsConfig &cfg) {
  if (!slice.same_shape(edge_scene.mask()))
    throw DimensionError("lateral_resolution: slice and scene grids differ");
  constexpr std::size_t kHalf = 6;
  const auto edge = find_vertical_edge(edge_scene, cfg, kHalf);
  std::vector<double> x, y;
  for (std::size_t c = edge.column - kHalf; c < edge.column + kHalf; ++c) {
    double sum = 0.0;
    for (std::size_t r = edge.row_begin; r < edge.row_end; ++r)
      sum += slice(c, r);
    x.push_back(static_cast<double>(c) - static_cast<double>(edge.column));
    y.push_back(sum / static_cast<double>(edge.row_end - edge.row_begin));
  }
  const auto fit = fit_step(x, y);
  const double resid = std::sqrt(fit.rss / static_cast<double>(x.size() - 3));
  if (!(fit.step > 0.0) || fit.step < 5.0 * resid)
    throw MeasurementFailedError("lateral_resolution: edge not detectable above noise (step " +
                                 std::to_string(fit.step) + ", residual " + std::to_string(resid) + ")");
  const double pitch = pixel_footprint(cfg);
  return std::max(kTenNinetyPerSigma * fit.sigma * pitch, pitch);
}

double lateral_resolution(const SliceStack &stack, const Scene &edge_scene, const OpticsConfig &cfg) {
  const auto edge = find_vertical_edge(edge_scene, cfg);
  return lateral_resolution(stack.slice(edge.slice), edge_scene, cfg);
}

double contrast_to_noise(const Image &slice, const Mask &fg, const Mask &bg) {
  if (!slice.same_shape(fg) || !slice.same_shape(bg))
    throw DimensionError("contrast_to_noise: masks do not match the slice");
  double sf = 0, sb = 0, sbb = 0;
  std::size_t nf = 0, nb = 0;
  for (std::size_t i = 0; i < slice.size(); ++i) {
    if (fg[i] && bg[i])
      throw DegenerateInputError("contrast_to_noise: foreground and background masks overlap");
    if (fg[i]) {
      sf += slice[i];
      ++nf;
    } else if (bg[i]) {
      sb += slice[i];
      ++nb;
    }
  }
  if (nf == 0 || nb == 0)
    throw DegenerateInputError("contrast_to_noise: empty foreground or background mask");
  const double mf = sf / static_cast<double>(nf), mb = sb / static_cast<double>(nb);
  for (std::size_t i = 0; i < slice.size(); ++i)
    if (bg[i])
      sbb += (slice[i] - mb) * (slice[i] - mb);
  const double sd = std::sqrt(sbb / static_cast<double>(nb));
  if (!(sd > 0.0))
    throw DegenerateInputError("contrast_to_noise: background has zero variance");
  return (mf - mb) / sd;
}

MetricsReport evaluate(const SliceStack &raw_stack, const DepthMap &dm, const Scene &scene,
                       const OpticsConfig &cfg) {
  MetricsReport r;
  r.n_used = raw_stack.n_used;
  const auto acc = depth_accuracy(dm, scene, cfg);
  r.depth_rmse = acc.rmse;
  r.depth_bin_accuracy = acc.bin_accuracy;
  try {
    r.lateral_res_estimate = lateral_resolution(raw_stack, scene, cfg);
  } catch (const MeasurementFailedError &) {
    r.lateral_res_estimate.reset();
  }

  const auto truth = truth_slices(scene, cfg);
  std::map<int, std::size_t> counts;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (truth[i] > 0)
      ++counts[truth[i]];
  if (counts.empty())
    throw InsufficientDataError("evaluate: scene has no lit pixels");
  const int s = std::max_element(counts.begin(), counts.end(),
                                 [](const auto &a, const auto &b) { return a.second < b.second; })
                    ->first;
  Mask fg(scene.grid().nx, scene.grid().ny, 0), bg(scene.grid().nx, scene.grid().ny, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    fg[i] = truth[i] == s ? 1 : 0;
    bg[i] = scene.mask()[i] ? 0 : 1;
  }
  r.cnr = contrast_to_noise(raw_stack.slice(s), fg, bg);
  return r;
}

std::string format_metrics_text(const MetricsReport &r) {
  char buf[64];
  std::ostringstream o;
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  o << "n_used = " << r.n_used << '\n'
    << "depth_rmse = " << num(r.depth_rmse) << '\n'
    << "depth_bin_accuracy = " << num(r.depth_bin_accuracy) << '\n'
    << "lateral_res_estimate = " << (r.lateral_res_estimate ? num(*r.lateral_res_estimate) : "none") << '\n'
    << "cnr = " << num(r.cnr) << '\n';
  return o.str();
}

std::string format_metrics_json(const MetricsReport &r) {
  nlohmann::ordered_json j;
  j["n_used"] = r.n_used;
  j["depth_rmse"] = r.depth_rmse;
  j["depth_bin_accuracy"] = r.depth_bin_accuracy;
  j["lateral_res_estimate"] = r.lateral_res_estimate ? nlohmann::ordered_json(*r.lateral_res_estimate)
                                                     : nlohmann::ordered_json(nullptr);
  j["cnr"] = r.cnr;
  return j.dump(2) + "\n";
}

} // namespace gil
