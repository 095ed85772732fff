#include "csvd/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "csvd/errors.hpp"
#include "csvd/parallel.hpp"

namespace csvd {
namespace {

// Fixed chunking keeps the reduction order independent of the thread count.
constexpr std::size_t kChunkPixels = 512;

std::span<double> site_slice(std::vector<double>& grad, const SiteGrid& grid,
                             int k) {
  const std::size_t stride = grid.params_per_site();
  return {grad.data() + std::size_t(k) * stride, stride};
}

struct ScaleArgmin {
  double value = std::numeric_limits<double>::infinity();
  std::size_t param = 0;  // flat parameter index
};

ScaleArgmin site_scale_argmin(const SiteGrid& grid, int k) {
  const ConvexSite& s = grid.sites[k];
  const std::size_t base = std::size_t(k) * grid.params_per_site();
  ScaleArgmin best;
  for (int e = 0; e < grid.n_e; ++e) {
    if (s.edges[e].b < best.value) best = {s.edges[e].b, base + b_offset(grid.n_e, e)};
  }
  if (s.r < best.value) best = {s.r, base + r_offset(grid.n_e)};
  return best;
}

struct SepArgmin {
  double value = std::numeric_limits<double>::infinity();
  int center = -1;
  int measuring = -1;
  int branch = 0;
};

// Closest foreign site (by convex set distance) to the center of site i,
// searched over the neighborhood of i's home cell.
SepArgmin site_sep_argmin(const SiteGrid& grid, int i) {
  const auto [gi, gj] = grid.grid_coords(i);
  const int r = grid.neighborhood_radius;
  SepArgmin best;
  best.center = i;
  for (int a = std::max(0, gi - r); a <= std::min(grid.m - 1, gi + r); ++a) {
    for (int c = std::max(0, gj - r); c <= std::min(grid.n - 1, gj + r); ++c) {
      const int j = grid.index(a, c);
      if (j == i) continue;
      const DistanceEval d = csd_eval(grid.sites[j], grid.sites[i].p);
      if (d.value < best.value) {
        best.value = d.value;
        best.measuring = j;
        best.branch = d.active_branch;
      }
    }
  }
  return best;
}

void add_sep_gradient(const SiteGrid& grid, const SepArgmin& sep, double scale,
                      std::vector<double>& grad) {
  if (sep.measuring < 0) return;
  Point2 dq{0.0, 0.0};
  const ConvexSite& measuring = grid.sites[sep.measuring];
  const Point2 q = grid.sites[sep.center].p;
  accumulate_csd_grad(measuring, q, {sep.value, sep.branch}, scale,
                      site_slice(grad, grid, sep.measuring), &dq);
  auto center = site_slice(grad, grid, sep.center);
  center[0] += dq.x;
  center[1] += dq.y;
}

}  // namespace

EdgePixelSet EdgePixelSet::from_pixels(std::vector<PixelCoord> pixels,
                                       int width, int height) {
  std::sort(pixels.begin(), pixels.end());
  pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
  EdgePixelSet out;
  out.width = width;
  out.height = height;
  out.points.reserve(pixels.size());
  for (const PixelCoord& px : pixels) {
    out.points.push_back(pixel_center(px.x, px.y, width, height));
  }
  return out;
}

std::vector<PixelCoord> EdgePixelSet::pixels() const {
  const double scale = std::max(width, height);
  std::vector<PixelCoord> out;
  out.reserve(points.size());
  for (const Point2& p : points) {
    out.push_back({static_cast<int>(std::lround(p.x * scale - 0.5)),
                   static_cast<int>(std::lround(p.y * scale - 0.5))});
  }
  return out;
}

double EnergyConfig::resolved_epsilon(const SiteGrid& grid) const {
  if (epsilon) return *epsilon;
  return 0.1 * std::min(grid.cell_w, grid.cell_h);
}

void EnergyConfig::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0 || target_weight < 0.0) {
    throw ParameterError("energy weights must be nonnegative");
  }
  if (epsilon && !(*epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
  if (!(delta > 0.0)) throw ParameterError("delta must be > 0");
}

EnergyValue e_target(const SiteGrid& grid, const EdgePixelSet& omega,
                     TargetKind kind) {
  if (omega.empty()) throw ParameterError("e_target: edge pixel set is empty");

  const std::size_t count = omega.size();
  const std::size_t chunks = (count + kChunkPixels - 1) / kChunkPixels;
  const double inv_count = 1.0 / double(count);
  std::vector<double> chunk_values(chunks, 0.0);
  std::vector<std::vector<double>> chunk_grads(chunks);

  parallel_for_chunks(chunks, [&](std::size_t c) {
    std::vector<double>& grad = chunk_grads[c];
    grad.assign(grid.param_count(), 0.0);
    double sum = 0.0;
    const std::size_t end = std::min(count, (c + 1) * kChunkPixels);
    for (std::size_t idx = c * kChunkPixels; idx < end; ++idx) {
      const Point2 q = omega.points[idx];
      const Min2Result mm = min2_local(grid, q);
      double w1 = 0.0, w2 = 0.0;
      if (kind == TargetKind::Anchored) {
        const double e1 = mm.d1 - 1.0, e2 = mm.d2 - 1.0;
        sum += e1 * e1 + e2 * e2;
        w1 = 2.0 * e1;
        w2 = 2.0 * e2;
      } else {
        const double diff = mm.d1 - mm.d2;
        sum += diff * diff;
        w1 = 2.0 * diff;
        w2 = -2.0 * diff;
      }
      accumulate_csd_grad(grid.sites[mm.k1], q, {mm.d1, mm.branch1},
                          w1 * inv_count, site_slice(grad, grid, mm.k1));
      accumulate_csd_grad(grid.sites[mm.k2], q, {mm.d2, mm.branch2},
                          w2 * inv_count, site_slice(grad, grid, mm.k2));
    }
    chunk_values[c] = sum;
  });

  EnergyValue out;
  out.gradient.assign(grid.param_count(), 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    total += chunk_values[c];
    for (std::size_t k = 0; k < out.gradient.size(); ++k) {
      out.gradient[k] += chunk_grads[c][k];
    }
  }
  out.value = total * inv_count;
  return out;
}

double min_scale(const SiteGrid& grid) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < int(grid.sites.size()); ++k) {
    best = std::min(best, site_scale_argmin(grid, k).value);
  }
  return best;
}

EnergyValue e_reg_scale(const SiteGrid& grid, double epsilon, bool summed) {
  EnergyValue out;
  out.gradient.assign(grid.param_count(), 0.0);
  const int sites = static_cast<int>(grid.sites.size());

  if (summed) {
    for (int k = 0; k < sites; ++k) {
      const ScaleArgmin a = site_scale_argmin(grid, k);
      if (epsilon - a.value > 0.0) {
        out.value += epsilon - a.value;
        out.gradient[a.param] -= 1.0;
      }
    }
    return out;
  }

  ScaleArgmin best;
  for (int k = 0; k < sites; ++k) {
    const ScaleArgmin a = site_scale_argmin(grid, k);
    if (a.value < best.value) best = a;
  }
  if (epsilon - best.value > 0.0) {
    out.value = epsilon - best.value;
    out.gradient[best.param] = -1.0;
  }
  return out;
}

SeparationProbe min_separation(const SiteGrid& grid) {
  SepArgmin best;
  for (int i = 0; i < int(grid.sites.size()); ++i) {
    const SepArgmin s = site_sep_argmin(grid, i);
    if (s.value < best.value) best = s;
  }
  return {best.value, best.center, best.measuring};
}

EnergyValue e_reg_sep(const SiteGrid& grid, double delta, bool summed) {
  EnergyValue out;
  out.gradient.assign(grid.param_count(), 0.0);
  const int sites = static_cast<int>(grid.sites.size());

  if (summed) {
    for (int i = 0; i < sites; ++i) {
      const SepArgmin s = site_sep_argmin(grid, i);
      if (delta - s.value > 0.0) {
        out.value += delta - s.value;
        add_sep_gradient(grid, s, -1.0, out.gradient);
      }
    }
    return out;
  }

  SepArgmin best;
  for (int i = 0; i < sites; ++i) {
    const SepArgmin s = site_sep_argmin(grid, i);
    if (s.value < best.value) best = s;
  }
  if (delta - best.value > 0.0) {
    out.value = delta - best.value;
    add_sep_gradient(grid, best, -1.0, out.gradient);
  }
  return out;
}

TotalEnergy e_total(const SiteGrid& grid, const EdgePixelSet& omega,
                    const EnergyConfig& config) {
  config.validate();
  const EnergyValue target = e_target(grid, omega, config.target);
  const EnergyValue scale =
      e_reg_scale(grid, config.resolved_epsilon(grid), config.summed_regularizers);
  const EnergyValue sep = e_reg_sep(grid, config.delta, config.summed_regularizers);

  TotalEnergy out;
  out.target = target.value;
  out.reg_scale = scale.value;
  out.reg_sep = sep.value;
  out.total = config.target_weight * target.value + config.lambda1 * scale.value +
              config.lambda2 * sep.value;
  out.gradient.resize(grid.param_count());
  for (std::size_t k = 0; k < out.gradient.size(); ++k) {
    out.gradient[k] = config.target_weight * target.gradient[k] +
                      config.lambda1 * scale.gradient[k] +
                      config.lambda2 * sep.gradient[k];
  }
  return out;
}

std::vector<std::int64_t> pooling_selections(const SiteGrid& grid,
                                             const EdgePixelSet& omega,
                                             const EnergyConfig& config) {
  std::vector<std::int64_t> out;
  out.reserve(omega.size() * 4 + 4 * grid.sites.size() + 8);
  for (const Point2& q : omega.points) {
    const Min2Result mm = min2_local(grid, q);
    out.insert(out.end(), {mm.k1, mm.k2, mm.branch1, mm.branch2});
  }

  const double epsilon = config.resolved_epsilon(grid);
  const int sites = static_cast<int>(grid.sites.size());
  ScaleArgmin best_scale;
  SepArgmin best_sep;
  for (int k = 0; k < sites; ++k) {
    const ScaleArgmin a = site_scale_argmin(grid, k);
    const SepArgmin s = site_sep_argmin(grid, k);
    if (config.summed_regularizers) {
      out.insert(out.end(), {std::int64_t(a.param), epsilon - a.value > 0.0,
                             s.measuring, s.branch, config.delta - s.value > 0.0});
    }
    if (a.value < best_scale.value) best_scale = a;
    if (s.value < best_sep.value) best_sep = s;
  }
  out.insert(out.end(), {std::int64_t(best_scale.param),
                         epsilon - best_scale.value > 0.0, best_sep.center,
                         best_sep.measuring, best_sep.branch,
                         config.delta - best_sep.value > 0.0});
  return out;
}

}  // namespace csvd
