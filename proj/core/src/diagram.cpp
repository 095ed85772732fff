#include "csvd/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "csvd/errors.hpp"
#include "csvd/parallel.hpp"

namespace csvd {

std::pair<int, int> SiteGrid::cell_of(Point2 q) const {
  const int i = static_cast<int>(std::floor(q.x / cell_w));
  const int j = static_cast<int>(std::floor(q.y / cell_h));
  return {std::clamp(i, 0, m - 1), std::clamp(j, 0, n - 1)};
}

SiteGrid::Rect SiteGrid::neighborhood_rect(int i, int j) const {
  const int r = neighborhood_radius;
  return {std::max(0, i - r) * cell_w, std::max(0, j - r) * cell_h,
          std::min(m, i + r + 1) * cell_w, std::min(n, j + r + 1) * cell_h};
}

std::vector<double> SiteGrid::params() const {
  const std::size_t stride = params_per_site();
  std::vector<double> out(param_count());
  for (std::size_t k = 0; k < sites.size(); ++k) {
    const ConvexSite& s = sites[k];
    double* dst = out.data() + k * stride;
    dst[0] = s.p.x;
    dst[1] = s.p.y;
    for (int e = 0; e < n_e; ++e) {
      dst[theta_offset(e)] = s.edges[e].theta;
      dst[b_offset(n_e, e)] = s.edges[e].b;
    }
    dst[r_offset(n_e)] = s.r;
  }
  return out;
}

void SiteGrid::set_params(std::span<const double> values) {
  if (values.size() != param_count()) {
    throw ParameterError("set_params: expected " + std::to_string(param_count()) +
                         " values, got " + std::to_string(values.size()));
  }
  const std::size_t stride = params_per_site();
  for (std::size_t k = 0; k < sites.size(); ++k) {
    ConvexSite& s = sites[k];
    const double* src = values.data() + k * stride;
    s.p = {src[0], src[1]};
    for (int e = 0; e < n_e; ++e) {
      s.edges[e].theta = src[theta_offset(e)];
      s.edges[e].b = src[b_offset(n_e, e)];
    }
    s.r = src[r_offset(n_e)];
  }
}

void SiteGrid::validate() const {
  if (m < 1 || n < 1 || n_e < 1) {
    throw ParameterError("site grid needs m, n, n_e >= 1");
  }
  if (sites.size() != std::size_t(m) * std::size_t(n)) {
    throw ParameterError("site grid holds " + std::to_string(sites.size()) +
                         " sites, expected m*n = " + std::to_string(m * n));
  }
  if (neighborhood_radius < 1) {
    throw ParameterError("neighborhood_radius must be >= 1");
  }
  if (!(cell_w > 0.0) || !(cell_h > 0.0)) {
    throw ParameterError("grid spacing must be positive");
  }
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if (sites[k].edges.size() != std::size_t(n_e) || !sites[k].valid()) {
      throw ParameterError("site " + std::to_string(k) + " is invalid");
    }
  }
}

SiteGrid init_grid(int m, int n, int n_e,
                   std::optional<std::uint64_t> jitter_seed,
                   int neighborhood_radius) {
  if (m < 2 || n < 2) throw ParameterError("init_grid: m and n must be >= 2");
  if (n_e < 3) throw ParameterError("init_grid: n_e must be >= 3");
  if (neighborhood_radius < 1) {
    throw ParameterError("init_grid: neighborhood_radius must be >= 1");
  }

  SiteGrid grid;
  grid.m = m;
  grid.n = n;
  grid.n_e = n_e;
  grid.cell_w = 1.0 / m;
  grid.cell_h = 1.0 / n;
  grid.neighborhood_radius = neighborhood_radius;

  const double l_u = std::min(grid.cell_w, grid.cell_h);
  const double apothem = 0.5 * l_u * std::cos(std::numbers::pi / n_e);
  const double step = 2.0 * std::numbers::pi / n_e;

  std::mt19937_64 rng(jitter_seed.value_or(0));
  grid.sites.reserve(std::size_t(m) * n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double rotation = 0.0;
      if (jitter_seed) rotation = step * (double(rng() >> 11) * 0x1.0p-53);
      ConvexSite site;
      site.p = grid.grid_point(i, j);
      site.r = l_u;
      site.edges.reserve(n_e);
      for (int e = 0; e < n_e; ++e) site.edges.push_back({rotation + e * step, apothem});
      grid.sites.push_back(std::move(site));
    }
  }
  return grid;
}

Min2Result min2_local(const SiteGrid& grid, Point2 q) {
  const auto [ci, cj] = grid.cell_of(q);
  const int r = grid.neighborhood_radius;
  const int i0 = std::max(0, ci - r), i1 = std::min(grid.m - 1, ci + r);
  const int j0 = std::max(0, cj - r), j1 = std::min(grid.n - 1, cj + r);

  constexpr double inf = std::numeric_limits<double>::infinity();
  Min2Result out{inf, -1, inf, -1, 0, 0};
  // Increasing flat index, so strict comparisons keep the lowest index on ties.
  for (int i = i0; i <= i1; ++i) {
    for (int j = j0; j <= j1; ++j) {
      const int k = grid.index(i, j);
      const DistanceEval d = csd_eval(grid.sites[k], q);
      if (d.value < out.d1) {
        out.d2 = out.d1;
        out.k2 = out.k1;
        out.branch2 = out.branch1;
        out.d1 = d.value;
        out.k1 = k;
        out.branch1 = d.active_branch;
      } else if (d.value < out.d2) {
        out.d2 = d.value;
        out.k2 = k;
        out.branch2 = d.active_branch;
      }
    }
  }
  if (out.k2 < 0) {
    throw std::logic_error("min2_local: neighborhood holds fewer than two sites");
  }
  return out;
}

Point2 pixel_center(int x, int y, int width, int height) {
  const double scale = 1.0 / std::max(width, height);
  return {(x + 0.5) * scale, (y + 0.5) * scale};
}

AssignmentImage assignment_from_labels(int width, int height,
                                       std::vector<int> labels) {
  AssignmentImage out;
  out.width = width;
  out.height = height;
  out.labels = std::move(labels);

  auto record = [&](PixelCoord px, int a, int b) {
    auto& seg = out.boundary_segments[{std::min(a, b), std::max(a, b)}];
    if (seg.empty() || seg.back() != px) seg.push_back(px);
  };

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int here = out.label_at(x, y);
      bool is_edge = false;
      if (x + 1 < width && out.label_at(x + 1, y) != here) {
        record({x, y}, here, out.label_at(x + 1, y));
        is_edge = true;
      }
      if (y + 1 < height && out.label_at(x, y + 1) != here) {
        record({x, y}, here, out.label_at(x, y + 1));
        is_edge = true;
      }
      if (is_edge) out.edge_pixels.push_back({x, y});
    }
  }
  return out;
}

AssignmentImage rasterize_assignment(const SiteGrid& grid, int width,
                                     int height) {
  if (width < 2 || height < 2) {
    throw ParameterError("rasterize_assignment: width and height must be >= 2");
  }
  std::vector<int> labels(std::size_t(width) * height);
  parallel_for_chunks(std::size_t(height), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < width; ++x) {
      labels[row * width + x] = min2_local(grid, pixel_center(x, y, width, height)).k1;
    }
  });
  return assignment_from_labels(width, height, std::move(labels));
}

}  // namespace csvd
