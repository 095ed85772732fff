#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "csvd/geometry.hpp"

namespace csvd {

/// The optimizable parameter set: an m x n array of congruent-at-start
/// convex sites, one per grid cell. Site (i, j) has flat index i * n + j,
/// where i runs along x and j along y.
struct SiteGrid {
  int m = 0;
  int n = 0;
  int n_e = 0;
  std::vector<ConvexSite> sites;
  // Grid spacing along x and y in unit-square units (1/m, 1/n).
  double cell_w = 0.0;
  double cell_h = 0.0;
  // Chebyshev radius, in grid cells, of the local min-pooling block.
  int neighborhood_radius = 2;

  int index(int i, int j) const { return i * n + j; }
  std::pair<int, int> grid_coords(int k) const { return {k / n, k % n}; }
  Point2 grid_point(int i, int j) const {
    return {(i + 0.5) * cell_w, (j + 0.5) * cell_h};
  }
  // Grid cell containing q, clamped into the grid.
  std::pair<int, int> cell_of(Point2 q) const;

  // Unit-square rectangle covered by the neighborhood block of cell (i, j).
  struct Rect {
    double x0, y0, x1, y1;
  };
  Rect neighborhood_rect(int i, int j) const;

  std::size_t params_per_site() const { return site_param_count(n_e); }
  std::size_t param_count() const { return sites.size() * params_per_site(); }
  std::vector<double> params() const;
  void set_params(std::span<const double> values);

  /// Throws ParameterError when any structural or site invariant is broken.
  void validate() const;
};

/// Regular N_e-gons inscribed in radius l_u/2 about each grid point, with a
/// bounding circle of radius l_u = min(1/m, 1/n). With a jitter seed every
/// site gets an independent rotation in [0, 2*pi/N_e).
SiteGrid init_grid(int m, int n, int n_e,
                   std::optional<std::uint64_t> jitter_seed = std::nullopt,
                   int neighborhood_radius = 2);

/// Smallest and second-smallest distances with the sites that attain them.
struct Min2Result {
  double d1 = 0.0;
  int k1 = -1;
  double d2 = 0.0;
  int k2 = -1;
  int branch1 = 0;
  int branch2 = 0;
};

/// Two smallest distances among the sites within the Chebyshev neighborhood
/// of the grid cell containing q. Ties go to the lowest flat site index.
Min2Result min2_local(const SiteGrid& grid, Point2 q);

struct PixelCoord {
  int x = 0;
  int y = 0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
  friend auto operator<=>(const PixelCoord& a, const PixelCoord& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

/// Pixel centers map to the unit square by dividing by max(width, height).
Point2 pixel_center(int x, int y, int width, int height);

using SitePair = std::pair<int, int>;

/// Raster of winning sites plus its boundary structure.
///
/// A pixel is an edge pixel when its right or lower neighbor carries a
/// different label; the pixel with the smaller flat coordinate is the one
/// recorded, which keeps boundaries one pixel thick.
struct AssignmentImage {
  int width = 0;
  int height = 0;
  std::vector<int> labels;
  std::vector<PixelCoord> edge_pixels;
  std::map<SitePair, std::vector<PixelCoord>> boundary_segments;

  int label_at(int x, int y) const { return labels[std::size_t(y) * width + x]; }
};

/// Derives edge pixels and boundary segments from a label raster.
AssignmentImage assignment_from_labels(int width, int height,
                                       std::vector<int> labels);

AssignmentImage rasterize_assignment(const SiteGrid& grid, int width,
                                     int height);

}  // namespace csvd
