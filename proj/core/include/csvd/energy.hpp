#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "csvd/diagram.hpp"

namespace csvd {

/// The detected edge pixels a diagram must cover, in unit-square coordinates.
struct EdgePixelSet {
  std::vector<Point2> points;
  int width = 0;
  int height = 0;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }

  // Builds the set from pixel coordinates; duplicates are dropped.
  static EdgePixelSet from_pixels(std::vector<PixelCoord> pixels, int width,
                                  int height);
  std::vector<PixelCoord> pixels() const;
};

enum class TargetKind {
  // mean (d1 - 1)^2 + (d2 - 1)^2
  Anchored,
  // mean (d1 - d2)^2; degenerates, kept for demonstration
  Unanchored,
};

struct EnergyConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  // Minimum cell scale; unset means 0.1 * l_u of the grid being fitted.
  std::optional<double> epsilon;
  // Minimum site separation in convex-set-distance units.
  double delta = 0.25;
  double target_weight = 1.0;
  TargetKind target = TargetKind::Anchored;
  // Sum per-site hinges instead of one hinge on the global minimum.
  bool summed_regularizers = false;

  double resolved_epsilon(const SiteGrid& grid) const;
  void validate() const;
};

struct EnergyValue {
  double value = 0.0;
  std::vector<double> gradient;  // SiteGrid::params() layout
};

EnergyValue e_target(const SiteGrid& grid, const EdgePixelSet& omega,
                     TargetKind kind = TargetKind::Anchored);

EnergyValue e_reg_scale(const SiteGrid& grid, double epsilon,
                        bool summed = false);

EnergyValue e_reg_sep(const SiteGrid& grid, double delta, bool summed = false);

/// Smallest distance from any site center to a foreign site in its
/// neighborhood, with the (center owner, measuring site) pair.
struct SeparationProbe {
  double distance = 0.0;
  int center_site = -1;
  int measuring_site = -1;
};
SeparationProbe min_separation(const SiteGrid& grid);

/// min over all sites and edges of min(b, r).
double min_scale(const SiteGrid& grid);

struct TotalEnergy {
  double target = 0.0;
  double reg_scale = 0.0;
  double reg_sep = 0.0;
  double total = 0.0;
  std::vector<double> gradient;
};

TotalEnergy e_total(const SiteGrid& grid, const EdgePixelSet& omega,
                    const EnergyConfig& config);

/// Every discrete choice made while evaluating e_total (pooling winners,
/// active branches, hinge states). Two parameter vectors with equal
/// selections lie on the same smooth piece of the energy.
std::vector<std::int64_t> pooling_selections(const SiteGrid& grid,
                                             const EdgePixelSet& omega,
                                             const EnergyConfig& config);

}  // namespace csvd
