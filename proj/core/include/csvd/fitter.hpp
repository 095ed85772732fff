#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "csvd/energy.hpp"

namespace csvd {

struct FitConfig {
  int iterations = 2000;
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  EnergyConfig energy;
  // Keep every site center inside its home cell's neighborhood rectangle and
  // every r at most max_radius_cells grid spacings.
  bool clamp_sites = true;
  double max_radius_cells = 1.0;
  // 0 logs only the first and last iteration.
  int log_every = 0;
  // When set and log_every > 0, CSV rows are written here as they happen.
  std::ostream* csv_log = nullptr;
  double coverage_tolerance_px = 2.0;

  void validate() const;
};

struct EnergySample {
  int iteration = 0;
  double target = 0.0;
  double reg_scale = 0.0;
  double reg_sep = 0.0;
  double total = 0.0;
};

struct FitReport {
  std::vector<EnergySample> energy_history;
  SiteGrid final_grid;
  double coverage = 0.0;
  // Running minimum of min(b, r) across all iterates.
  double min_scale_seen = 0.0;
};

inline constexpr double kMinPositiveParam = 1e-6;

/// Adaptive-moment descent on E_total over every site parameter.
/// Throws DivergenceError naming the first site with a non-finite value.
FitReport fit(SiteGrid grid, const EdgePixelSet& omega,
              const FitConfig& config);

/// Applies b, r >= kMinPositiveParam and, when clamp_sites, the center clamp
/// and the radius cap.
void project_parameters(SiteGrid& grid, bool clamp_sites,
                        double max_radius_cells = 1.0);

/// Fraction of omega pixels within tol_px of the rasterized diagram edges,
/// measured at omega's source resolution.
double coverage(const SiteGrid& grid, const EdgePixelSet& omega,
                double tol_px = 2.0);

using GradientFn =
    std::function<std::vector<double>(const SiteGrid&, const EdgePixelSet&,
                                      const EnergyConfig&)>;

struct AuditResult {
  double max_relative_error = 0.0;
  int checked = 0;
  int skipped = 0;
};

/// Compares an analytic gradient (by default e_total's) with central
/// differences at h = 1e-6 on randomly chosen parameters. Parameters whose
/// +/-h perturbation changes any pooling selection are skipped. The relative
/// error is |a - f| / max(|a|, |f|, 1e-3).
AuditResult finite_diff_audit(const SiteGrid& grid, const EdgePixelSet& omega,
                              const EnergyConfig& config, int samples,
                              std::uint64_t seed = 1,
                              const GradientFn& analytic = {});

}  // namespace csvd
