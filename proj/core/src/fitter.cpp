#include "csvd/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "csvd/errors.hpp"
#include "csvd/labeling.hpp"

namespace csvd {
namespace {

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

[[noreturn]] void report_divergence(const SiteGrid& grid,
                                    const std::vector<double>& params,
                                    const TotalEnergy& energy, int iteration) {
  const std::size_t stride = grid.params_per_site();
  int site = -1;
  for (std::size_t k = 0; k < grid.sites.size() && site < 0; ++k) {
    const std::span<const double> p(params.data() + k * stride, stride);
    const std::span<const double> g(energy.gradient.data() + k * stride, stride);
    if (!all_finite(p) || !all_finite(g)) site = static_cast<int>(k);
  }
  std::ostringstream msg;
  msg << "fit diverged at iteration " << iteration << " (e_total = " << energy.total
      << ")";
  if (site >= 0) {
    const auto [i, j] = grid.grid_coords(site);
    msg << ": site " << site << " (grid " << i << "," << j
        << ") has non-finite parameters or gradient";
  }
  throw DivergenceError(msg.str());
}

EnergySample sample_of(int iteration, const TotalEnergy& e) {
  return {iteration, e.target, e.reg_scale, e.reg_sep, e.total};
}

}  // namespace

void FitConfig::validate() const {
  if (iterations < 1) throw ParameterError("iterations must be >= 1");
  if (!(step_size > 0.0)) throw ParameterError("step_size must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ParameterError("beta1 and beta2 must lie in [0, 1)");
  }
  if (log_every < 0) throw ParameterError("log_every must be >= 0");
  if (!(max_radius_cells > 0.0)) throw ParameterError("max_radius_cells must be > 0");
  energy.validate();
}

void project_parameters(SiteGrid& grid, bool clamp_sites, double max_radius_cells) {
  const double max_r = max_radius_cells * std::min(grid.cell_w, grid.cell_h);
  for (std::size_t k = 0; k < grid.sites.size(); ++k) {
    ConvexSite& s = grid.sites[k];
    for (HalfPlaneEdge& e : s.edges) e.b = std::max(e.b, kMinPositiveParam);
    s.r = std::max(s.r, kMinPositiveParam);
    if (clamp_sites) {
      s.r = std::min(s.r, max_r);
      const auto [i, j] = grid.grid_coords(static_cast<int>(k));
      const SiteGrid::Rect rect = grid.neighborhood_rect(i, j);
      s.p.x = std::clamp(s.p.x, rect.x0, rect.x1);
      s.p.y = std::clamp(s.p.y, rect.y0, rect.y1);
    }
  }
}

double coverage(const SiteGrid& grid, const EdgePixelSet& omega, double tol_px) {
  if (omega.empty()) return 0.0;
  const AssignmentImage assign = rasterize_assignment(grid, omega.width, omega.height);
  std::vector<bool> mask(std::size_t(omega.width) * omega.height, false);
  for (const PixelCoord& px : assign.edge_pixels) {
    mask[std::size_t(px.y) * omega.width + px.x] = true;
  }
  const std::vector<double> dist =
      distance_transform(mask, omega.width, omega.height);
  std::size_t covered = 0;
  for (const PixelCoord& px : omega.pixels()) {
    if (dist[std::size_t(px.y) * omega.width + px.x] <= tol_px) ++covered;
  }
  return double(covered) / double(omega.size());
}

FitReport fit(SiteGrid grid, const EdgePixelSet& omega, const FitConfig& config) {
  config.validate();
  grid.validate();
  if (omega.empty()) throw ParameterError("fit: edge pixel set is empty");

  FitReport report;
  std::vector<double> params = grid.params();
  std::vector<double> m1(params.size(), 0.0), m2(params.size(), 0.0);
  double beta1_t = 1.0, beta2_t = 1.0;
  report.min_scale_seen = min_scale(grid);

  const bool logging = config.log_every > 0;
  if (logging && config.csv_log != nullptr) {
    *config.csv_log << "iteration,e_target,e_reg1,e_reg2,e_total\n";
  }
  auto record = [&](int iteration, const TotalEnergy& e) {
    report.energy_history.push_back(sample_of(iteration, e));
    if (logging && config.csv_log != nullptr) {
      *config.csv_log << iteration << ',' << e.target << ',' << e.reg_scale << ','
                      << e.reg_sep << ',' << e.total << '\n';
    }
  };

  for (int t = 0; t < config.iterations; ++t) {
    const TotalEnergy e = e_total(grid, omega, config.energy);
    if (!std::isfinite(e.total) || !all_finite(e.gradient)) {
      report_divergence(grid, params, e, t);
    }
    if (t == 0 || (logging && t % config.log_every == 0)) record(t, e);

    beta1_t *= config.beta1;
    beta2_t *= config.beta2;
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double g = e.gradient[k];
      m1[k] = config.beta1 * m1[k] + (1.0 - config.beta1) * g;
      m2[k] = config.beta2 * m2[k] + (1.0 - config.beta2) * g * g;
      const double m_hat = m1[k] / (1.0 - beta1_t);
      const double v_hat = m2[k] / (1.0 - beta2_t);
      params[k] -= config.step_size * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
    }
    grid.set_params(params);
    project_parameters(grid, config.clamp_sites, config.max_radius_cells);
    params = grid.params();
    report.min_scale_seen = std::min(report.min_scale_seen, min_scale(grid));
  }

  const TotalEnergy last = e_total(grid, omega, config.energy);
  if (!std::isfinite(last.total) || !all_finite(last.gradient)) {
    report_divergence(grid, params, last, config.iterations);
  }
  record(config.iterations, last);

  report.coverage = coverage(grid, omega, config.coverage_tolerance_px);
  report.final_grid = std::move(grid);
  return report;
}

AuditResult finite_diff_audit(const SiteGrid& grid, const EdgePixelSet& omega,
                              const EnergyConfig& config, int samples,
                              std::uint64_t seed, const GradientFn& analytic) {
  constexpr double h = 1e-6;
  constexpr double floor = 1e-3;

  const std::vector<double> base = grid.params();
  const std::vector<double> grad =
      analytic ? analytic(grid, omega, config) : e_total(grid, omega, config).gradient;
  const std::vector<std::int64_t> selections = pooling_selections(grid, omega, config);

  std::vector<std::size_t> order(base.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  AuditResult result;
  SiteGrid probe = grid;
  std::vector<double> shifted = base;
  auto energy_at = [&](std::size_t k, double offset, bool& same_piece) {
    shifted[k] = base[k] + offset;
    probe.set_params(shifted);
    shifted[k] = base[k];
    for (const ConvexSite& s : probe.sites) {
      if (!s.valid()) {
        same_piece = false;
        return 0.0;
      }
    }
    if (pooling_selections(probe, omega, config) != selections) same_piece = false;
    return e_total(probe, omega, config).total;
  };

  const std::size_t max_attempts = std::size_t(std::max(samples, 0)) * 20 + base.size();
  for (std::size_t attempt = 0;
       attempt < max_attempts && result.checked < samples && !order.empty();
       ++attempt) {
    const std::size_t k = order[attempt % order.size()];
    bool same_piece = true;
    const double plus = energy_at(k, h, same_piece);
    const double minus = energy_at(k, -h, same_piece);
    if (!same_piece) {
      ++result.skipped;
      continue;
    }
    const double numeric = (plus - minus) / (2.0 * h);
    const double scale = std::max({std::abs(grad[k]), std::abs(numeric), floor});
    result.max_relative_error =
        std::max(result.max_relative_error, std::abs(grad[k] - numeric) / scale);
    ++result.checked;
  }
  return result;
}

}  // namespace csvd
