#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <regex>
#include <string>
#include <vector>

#include "csvd/csvd.hpp"

namespace csvd::cli {
namespace {

namespace fs = std::filesystem;

// Thrown for argument combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SynthArgs {
  int seeds = 8;
  int size = 128;
  int count = 1;
  std::uint64_t rng = 0;
  bool uniform = false;
  std::string out;
};

struct DetectArgs {
  std::string input;
  std::string method = "sobel";
  double threshold = 0.3;
  bool thin = false;
  std::string out;
};

struct FitArgs {
  std::string edges;
  bool dark_edges = false;
  std::string grid = "16x16";
  int ne = 6;
  int iters = 2000;
  double step = 1e-3;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  std::optional<double> epsilon;
  double delta = 0.25;
  std::optional<std::uint64_t> jitter;
  bool no_clamp = false;
  std::string log;
  int log_every = 100;
  std::string out;
};

struct LabelArgs {
  std::string params;
  std::string edges;
  bool dark_edges = false;
  double tol = 1.5;
  double threshold = 0.5;
  std::string out;
};

struct RenderArgs {
  std::string params;
  std::string labels;
  int size = 512;
  std::string mode = "cells";
  std::string out;
};

struct ExportArgs {
  std::string params;
  std::string labels;
  std::string out;
};

std::pair<int, int> parse_grid(const std::string& text) {
  static const std::regex pattern(R"((\d+)[xX](\d+))");
  std::smatch match;
  if (!std::regex_match(text, match, pattern)) {
    throw UsageError("--grid expects MxN, got '" + text + "'");
  }
  return {std::stoi(match[1]), std::stoi(match[2])};
}

EdgePixelSet load_edges(const std::string& path, bool dark_edges) {
  return edges_from_mask(load_gray(path), dark_edges);
}

std::vector<int> labels_for(const SiteGrid& grid, const std::string& label_path) {
  if (label_path.empty()) return std::vector<int>(grid.sites.size(), 0);
  const LabelFile file = load_labeling(label_path);
  if (file.labeling.site_to_label.size() != grid.sites.size()) {
    throw ParseError(label_path + ": labeling covers " +
                     std::to_string(file.labeling.site_to_label.size()) +
                     " sites but the grid has " + std::to_string(grid.sites.size()));
  }
  return file.labeling.site_to_label;
}

void run_synth(const SynthArgs& a, std::ostream& out) {
  SynthSpec spec;
  spec.seed_count = a.seeds;
  spec.size = a.size;
  spec.rng_seed = a.rng;
  spec.density_gradient = !a.uniform;
  const auto entries = synth_batch(spec, a.count, a.out);
  out << "wrote " << entries.size() << " image(s) and manifest.txt to " << a.out << '\n';
}

void run_detect(const DetectArgs& a, std::ostream& out) {
  const GrayImage image = load_gray(a.input);
  const EdgePixelSet edges = detect_edges(image, parse_edge_method(a.method), a.threshold, a.thin);
  save_gray_png(edges_to_image(edges), a.out);
  out << edges.size() << " edge pixels -> " << a.out << '\n';
}

void run_fit(const FitArgs& a, std::ostream& out) {
  const auto [m, n] = parse_grid(a.grid);
  const EdgePixelSet omega = load_edges(a.edges, a.dark_edges);
  if (omega.empty()) throw ParameterError(a.edges + ": no edge pixels to fit");

  FitConfig config;
  config.iterations = a.iters;
  config.step_size = a.step;
  config.energy.lambda1 = a.lambda1;
  config.energy.lambda2 = a.lambda2;
  config.energy.epsilon = a.epsilon;
  config.energy.delta = a.delta;
  config.clamp_sites = !a.no_clamp;

  std::ofstream log;
  if (!a.log.empty()) {
    log.open(a.log);
    if (!log) throw IoError("cannot open '" + a.log + "' for writing");
    config.log_every = a.log_every;
    config.csv_log = &log;
  }

  const FitReport report = fit(init_grid(m, n, a.ne, a.jitter), omega, config);
  save_params(report.final_grid, std::vector<int>(report.final_grid.sites.size(), 0), a.out);

  char line[160];
  std::snprintf(line, sizeof line, "e_total %.6g -> %.6g, coverage %.4f\n",
                report.energy_history.front().total, report.energy_history.back().total,
                report.coverage);
  out << line << "params -> " << a.out << '\n';
}

void run_label(const LabelArgs& a, std::ostream& out) {
  const ParamFile params = load_params(a.params);
  const EdgePixelSet omega = load_edges(a.edges, a.dark_edges);
  const AssignmentImage assign = rasterize_assignment(params.grid, omega.width, omega.height);
  const CoincidenceTable table = coincidence(assign, omega, a.tol, &params.grid);
  LabelFile file;
  file.threshold = a.threshold;
  file.tolerance = a.tol;
  file.labeling = merge(table, a.threshold);
  save_labeling(file, a.out);
  out << file.labeling.label_count << " labels from " << params.grid.sites.size()
      << " sites -> " << a.out << '\n';
}

void run_render(const RenderArgs& a, std::ostream& out) {
  const RenderMode mode = parse_render_mode(a.mode);
  const std::string ext = fs::path(a.out).extension().string();
  if (ext != ".png" && ext != ".svg") {
    throw UsageError("--out must end in .png or .svg");
  }
  if (mode == RenderMode::Contours && a.labels.empty()) {
    throw UsageError("--mode contours requires --labels");
  }

  const ParamFile params = load_params(a.params);
  std::optional<MergeLabeling> labels;
  if (!a.labels.empty()) {
    MergeLabeling l;
    l.site_to_label = labels_for(params.grid, a.labels);
    l.label_count = l.site_to_label.empty()
                        ? 0
                        : *std::max_element(l.site_to_label.begin(), l.site_to_label.end()) + 1;
    labels = std::move(l);
  }
  const AssignmentImage assign = rasterize_assignment(params.grid, a.size, a.size);
  const MergeLabeling* label_ptr = labels ? &*labels : nullptr;

  if (ext == ".svg") {
    std::ofstream file(a.out);
    if (!file) throw IoError("cannot open '" + a.out + "' for writing");
    file << render_svg(assign, mode, label_ptr);
    if (!file) throw IoError("failed writing '" + a.out + "'");
  } else {
    save_rgb_png(render_raster(assign, mode, label_ptr), a.out);
  }
  out << a.mode << " render " << a.size << "x" << a.size << " -> " << a.out << '\n';
}

void run_export(const ExportArgs& a, std::ostream& out) {
  const ParamFile params = load_params(a.params);
  save_tensor(params.grid, labels_for(params.grid, a.labels), a.out);
  out << "tensor " << params.grid.m << "x" << params.grid.n << "x"
      << tensor_channels(params.grid.n_e) << " -> " << a.out << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Convex-set-distance Voronoi diagrams: synthesize, detect, fit, label, render"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write synthetic cell-structure edge images");
  synth_cmd->add_option("--seeds", synth.seeds, "Seeds per image")->capture_default_str();
  synth_cmd->add_option("--size", synth.size, "Image side in pixels")->capture_default_str();
  synth_cmd->add_option("--count", synth.count, "Number of images")->capture_default_str();
  synth_cmd->add_option("--rng", synth.rng, "Template rng seed")->capture_default_str();
  synth_cmd->add_flag("--uniform", synth.uniform, "Uniform seeds instead of the density gradient");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  DetectArgs detect;
  auto* detect_cmd = app.add_subcommand("detect", "Fixed-filter edge detection");
  detect_cmd->add_option("--input", detect.input, "Input PNG or PGM")->required();
  detect_cmd->add_option("--method", detect.method, "sobel or log")
      ->check(CLI::IsMember({"sobel", "log"}))
      ->capture_default_str();
  detect_cmd->add_option("--threshold", detect.threshold, "Normalized response threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  detect_cmd->add_flag("--thin", detect.thin, "Non-maximum suppression");
  detect_cmd->add_option("--out", detect.out, "Edge PNG (white edges on black)")->required();

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a site grid to an edge image");
  fit_cmd->add_option("--edges", fit_args.edges, "Edge image; pixels >= 0.5 are edges")->required();
  fit_cmd->add_flag("--dark-edges", fit_args.dark_edges, "Treat pixels < 0.5 as edges");
  fit_cmd->add_option("--grid", fit_args.grid, "Grid size MxN")->capture_default_str();
  fit_cmd->add_option("--ne", fit_args.ne, "Half-planes per site")->capture_default_str();
  fit_cmd->add_option("--iters", fit_args.iters, "Iterations")->capture_default_str();
  fit_cmd->add_option("--step", fit_args.step, "Step size")->capture_default_str();
  fit_cmd->add_option("--lambda1", fit_args.lambda1, "Scale regularizer weight")
      ->capture_default_str();
  fit_cmd->add_option("--lambda2", fit_args.lambda2, "Separation regularizer weight")
      ->capture_default_str();
  fit_cmd->add_option("--epsilon", fit_args.epsilon, "Minimum cell scale (default 0.1 * cell)");
  fit_cmd->add_option("--delta", fit_args.delta, "Minimum site separation")->capture_default_str();
  fit_cmd->add_option("--jitter", fit_args.jitter, "Seed for random initial rotations");
  fit_cmd->add_flag("--no-clamp", fit_args.no_clamp, "Let site centers leave their neighborhood");
  fit_cmd->add_option("--log", fit_args.log, "CSV energy log");
  fit_cmd->add_option("--log-every", fit_args.log_every, "Log interval")->capture_default_str();
  fit_cmd->add_option("--out", fit_args.out, "Output params JSON")->required();

  LabelArgs label;
  auto* label_cmd = app.add_subcommand("label", "Merge fitted cells into labeled regions");
  label_cmd->add_option("--params", label.params, "Fitted params JSON")->required();
  label_cmd->add_option("--edges", label.edges, "Edge image; pixels >= 0.5 are edges")->required();
  label_cmd->add_flag("--dark-edges", label.dark_edges, "Treat pixels < 0.5 as edges");
  label_cmd->add_option("--tol", label.tol, "Support tolerance in pixels")->capture_default_str();
  label_cmd->add_option("--threshold", label.threshold, "Keep boundaries scoring at least this")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  label_cmd->add_option("--out", label.out, "Output labels file")->required();

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "Render cells, edges or contours");
  render_cmd->add_option("--params", render.params, "Params JSON")->required();
  render_cmd->add_option("--labels", render.labels, "Labels file");
  render_cmd->add_option("--size", render.size, "Output side in pixels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  render_cmd->add_option("--mode", render.mode, "cells, edges or contours")
      ->check(CLI::IsMember({"cells", "edges", "contours"}))
      ->capture_default_str();
  render_cmd->add_option("--out", render.out, "Output .png or .svg")->required();

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export-tensor", "Write the M x N x D parameter tensor");
  export_cmd->add_option("--params", exp.params, "Params JSON")->required();
  export_cmd->add_option("--labels", exp.labels, "Labels file (label channel is 0 without it)");
  export_cmd->add_option("--out", exp.out, "Output tensor file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*synth_cmd) run_synth(synth, out);
    if (*detect_cmd) run_detect(detect, out);
    if (*fit_cmd) run_fit(fit_args, out);
    if (*label_cmd) run_label(label, out);
    if (*render_cmd) run_render(render, out);
    if (*export_cmd) run_export(exp, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace csvd::cli
