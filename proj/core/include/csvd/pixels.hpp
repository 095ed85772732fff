#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "csvd/energy.hpp"
#include "csvd/image_io.hpp"

namespace csvd {

enum class EdgeMethod { Sobel, LoG };

EdgeMethod parse_edge_method(const std::string& name);

/// Raw (unnormalized) filter response with clamp-to-edge padding:
/// Sobel gradient magnitude or absolute 5x5 Laplacian-of-Gaussian.
GrayImage filter_response(const GrayImage& image, EdgeMethod method);

/// Fixed-filter edge detection. The response is normalized by its max and
/// thresholded; with thin, one pass of non-maximum suppression along the
/// Sobel gradient direction is applied. A constant image yields an empty set.
EdgePixelSet detect_edges(const GrayImage& image, EdgeMethod method,
                          double threshold = 0.3, bool thin = false);

/// Pixels at or above 0.5 (or below 0.5 when dark_is_edge) become the set.
EdgePixelSet edges_from_mask(const GrayImage& image, bool dark_is_edge = false);

/// White-on-black raster of an edge set at its source resolution.
GrayImage edges_to_image(const EdgePixelSet& edges);

struct SynthSpec {
  int seed_count = 8;
  std::uint64_t rng_seed = 0;
  int size = 128;
  // Seeds denser toward the bottom-right corner.
  bool density_gradient = true;
  // When non-empty these seeds are rendered as given (seed_count ignored).
  std::vector<Point2> forced_seeds;

  void validate() const;
};

struct SynthResult {
  GrayImage image;  // black 1-pixel boundaries on white
  std::vector<Point2> seeds;
};

/// Euclidean Voronoi diagram of sampled seeds rendered as cell boundaries.
/// Sampled seed sets are redrawn until every cell survives as its own
/// 4-connected white region.
SynthResult synth_structure(const SynthSpec& spec);

/// Nearest-seed label per pixel center (lowest seed index on ties).
std::vector<int> nearest_seed_labels(const std::vector<Point2>& seeds,
                                     int width, int height);

/// Renders boundaries of a label raster: black where the right or lower
/// neighbor differs, white elsewhere.
GrayImage render_label_boundaries(const std::vector<int>& labels, int width,
                                  int height);

/// Count of 4-connected regions of pixels >= 0.5.
int count_white_regions(const GrayImage& image);

struct ManifestEntry {
  std::string filename;
  std::vector<Point2> seeds;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Writes count edge images (image_00000.png, ...) and manifest.txt into
/// out_dir. Per-image rng seeds are derived from the template seed.
std::vector<ManifestEntry> synth_batch(const SynthSpec& tmpl, int count,
                                       const std::filesystem::path& out_dir);

std::string format_manifest(const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace csvd
