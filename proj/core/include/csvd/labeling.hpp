#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <vector>

#include "csvd/diagram.hpp"
#include "csvd/energy.hpp"

namespace csvd {

struct CoincidenceEntry {
  int boundary_pixel_count = 0;
  int supported_pixel_count = 0;
  double score = 0.0;
};

// Cells cut into pieces by omega. Pieces of different cells that touch
// directly (not through an omega pixel) are scored like cell pairs.
struct PieceGraph {
  std::vector<int> site;
  std::vector<int> size;
  std::map<SitePair, CoincidenceEntry> pairs;
};

struct CoincidenceTable {
  int site_count = 0;
  std::map<SitePair, CoincidenceEntry> pairs;
  // For a site that owns no pixels: the site owning the pixel under its
  // center. -1 for sites with pixels.
  std::vector<int> host;
  // Empty when omega is empty or the table was built by hand.
  PieceGraph pieces;
};

/// Exact Euclidean distance from every pixel to the nearest set pixel.
/// Pixels are infinitely far when the mask is empty.
std::vector<double> distance_transform(const std::vector<bool>& mask,
                                       int width, int height);

/// Fraction of each shared boundary lying within tol_px of omega.
/// Also builds the piece graph. With a grid, sites that own no pixels are
/// hosted by the site owning the pixel under their center; without one they
/// stay isolated.
CoincidenceTable coincidence(const AssignmentImage& assign,
                             const EdgePixelSet& omega, double tol_px = 1.5,
                             const SiteGrid* grid = nullptr);

struct MergeLabeling {
  std::vector<int> site_to_label;
  int label_count = 0;
  std::set<SitePair> kept_pairs;
};

// Shared boundaries shorter than this carry no merge evidence.
inline constexpr int kMinEvidencePixels = 3;

/// Union-find over adjacent pairs scoring below threshold. With a piece
/// graph the union runs over pieces and each site takes the label of its
/// largest piece. Labels are numbered in order of their smallest site index.
MergeLabeling merge(const CoincidenceTable& table, double threshold = 0.5);

/// Pixels whose right or lower neighbor carries a different merged label.
std::vector<PixelCoord> contours(const AssignmentImage& assign,
                                 const MergeLabeling& labels);

/// Per-pixel merged label.
std::vector<int> merged_label_raster(const AssignmentImage& assign,
                                     const MergeLabeling& labels);

struct LabelFile {
  double threshold = 0.5;
  double tolerance = 1.5;
  MergeLabeling labeling;
};

void save_labeling(const LabelFile& file, const std::filesystem::path& path);
LabelFile load_labeling(const std::filesystem::path& path);

}  // namespace csvd
