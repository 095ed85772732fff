#include "csvd/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "csvd/errors.hpp"
#include "csvd/parallel.hpp"

namespace csvd {
namespace {

constexpr double kFar = 1e20;

// Squared distance transform of a sampled function along one line
// (lower envelope of parabolas).
void edt_1d(const double* f, std::size_t n, std::size_t stride, double* d,
            std::vector<int>& v, std::vector<double>& z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  auto fv = [&](int i) { return f[std::size_t(i) * stride] + double(i) * i; };
  int k = 0;
  z[0] = -inf;
  z[1] = inf;
  for (int q = 1; q < int(n); ++q) {
    double s = (fv(q) - fv(v[k])) / (2.0 * (q - v[k]));
    while (s <= z[k]) {
      --k;
      s = (fv(q) - fv(v[k])) / (2.0 * (q - v[k]));
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (int q = 0; q < int(n); ++q) {
    while (z[k + 1] < q) ++k;
    const double diff = q - v[k];
    d[std::size_t(q) * stride] = diff * diff + f[std::size_t(v[k]) * stride];
  }
}

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  // The smaller root wins, so roots are order-independent.
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<int> parent_;
};

// Pieces of each cell left after removing omega pixels (4-connected), and
// the direct contacts between pieces of different cells.
PieceGraph build_piece_graph(const AssignmentImage& assign, const std::vector<bool>& mask,
                             const std::vector<double>& dist, double tol_px, int site_count) {
  const int w = assign.width, h = assign.height;
  PieceGraph graph;
  std::vector<int> piece(assign.labels.size(), -1);
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < assign.labels.size(); ++seed) {
    const int k = assign.labels[seed];
    if (k < 0 || k >= site_count || mask[seed] || piece[seed] >= 0) continue;
    const int id = static_cast<int>(graph.site.size());
    int size = 0;
    piece[seed] = id;
    stack.assign(1, seed);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      ++size;
      const int x = int(i % w), y = int(i / w);
      auto visit = [&](std::size_t j) {
        if (!mask[j] && piece[j] < 0 && assign.labels[j] == k) {
          piece[j] = id;
          stack.push_back(j);
        }
      };
      if (x > 0) visit(i - 1);
      if (x + 1 < w) visit(i + 1);
      if (y > 0) visit(i - w);
      if (y + 1 < h) visit(i + w);
    }
    graph.site.push_back(k);
    graph.size.push_back(size);
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = std::size_t(y) * w + x;
      if (piece[i] < 0) continue;
      const bool supported = dist[i] <= tol_px;
      int first_other = -1;
      auto contact = [&](std::size_t j) {
        if (piece[j] < 0 || assign.labels[j] == assign.labels[i] || piece[j] == first_other) {
          return;
        }
        first_other = piece[j];
        CoincidenceEntry& entry = graph.pairs[std::minmax(piece[i], piece[j])];
        ++entry.boundary_pixel_count;
        if (supported) ++entry.supported_pixel_count;
      };
      if (x + 1 < w) contact(i + 1);
      if (y + 1 < h) contact(i + w);
    }
  }
  for (auto& [pair, entry] : graph.pairs) {
    entry.score = double(entry.supported_pixel_count) / entry.boundary_pixel_count;
  }
  return graph;
}

}  // namespace

std::vector<double> distance_transform(const std::vector<bool>& mask, int width,
                                       int height) {
  const std::size_t w = width, h = height;
  std::vector<double> f(w * h);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = mask[i] ? 0.0 : kFar;
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    return std::vector<double>(w * h, std::numeric_limits<double>::infinity());
  }

  std::vector<double> tmp(w * h);
  // Columns, then rows; each line is independent.
  parallel_for_chunks(w, [&](std::size_t x) {
    std::vector<int> v;
    std::vector<double> z;
    edt_1d(f.data() + x, h, w, tmp.data() + x, v, z);
  });
  std::vector<double> out(w * h);
  parallel_for_chunks(h, [&](std::size_t y) {
    std::vector<int> v;
    std::vector<double> z;
    edt_1d(tmp.data() + y * w, w, 1, out.data() + y * w, v, z);
  });
  for (double& d : out) d = d >= kFar ? std::numeric_limits<double>::infinity() : std::sqrt(d);
  return out;
}

CoincidenceTable coincidence(const AssignmentImage& assign, const EdgePixelSet& omega,
                             double tol_px, const SiteGrid* grid) {
  if (!omega.empty() && (omega.width != assign.width || omega.height != assign.height)) {
    throw ParameterError("coincidence: edge set is " + std::to_string(omega.width) + "x" +
                         std::to_string(omega.height) + " but assignment is " +
                         std::to_string(assign.width) + "x" + std::to_string(assign.height));
  }

  CoincidenceTable table;
  const int max_label =
      assign.labels.empty() ? -1 : *std::max_element(assign.labels.begin(), assign.labels.end());
  table.site_count = grid ? static_cast<int>(grid->sites.size()) : max_label + 1;

  std::vector<bool> mask(assign.labels.size(), false);
  for (const PixelCoord& px : omega.pixels()) {
    mask[std::size_t(px.y) * assign.width + px.x] = true;
  }
  const std::vector<double> dist = distance_transform(mask, assign.width, assign.height);

  for (const auto& [pair, pixels] : assign.boundary_segments) {
    if (pixels.empty()) continue;
    CoincidenceEntry entry;
    entry.boundary_pixel_count = static_cast<int>(pixels.size());
    for (const PixelCoord& px : pixels) {
      if (dist[std::size_t(px.y) * assign.width + px.x] <= tol_px) ++entry.supported_pixel_count;
    }
    entry.score = double(entry.supported_pixel_count) / entry.boundary_pixel_count;
    table.pairs.emplace(pair, entry);
  }
  if (!omega.empty()) {
    table.pieces = build_piece_graph(assign, mask, dist, tol_px, table.site_count);
  }

  table.host.assign(table.site_count, -1);
  std::vector<bool> owns(table.site_count, false);
  for (int label : assign.labels) {
    if (label >= 0 && label < table.site_count) owns[label] = true;
  }
  if (grid != nullptr) {
    const double scale = std::max(assign.width, assign.height);
    for (int k = 0; k < table.site_count; ++k) {
      if (owns[k]) continue;
      const Point2 p = grid->sites[k].p;
      const int x = std::clamp(int(std::floor(p.x * scale)), 0, assign.width - 1);
      const int y = std::clamp(int(std::floor(p.y * scale)), 0, assign.height - 1);
      table.host[k] = assign.label_at(x, y);
    }
  }
  return table;
}

namespace {

// Union-find over site pairs.
std::vector<int> merge_sites(const CoincidenceTable& table, double threshold) {
  DisjointSets sets(table.site_count);
  for (const auto& [pair, entry] : table.pairs) {
    if (entry.boundary_pixel_count >= kMinEvidencePixels && entry.score < threshold) {
      sets.unite(pair.first, pair.second);
    }
  }
  for (int k = 0; k < int(table.host.size()); ++k) {
    if (table.host[k] >= 0) sets.unite(k, table.host[k]);
  }
  std::vector<int> root(table.site_count);
  for (int k = 0; k < table.site_count; ++k) root[k] = sets.find(k);
  return root;
}

// Union-find over cell pieces; a site follows its largest piece.
std::vector<int> merge_pieces(const CoincidenceTable& table, double threshold) {
  const PieceGraph& graph = table.pieces;
  const int piece_count = static_cast<int>(graph.site.size());
  DisjointSets sets(piece_count);
  for (const auto& [pair, entry] : graph.pairs) {
    if (entry.boundary_pixel_count >= kMinEvidencePixels && entry.score < threshold) {
      sets.unite(pair.first, pair.second);
    }
  }
  std::vector<int> largest(table.site_count, -1);
  for (int i = 0; i < piece_count; ++i) {
    int& best = largest[graph.site[i]];
    if (best < 0 || graph.size[i] > graph.size[best]) best = i;
  }

  // Roots live in piece index space; sites without pieces borrow a root.
  constexpr int kNone = -1;
  std::vector<int> root(table.site_count, kNone);
  for (int k = 0; k < table.site_count; ++k) {
    if (largest[k] >= 0) root[k] = sets.find(largest[k]);
  }
  for (int k = 0; k < table.site_count; ++k) {
    if (root[k] != kNone) continue;
    if (k < int(table.host.size()) && table.host[k] >= 0 && root[table.host[k]] != kNone) {
      root[k] = root[table.host[k]];
      continue;
    }
    // Longest shared boundary with a site that has pieces.
    int best_count = 0;
    for (const auto& [pair, entry] : table.pairs) {
      if (pair.first != k && pair.second != k) continue;
      const int other = pair.first == k ? pair.second : pair.first;
      if (largest[other] < 0 || entry.boundary_pixel_count <= best_count) continue;
      best_count = entry.boundary_pixel_count;
      root[k] = sets.find(largest[other]);
    }
  }
  // Remaining sites are isolated; give them roots past the piece range.
  for (int k = 0; k < table.site_count; ++k) {
    if (root[k] == kNone) root[k] = piece_count + k;
  }
  return root;
}

}  // namespace

MergeLabeling merge(const CoincidenceTable& table, double threshold) {
  const std::vector<int> root =
      table.pieces.site.empty() ? merge_sites(table, threshold) : merge_pieces(table, threshold);

  MergeLabeling out;
  out.site_to_label.assign(table.site_count, -1);
  std::map<int, int> root_label;
  for (int k = 0; k < table.site_count; ++k) {
    const auto [it, fresh] = root_label.emplace(root[k], out.label_count);
    if (fresh) ++out.label_count;
    out.site_to_label[k] = it->second;
  }
  for (const auto& [pair, entry] : table.pairs) {
    if (out.site_to_label[pair.first] != out.site_to_label[pair.second]) {
      out.kept_pairs.insert(pair);
    }
  }
  return out;
}

std::vector<int> merged_label_raster(const AssignmentImage& assign,
                                     const MergeLabeling& labels) {
  std::vector<int> out(assign.labels.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int site = assign.labels[i];
    if (site < 0 || site >= int(labels.site_to_label.size())) {
      throw ParameterError("labeling does not cover site " + std::to_string(site));
    }
    out[i] = labels.site_to_label[site];
  }
  return out;
}

std::vector<PixelCoord> contours(const AssignmentImage& assign, const MergeLabeling& labels) {
  const std::vector<int> merged = merged_label_raster(assign, labels);
  const int w = assign.width, h = assign.height;
  std::vector<PixelCoord> out;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int here = merged[std::size_t(y) * w + x];
      const bool right = x + 1 < w && merged[std::size_t(y) * w + x + 1] != here;
      const bool down = y + 1 < h && merged[std::size_t(y + 1) * w + x] != here;
      if (right || down) out.push_back({x, y});
    }
  }
  return out;
}

void save_labeling(const LabelFile& file, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  char buf[64];
  out << "csvd-labels 1\n";
  std::snprintf(buf, sizeof buf, "%.17g", file.threshold);
  out << "threshold " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", file.tolerance);
  out << "tolerance " << buf << '\n';
  out << "sites " << file.labeling.site_to_label.size() << '\n';
  out << "labels " << file.labeling.label_count << '\n';
  for (std::size_t k = 0; k < file.labeling.site_to_label.size(); ++k) {
    out << k << ' ' << file.labeling.site_to_label[k] << '\n';
  }
  out << "kept_pairs " << file.labeling.kept_pairs.size() << '\n';
  for (const auto& [a, b] : file.labeling.kept_pairs) out << a << ' ' << b << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

LabelFile load_labeling(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const std::string where = path.string() + ": ";
  auto expect_key = [&](const char* key) {
    std::string word;
    if (!(in >> word) || word != key) {
      throw ParseError(where + "expected '" + key + "'");
    }
  };

  LabelFile file;
  int version = 0;
  expect_key("csvd-labels");
  if (!(in >> version) || version != 1) throw ParseError(where + "unsupported label file version");
  expect_key("threshold");
  if (!(in >> file.threshold)) throw ParseError(where + "bad threshold");
  expect_key("tolerance");
  if (!(in >> file.tolerance)) throw ParseError(where + "bad tolerance");
  std::size_t sites = 0;
  expect_key("sites");
  if (!(in >> sites)) throw ParseError(where + "bad site count");
  expect_key("labels");
  if (!(in >> file.labeling.label_count) || file.labeling.label_count < 0) {
    throw ParseError(where + "bad label count");
  }
  file.labeling.site_to_label.assign(sites, -1);
  for (std::size_t k = 0; k < sites; ++k) {
    std::size_t index = 0;
    int label = -1;
    if (!(in >> index >> label) || index != k || label < 0 ||
        label >= file.labeling.label_count) {
      throw ParseError(where + "bad record for site " + std::to_string(k));
    }
    file.labeling.site_to_label[k] = label;
  }
  std::size_t kept = 0;
  expect_key("kept_pairs");
  if (!(in >> kept)) throw ParseError(where + "bad kept_pairs count");
  for (std::size_t i = 0; i < kept; ++i) {
    int a = 0, b = 0;
    if (!(in >> a >> b)) throw ParseError(where + "truncated kept_pairs");
    file.labeling.kept_pairs.insert({a, b});
  }
  return file;
}

}  // namespace csvd
