#include "csvd/pixels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "csvd/errors.hpp"
#include "csvd/parallel.hpp"

namespace csvd {
namespace {

double clamped(const GrayImage& img, int x, int y) {
  return img.at(std::clamp(x, 0, img.width - 1), std::clamp(y, 0, img.height - 1));
}

constexpr std::array<std::array<int, 5>, 5> kLoG = {{
    {0, 0, -1, 0, 0},
    {0, -1, -2, -1, 0},
    {-1, -2, 16, -2, -1},
    {0, -1, -2, -1, 0},
    {0, 0, -1, 0, 0},
}};

struct SobelPair {
  double gx = 0.0;
  double gy = 0.0;
};

SobelPair sobel_at(const GrayImage& img, int x, int y) {
  const double a = clamped(img, x - 1, y - 1), b = clamped(img, x, y - 1),
               c = clamped(img, x + 1, y - 1), d = clamped(img, x - 1, y),
               f = clamped(img, x + 1, y), g = clamped(img, x - 1, y + 1),
               h = clamped(img, x, y + 1), i = clamped(img, x + 1, y + 1);
  return {(c + 2.0 * f + i) - (a + 2.0 * d + g), (g + 2.0 * h + i) - (a + 2.0 * b + c)};
}

double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

std::vector<Point2> sample_seeds(const SynthSpec& spec, std::mt19937_64& rng) {
  std::vector<Point2> seeds;
  seeds.reserve(spec.seed_count);
  for (int s = 0; s < spec.seed_count; ++s) {
    const double u = uniform01(rng), v = uniform01(rng);
    if (spec.density_gradient) {
      seeds.push_back({std::sqrt(u), std::sqrt(v)});
    } else {
      seeds.push_back({u, v});
    }
  }
  return seeds;
}

// Each seed's cell must survive rendering as exactly one white region.
bool topology_preserved(const GrayImage& image, const std::vector<int>& labels,
                        int seed_count) {
  const int w = image.width, h = image.height;
  std::vector<int> comp(labels.size(), -1);
  std::set<int> seen_labels;
  int components = 0;
  std::vector<int> stack;
  for (int start = 0; start < w * h; ++start) {
    if (comp[start] >= 0 || image.values[start] < 0.5) continue;
    if (!seen_labels.insert(labels[start]).second) return false;
    ++components;
    stack.push_back(start);
    comp[start] = components;
    while (!stack.empty()) {
      const int at = stack.back();
      stack.pop_back();
      const int x = at % w, y = at / w;
      const int nbrs[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& nb : nbrs) {
        if (nb[0] < 0 || nb[0] >= w || nb[1] < 0 || nb[1] >= h) continue;
        const int k = nb[1] * w + nb[0];
        if (comp[k] < 0 && image.values[k] >= 0.5) {
          comp[k] = components;
          stack.push_back(k);
        }
      }
    }
  }
  return components == seed_count;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

EdgeMethod parse_edge_method(const std::string& name) {
  if (name == "sobel") return EdgeMethod::Sobel;
  if (name == "log") return EdgeMethod::LoG;
  throw ParameterError("unknown edge method '" + name + "' (expected sobel or log)");
}

GrayImage filter_response(const GrayImage& image, EdgeMethod method) {
  GrayImage out(image.width, image.height);
  parallel_for_chunks(std::size_t(image.height), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < image.width; ++x) {
      if (method == EdgeMethod::Sobel) {
        const SobelPair g = sobel_at(image, x, y);
        out.at(x, y) = std::hypot(g.gx, g.gy);
      } else {
        double acc = 0.0;
        for (int dy = -2; dy <= 2; ++dy) {
          for (int dx = -2; dx <= 2; ++dx) {
            const int k = kLoG[dy + 2][dx + 2];
            if (k != 0) acc += k * clamped(image, x + dx, y + dy);
          }
        }
        out.at(x, y) = std::abs(acc);
      }
    }
  });
  return out;
}

EdgePixelSet detect_edges(const GrayImage& image, EdgeMethod method,
                          double threshold, bool thin) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ParameterError("detect_edges: threshold must lie in [0, 1]");
  }
  const GrayImage response = filter_response(image, method);
  const double peak = *std::max_element(response.values.begin(), response.values.end());
  std::vector<PixelCoord> kept;
  if (!(peak > 1e-12)) return EdgePixelSet::from_pixels({}, image.width, image.height);

  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double r = response.at(x, y);
      if (r / peak < threshold) continue;
      if (thin) {
        // Quantize the gradient direction to one of four axes and keep the
        // pixel only if it beats the trailing neighbor and ties or beats the
        // leading one, so a symmetric two-pixel ridge keeps one pixel.
        const SobelPair g = sobel_at(image, x, y);
        double angle = std::atan2(g.gy, g.gx) * 180.0 / std::numbers::pi;
        if (angle < 0.0) angle += 180.0;
        int dx = 1, dy = 0;
        if (angle >= 22.5 && angle < 67.5) {
          dx = 1, dy = 1;
        } else if (angle >= 67.5 && angle < 112.5) {
          dx = 0, dy = 1;
        } else if (angle >= 112.5 && angle < 157.5) {
          dx = -1, dy = 1;
        }
        const double prev = clamped(response, x - dx, y - dy);
        const double next = clamped(response, x + dx, y + dy);
        const bool prev_is_self = std::clamp(x - dx, 0, image.width - 1) == x &&
                                  std::clamp(y - dy, 0, image.height - 1) == y;
        if (!(prev_is_self || r > prev) || r < next) continue;
      }
      kept.push_back({x, y});
    }
  }
  return EdgePixelSet::from_pixels(std::move(kept), image.width, image.height);
}

EdgePixelSet edges_from_mask(const GrayImage& image, bool dark_is_edge) {
  std::vector<PixelCoord> kept;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      if ((image.at(x, y) >= 0.5) != dark_is_edge) kept.push_back({x, y});
    }
  }
  return EdgePixelSet::from_pixels(std::move(kept), image.width, image.height);
}

GrayImage edges_to_image(const EdgePixelSet& edges) {
  GrayImage img(edges.width, edges.height, 0.0);
  for (const PixelCoord& px : edges.pixels()) img.at(px.x, px.y) = 1.0;
  return img;
}

void SynthSpec::validate() const {
  if (size < 32) throw ParameterError("synth: size must be >= 32");
  if (forced_seeds.empty() && seed_count < 2) {
    throw ParameterError("synth: seed_count must be >= 2");
  }
}

std::vector<int> nearest_seed_labels(const std::vector<Point2>& seeds, int width,
                                     int height) {
  std::vector<int> labels(std::size_t(width) * height, 0);
  parallel_for_chunks(std::size_t(height), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < width; ++x) {
      const Point2 q = pixel_center(x, y, width, height);
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        const Point2 d = q - seeds[s];
        const double dd = dot(d, d);
        if (dd < best_d) {
          best_d = dd;
          best = static_cast<int>(s);
        }
      }
      labels[row * width + x] = best;
    }
  });
  return labels;
}

GrayImage render_label_boundaries(const std::vector<int>& labels, int width,
                                  int height) {
  GrayImage img(width, height, 1.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int here = labels[std::size_t(y) * width + x];
      const bool right = x + 1 < width && labels[std::size_t(y) * width + x + 1] != here;
      const bool down = y + 1 < height && labels[std::size_t(y + 1) * width + x] != here;
      if (right || down) img.at(x, y) = 0.0;
    }
  }
  return img;
}

int count_white_regions(const GrayImage& image) {
  const int w = image.width, h = image.height;
  std::vector<bool> seen(image.values.size(), false);
  std::vector<int> stack;
  int regions = 0;
  for (int start = 0; start < w * h; ++start) {
    if (seen[start] || image.values[start] < 0.5) continue;
    ++regions;
    seen[start] = true;
    stack.push_back(start);
    while (!stack.empty()) {
      const int at = stack.back();
      stack.pop_back();
      const int x = at % w, y = at / w;
      const int nbrs[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& nb : nbrs) {
        if (nb[0] < 0 || nb[0] >= w || nb[1] < 0 || nb[1] >= h) continue;
        const int k = nb[1] * w + nb[0];
        if (!seen[k] && image.values[k] >= 0.5) {
          seen[k] = true;
          stack.push_back(k);
        }
      }
    }
  }
  return regions;
}

SynthResult synth_structure(const SynthSpec& spec) {
  spec.validate();
  SynthResult out;
  if (!spec.forced_seeds.empty()) {
    out.seeds = spec.forced_seeds;
    out.image = render_label_boundaries(
        nearest_seed_labels(out.seeds, spec.size, spec.size), spec.size, spec.size);
    return out;
  }

  constexpr int kMaxDraws = 10000;
  std::mt19937_64 rng(spec.rng_seed);
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    out.seeds = sample_seeds(spec, rng);
    const std::vector<int> labels = nearest_seed_labels(out.seeds, spec.size, spec.size);
    out.image = render_label_boundaries(labels, spec.size, spec.size);
    if (topology_preserved(out.image, labels, spec.seed_count)) return out;
  }
  throw ParameterError("synth: could not place " + std::to_string(spec.seed_count) +
                       " separable seeds at size " + std::to_string(spec.size));
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const ManifestEntry& e : entries) {
    out += e.filename + ' ' + std::to_string(e.seeds.size());
    for (const Point2& s : e.seeds) out += ' ' + format_double(s.x) + ' ' + format_double(s.y);
    out += '\n';
  }
  return out;
}

std::vector<ManifestEntry> synth_batch(const SynthSpec& tmpl, int count,
                                       const std::filesystem::path& out_dir) {
  tmpl.validate();
  if (count < 0) throw ParameterError("synth_batch: count must be >= 0");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw IoError("cannot create output directory '" + out_dir.string() + "'");
  }

  std::vector<std::uint64_t> seeds(count);
  std::uint64_t state = tmpl.rng_seed;
  for (auto& s : seeds) s = splitmix64(state);

  std::vector<ManifestEntry> entries(count);
  parallel_for_chunks(std::size_t(count), [&](std::size_t idx) {
    SynthSpec spec = tmpl;
    spec.rng_seed = seeds[idx];
    const SynthResult result = synth_structure(spec);
    char name[32];
    std::snprintf(name, sizeof name, "image_%05zu.png", idx);
    entries[idx] = {name, result.seeds};
    save_gray_png(result.image, out_dir / name);
  });

  const std::filesystem::path manifest = out_dir / "manifest.txt";
  std::ofstream out(manifest, std::ios::binary);
  if (!out) throw IoError("cannot write '" + manifest.string() + "'");
  out << format_manifest(entries);
  if (!out) throw IoError("failed writing '" + manifest.string() + "'");
  return entries;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    ManifestEntry e;
    std::size_t n = 0;
    if (!(ls >> e.filename >> n)) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": malformed entry");
    }
    e.seeds.resize(n);
    for (Point2& s : e.seeds) {
      if (!(ls >> s.x >> s.y)) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": expected " + std::to_string(n) + " seed coordinates");
      }
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace csvd
