#include "csvd/render.hpp"

#include <algorithm>
#include <cstdint>
#include <sstream>

#include "csvd/errors.hpp"

namespace csvd {
namespace {

constexpr Rgb kWhite{255, 255, 255};
constexpr Rgb kBlack{0, 0, 0};

std::vector<int> raster_for(const AssignmentImage& assign, RenderMode mode,
                            const MergeLabeling* labels) {
  if (mode == RenderMode::Contours) {
    if (labels == nullptr) throw ParameterError("contours mode needs a labeling");
    return merged_label_raster(assign, *labels);
  }
  if (mode == RenderMode::Cells && labels != nullptr) {
    return merged_label_raster(assign, *labels);
  }
  return assign.labels;
}

std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

}  // namespace

RenderMode parse_render_mode(const std::string& name) {
  if (name == "cells") return RenderMode::Cells;
  if (name == "edges") return RenderMode::Edges;
  if (name == "contours") return RenderMode::Contours;
  throw ParameterError("unknown render mode '" + name + "' (expected cells, edges or contours)");
}

Rgb label_color(int label) {
  std::uint64_t z = std::uint64_t(label) * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  // Keep colors away from black and white so boundaries stay visible.
  auto channel = [&](int shift) { return std::uint8_t(48 + ((z >> shift) & 0xFF) * 160 / 255); };
  return {channel(0), channel(8), channel(16)};
}

RgbImage render_raster(const AssignmentImage& assign, RenderMode mode,
                       const MergeLabeling* labels) {
  RgbImage img(assign.width, assign.height, kWhite);
  if (mode == RenderMode::Cells) {
    const std::vector<int> raster = raster_for(assign, mode, labels);
    for (std::size_t i = 0; i < raster.size(); ++i) img.pixels[i] = label_color(raster[i]);
    return img;
  }
  if (mode == RenderMode::Contours && labels == nullptr) {
    throw ParameterError("contours mode needs a labeling");
  }
  const std::vector<PixelCoord> pixels =
      mode == RenderMode::Edges ? assign.edge_pixels : contours(assign, *labels);
  for (const PixelCoord& px : pixels) img.at(px.x, px.y) = kBlack;
  return img;
}

std::vector<std::vector<PixelCoord>> boundary_polylines(const std::vector<int>& labels,
                                                        int width, int height) {
  const int cw = width + 1;
  auto vid = [cw](int x, int y) { return y * cw + x; };
  std::vector<std::vector<int>> adj(std::size_t(cw) * (height + 1));
  auto link = [&](int a, int b) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  };
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int here = labels[std::size_t(y) * width + x];
      if (x + 1 < width && labels[std::size_t(y) * width + x + 1] != here) {
        link(vid(x + 1, y), vid(x + 1, y + 1));
      }
      if (y + 1 < height && labels[std::size_t(y + 1) * width + x] != here) {
        link(vid(x, y + 1), vid(x + 1, y + 1));
      }
    }
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());

  std::vector<std::vector<bool>> used(adj.size());
  for (std::size_t v = 0; v < adj.size(); ++v) used[v].assign(adj[v].size(), false);
  auto mark = [&](int a, int b) {
    for (std::size_t i = 0; i < adj[a].size(); ++i) {
      if (adj[a][i] == b && !used[a][i]) {
        used[a][i] = true;
        break;
      }
    }
    for (std::size_t i = 0; i < adj[b].size(); ++i) {
      if (adj[b][i] == a && !used[b][i]) {
        used[b][i] = true;
        break;
      }
    }
  };
  auto point = [cw](int v) { return PixelCoord{v % cw, v / cw}; };

  std::vector<std::vector<PixelCoord>> lines;
  auto trace = [&](int start, std::size_t first) {
    std::vector<int> chain{start};
    int prev = start, cur = adj[start][first];
    mark(prev, cur);
    chain.push_back(cur);
    while (adj[cur].size() == 2 && cur != start) {
      const int next = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
      bool free = false;
      for (std::size_t i = 0; i < adj[cur].size(); ++i) {
        if (adj[cur][i] == next && !used[cur][i]) free = true;
      }
      if (!free) break;
      mark(cur, next);
      prev = cur;
      cur = next;
      chain.push_back(cur);
    }
    // Collapse collinear interior points.
    std::vector<PixelCoord> line;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const PixelCoord p = point(chain[i]);
      if (line.size() >= 2) {
        const PixelCoord a = line[line.size() - 2], b = line.back();
        if ((b.x - a.x) * (p.y - b.y) == (b.y - a.y) * (p.x - b.x)) {
          line.back() = p;
          continue;
        }
      }
      line.push_back(p);
    }
    lines.push_back(std::move(line));
  };

  // Open chains start at endpoints and junctions; what remains are cycles.
  for (int pass = 0; pass < 2; ++pass) {
    for (int v = 0; v < int(adj.size()); ++v) {
      if (pass == 0 && adj[v].size() == 2) continue;
      for (std::size_t i = 0; i < adj[v].size(); ++i) {
        if (!used[v][i]) trace(v, i);
      }
    }
  }
  return lines;
}

std::string render_svg(const AssignmentImage& assign, RenderMode mode,
                       const MergeLabeling* labels) {
  const std::vector<int> raster = raster_for(assign, mode, labels);
  const int w = assign.width, h = assign.height;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  svg << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";
  if (mode == RenderMode::Cells) {
    for (int y = 0; y < h; ++y) {
      int x = 0;
      while (x < w) {
        const int label = raster[std::size_t(y) * w + x];
        int end = x + 1;
        while (end < w && raster[std::size_t(y) * w + end] == label) ++end;
        svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << end - x
            << "\" height=\"1\" fill=\"" << hex(label_color(label)) << "\"/>\n";
        x = end;
      }
    }
  }
  svg << "<g fill=\"none\" stroke=\"#000000\" stroke-width=\"1\">\n";
  for (const auto& line : boundary_polylines(raster, w, h)) {
    svg << "<polyline points=\"";
    for (std::size_t i = 0; i < line.size(); ++i) {
      svg << (i ? " " : "") << line[i].x << ',' << line[i].y;
    }
    svg << "\"/>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace csvd
