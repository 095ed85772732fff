#pragma once

#include <string>
#include <vector>

#include "csvd/diagram.hpp"
#include "csvd/image_io.hpp"
#include "csvd/labeling.hpp"

namespace csvd {

enum class RenderMode { Cells, Edges, Contours };

RenderMode parse_render_mode(const std::string& name);

/// Deterministic color for a label.
Rgb label_color(int label);

/// Raster rendering. Cells colors each pixel by site (or by merged label
/// when labels is non-null); Edges draws all Voronoi-edge pixels; Contours
/// draws only boundaries between different merged labels.
RgbImage render_raster(const AssignmentImage& assign, RenderMode mode,
                       const MergeLabeling* labels = nullptr);

/// Closed and open polylines along pixel boundaries where the label changes,
/// in pixel-corner coordinates, collinear runs collapsed.
std::vector<std::vector<PixelCoord>> boundary_polylines(
    const std::vector<int>& labels, int width, int height);

std::string render_svg(const AssignmentImage& assign, RenderMode mode,
                       const MergeLabeling* labels = nullptr);

}  // namespace csvd
