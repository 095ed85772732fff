#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "csvd/diagram.hpp"

namespace csvd {

inline constexpr int kParamFormatVersion = 1;

/// A site grid plus one label per site (all zero before labeling).
struct ParamFile {
  SiteGrid grid;
  std::vector<int> labels;
};

std::string params_to_json(const SiteGrid& grid, const std::vector<int>& labels);
ParamFile params_from_json(const std::string& text);

void save_params(const SiteGrid& grid, const std::vector<int>& labels,
                 const std::filesystem::path& path);
ParamFile load_params(const std::filesystem::path& path);

// Binary M x N x D export: 24-byte header (8-byte magic, then version, m, n,
// d as little-endian uint32), followed by m*n*d little-endian float32 values,
// i outer, j middle, channel inner. Channels: p.x, p.y, theta_1..theta_Ne,
// b_1..b_Ne, r, label.
inline constexpr char kTensorMagic[8] = {'C', 'S', 'V', 'D', 'T', 'E', 'N', 'S'};
inline constexpr std::uint32_t kTensorVersion = 1;
inline constexpr std::size_t kTensorHeaderBytes = 24;

constexpr std::size_t tensor_channels(int n_e) { return 2 * std::size_t(n_e) + 4; }

std::vector<std::uint8_t> encode_tensor(const SiteGrid& grid,
                                        const std::vector<int>& labels);
/// Rebuilds grid and labels at float32 precision. Grid geometry other than
/// the tensor shape (neighborhood radius) takes its default.
ParamFile decode_tensor(const std::vector<std::uint8_t>& bytes);

void save_tensor(const SiteGrid& grid, const std::vector<int>& labels,
                 const std::filesystem::path& path);
ParamFile load_tensor(const std::filesystem::path& path);

}  // namespace csvd
