#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace csvd {

/// Luminance image, values in [0, 1], row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), values(std::size_t(w) * h, fill) {}

  double& at(int x, int y) { return values[std::size_t(y) * width + x]; }
  double at(int x, int y) const { return values[std::size_t(y) * width + x]; }
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {})
      : width(w), height(h), pixels(std::size_t(w) * h, fill) {}

  Rgb& at(int x, int y) { return pixels[std::size_t(y) * width + x]; }
  const Rgb& at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }
};

/// Reads PNG (gray, gray+alpha, RGB, RGBA, palette; 8 or 16 bit) or binary
/// PGM. Color is reduced with Rec. 601 weights.
GrayImage load_gray(const std::filesystem::path& path);

// 8-bit outputs; gray values are rounded from [0, 1].
void save_gray_png(const GrayImage& image, const std::filesystem::path& path);
void save_rgb_png(const RgbImage& image, const std::filesystem::path& path);
void save_pgm(const GrayImage& image, const std::filesystem::path& path);

// Byte buffers of the same encodings (used for determinism checks).
std::vector<std::uint8_t> encode_gray_png(const GrayImage& image);
std::vector<std::uint8_t> encode_rgb_png(const RgbImage& image);

}  // namespace csvd
