#include "csvd/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>

#include "csvd/errors.hpp"

namespace csvd {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct RawPng {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 (gray) or 3 (rgb) after transforms
  std::vector<std::uint8_t> data;
  std::vector<png_bytep> rows;
};

// libpng reports errors by longjmp; only the png structs and the caller-owned
// RawPng are touched between setjmp and the jump.
bool read_png(std::FILE* fp, RawPng& out, char (&error)[128]) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) {
    std::snprintf(error, sizeof error, "cannot allocate PNG reader");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::snprintf(error, sizeof error, "corrupt PNG data");
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.data.resize(stride * out.height);
  out.rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) out.rows[y] = out.data.data() + y * stride;
  png_read_image(png, out.rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
  auto* sink = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  sink->insert(sink->end(), data, data + length);
}

void flush_nothing(png_structp) {}

bool write_png(int width, int height, int color_type, const std::vector<png_bytep>& rows,
               std::vector<std::uint8_t>& sink) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &sink, append_bytes, flush_nothing);
  png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

double luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (r == g && g == b) return r / 255.0;
  return (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
}

GrayImage load_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open '" + path.string() + "'");
  RawPng raw;
  char error[128] = {};
  if (!read_png(fp.get(), raw, error)) {
    throw IoError("'" + path.string() + "': " + error);
  }
  GrayImage img(raw.width, raw.height);
  for (int y = 0; y < raw.height; ++y) {
    const png_bytep row = raw.rows[y];
    for (int x = 0; x < raw.width; ++x) {
      if (raw.channels == 1) {
        img.at(x, y) = row[x] / 255.0;
      } else {
        const png_bytep px = row + x * raw.channels;
        img.at(x, y) = luminance(px[0], px[1], px[2]);
      }
    }
  }
  return img;
}

// Binary (P5) and ASCII (P2) graymaps.
GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string magic;
  in >> magic;
  auto next_int = [&]() {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      in >> std::ws;
    }
    long v = -1;
    in >> v;
    if (!in || v < 0) throw IoError("'" + path.string() + "': malformed PGM header");
    return v;
  };
  const long w = next_int(), h = next_int(), maxval = next_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw IoError("'" + path.string() + "': unsupported PGM dimensions");
  }
  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  if (magic == "P5") {
    in.get();
    const int bytes_per = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(std::size_t(w) * h * bytes_per);
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (in.gcount() != std::streamsize(buf.size())) {
      throw IoError("'" + path.string() + "': truncated PGM data");
    }
    for (std::size_t i = 0; i < img.values.size(); ++i) {
      const unsigned v = bytes_per == 2 ? (buf[2 * i] << 8) | buf[2 * i + 1] : buf[i];
      img.values[i] = double(v) / double(maxval);
    }
  } else if (magic == "P2") {
    for (double& v : img.values) v = double(next_int()) / double(maxval);
  } else {
    throw IoError("'" + path.string() + "': not a PGM file");
  }
  return img;
}

}  // namespace

GrayImage load_gray(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open '" + path.string() + "'");
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), 8);
  const auto got = probe.gcount();
  probe.close();
  if (got == 8 && png_sig_cmp(sig, 0, 8) == 0) return load_png(path);
  if (got >= 2 && sig[0] == 'P' && (sig[1] == '5' || sig[1] == '2')) return load_pgm(path);
  throw IoError("'" + path.string() + "': unsupported image format (expected PNG or PGM)");
}

std::vector<std::uint8_t> encode_gray_png(const GrayImage& image) {
  std::vector<std::uint8_t> pixels(image.values.size());
  std::transform(image.values.begin(), image.values.end(), pixels.begin(), to_byte);
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y) rows[y] = pixels.data() + std::size_t(y) * image.width;
  std::vector<std::uint8_t> out;
  if (!write_png(image.width, image.height, PNG_COLOR_TYPE_GRAY, rows, out)) {
    throw IoError("PNG encoding failed");
  }
  return out;
}

std::vector<std::uint8_t> encode_rgb_png(const RgbImage& image) {
  std::vector<std::uint8_t> pixels;
  pixels.reserve(image.pixels.size() * 3);
  for (const Rgb& c : image.pixels) pixels.insert(pixels.end(), {c.r, c.g, c.b});
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y) {
    rows[y] = pixels.data() + std::size_t(y) * image.width * 3;
  }
  std::vector<std::uint8_t> out;
  if (!write_png(image.width, image.height, PNG_COLOR_TYPE_RGB, rows, out)) {
    throw IoError("PNG encoding failed");
  }
  return out;
}

void save_gray_png(const GrayImage& image, const std::filesystem::path& path) {
  write_file(path, encode_gray_png(image));
}

void save_rgb_png(const RgbImage& image, const std::filesystem::path& path) {
  write_file(path, encode_rgb_png(image));
}

void save_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ostringstream header;
  header << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> bytes(h.begin(), h.end());
  std::transform(image.values.begin(), image.values.end(), std::back_inserter(bytes), to_byte);
  write_file(path, bytes);
}

}  // namespace csvd
