#include <doctest.h>

#include <fstream>
#include <set>

#include "test_support.hpp"

using namespace csvd;
using csvd::test::Rng;
using csvd::test::TempDir;

namespace {

std::set<PixelCoord> pixel_set(const EdgePixelSet& s) {
  const auto px = s.pixels();
  return {px.begin(), px.end()};
}

GrayImage noise_image(Rng& rng, int w, int h) {
  GrayImage img(w, h);
  for (double& v : img.values) v = rng.uniform(0.0, 1.0);
  return img;
}

}  // namespace

TEST_CASE("load_gray reads black, white and colored PNGs") {
  TempDir dir;
  save_rgb_png(RgbImage(4, 3, {0, 0, 0}), dir / "black.png");
  save_rgb_png(RgbImage(4, 3, {255, 255, 255}), dir / "white.png");
  RgbImage two(2, 1);
  two.at(0, 0) = {255, 0, 0};
  two.at(1, 0) = {0, 0, 255};
  save_rgb_png(two, dir / "two.png");

  for (double v : load_gray(dir / "black.png").values) CHECK(v == 0.0);
  for (double v : load_gray(dir / "white.png").values) CHECK(v == doctest::Approx(1.0));
  const GrayImage g = load_gray(dir / "two.png");
  REQUIRE(g.width == 2);
  REQUIRE(g.height == 1);
  CHECK(g.values[0] == doctest::Approx(0.299).epsilon(1e-9));
  CHECK(g.values[1] == doctest::Approx(0.114).epsilon(1e-9));
}

TEST_CASE("gray PNG and PGM round trips") {
  TempDir dir;
  GrayImage img(5, 4);
  for (int i = 0; i < 20; ++i) img.values[i] = i / 19.0;
  save_gray_png(img, dir / "g.png");
  save_pgm(img, dir / "g.pgm");
  const GrayImage a = load_gray(dir / "g.png");
  const GrayImage b = load_gray(dir / "g.pgm");
  for (int i = 0; i < 20; ++i) {
    CHECK(a.values[i] == doctest::Approx(img.values[i]).epsilon(0.5 / 255));
    CHECK(b.values[i] == a.values[i]);
  }
}

TEST_CASE("load_gray errors name the path") {
  TempDir dir;
  try {
    load_gray(dir / "missing.png");
    FAIL("expected an error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("missing.png") != std::string::npos);
  }
  {
    std::ofstream out(dir / "junk.png", std::ios::binary);
    out << "this is not an image";
  }
  try {
    load_gray(dir / "junk.png");
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("junk.png") != std::string::npos);
  }
}

TEST_CASE("constant images have no edges") {
  for (EdgeMethod m : {EdgeMethod::Sobel, EdgeMethod::LoG}) {
    CHECK(detect_edges(GrayImage(32, 32, 0.7), m).empty());
    CHECK(detect_edges(GrayImage(32, 32, 0.0), m, 0.3, true).empty());
  }
}

TEST_CASE("vertical step gives one thin column") {
  GrayImage img(32, 24);
  for (int y = 0; y < 24; ++y) {
    for (int x = 16; x < 32; ++x) img.at(x, y) = 1.0;
  }
  const EdgePixelSet e = detect_edges(img, EdgeMethod::Sobel, 0.5, true);
  REQUIRE(e.size() == 24);
  std::set<int> columns;
  std::set<int> rows;
  for (const auto& p : e.pixels()) {
    columns.insert(p.x);
    rows.insert(p.y);
  }
  CHECK(columns.size() == 1);
  CHECK((*columns.begin() == 15 || *columns.begin() == 16));
  CHECK(rows.size() == 24);
}

TEST_CASE("LoG finds a thin dark line") {
  GrayImage img(40, 40, 1.0);
  for (int y = 0; y < 40; ++y) img.at(20, y) = 0.0;
  const EdgePixelSet e = detect_edges(img, EdgeMethod::LoG, 0.5);
  REQUIRE_FALSE(e.empty());
  const auto found = pixel_set(e);
  for (const auto& p : found) CHECK(std::abs(p.x - 20) <= 1);
  for (int y = 0; y < 40; ++y) CHECK(found.contains({20, y}));
}

TEST_CASE("edge sets stay inside the image rectangle") {
  Rng rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    const int w = rng.integer(8, 60), h = rng.integer(8, 60);
    const GrayImage img = noise_image(rng, w, h);
    const double scale = std::max(w, h);
    for (EdgeMethod m : {EdgeMethod::Sobel, EdgeMethod::LoG}) {
      const EdgePixelSet e = detect_edges(img, m, 0.3, trial % 2 == 0);
      CHECK(e.width == w);
      CHECK(e.height == h);
      CHECK(pixel_set(e).size() == e.size());
      for (const Point2 q : e.points) {
        CHECK(q.x >= 0.0);
        CHECK(q.y >= 0.0);
        CHECK(q.x <= w / scale);
        CHECK(q.y <= h / scale);
      }
    }
  }
}

TEST_CASE("filter responses are translation equivariant") {
  Rng rng(4);
  const GrayImage big = noise_image(rng, 48, 48);
  const int dx = 3, dy = 5;
  GrayImage shifted(40, 40);
  GrayImage base(40, 40);
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) {
      base.at(x, y) = big.at(x, y);
      shifted.at(x, y) = big.at(x + dx, y + dy);
    }
  }
  for (EdgeMethod m : {EdgeMethod::Sobel, EdgeMethod::LoG}) {
    const GrayImage a = filter_response(base, m);
    const GrayImage b = filter_response(shifted, m);
    for (int y = 3; y + 3 < 40 - dy; ++y) {
      for (int x = 3; x + 3 < 40 - dx; ++x) {
        CHECK(b.at(x, y) == doctest::Approx(a.at(x + dx, y + dy)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("method names parse") {
  CHECK(parse_edge_method("sobel") == EdgeMethod::Sobel);
  CHECK(parse_edge_method("log") == EdgeMethod::LoG);
  CHECK_THROWS_AS(parse_edge_method("canny"), ParameterError);
}

TEST_CASE("two forced seeds draw the bisector") {
  SynthSpec spec;
  spec.forced_seeds = {{0.25, 0.5}, {0.75, 0.5}};
  spec.size = 64;
  const SynthResult r = synth_structure(spec);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      CHECK(r.image.at(x, y) == (x == 31 ? 0.0 : 1.0));
    }
  }
  CHECK(count_white_regions(r.image) == 2);
}

TEST_CASE("synthetic images have one white region per seed") {
  for (std::uint64_t s = 0; s < 12; ++s) {
    SynthSpec spec;
    spec.seed_count = 2 + int(s % 11);
    spec.rng_seed = 1000 + s;
    spec.density_gradient = s % 2 == 0;
    const SynthResult r = synth_structure(spec);
    CHECK(int(r.seeds.size()) == spec.seed_count);
    CHECK(count_white_regions(r.image) == spec.seed_count);
  }
}

TEST_CASE("synthetic boundaries lie on the Euclidean diagram") {
  for (std::uint64_t s = 0; s < 6; ++s) {
    SynthSpec spec;
    spec.rng_seed = 40 + s;
    const SynthResult r = synth_structure(spec);
    for (int y = 0; y < spec.size; ++y) {
      for (int x = 0; x < spec.size; ++x) {
        if (r.image.at(x, y) >= 0.5) continue;
        const Point2 q = pixel_center(x, y, spec.size, spec.size);
        CHECK(csvd::test::distance_to_voronoi_edges(r.seeds, q) * spec.size <= 1.5);
      }
    }
  }
}

TEST_CASE("nearest seed labels match a brute-force search") {
  Rng rng(5);
  std::vector<Point2> seeds;
  for (int i = 0; i < 9; ++i) seeds.push_back({rng.uniform(0, 1), rng.uniform(0, 1)});
  CHECK(nearest_seed_labels(seeds, 50, 40) == csvd::test::nearest_seed_oracle(seeds, 50, 40));
}

TEST_CASE("synthesis is deterministic") {
  SynthSpec spec;
  spec.rng_seed = 77;
  const SynthResult a = synth_structure(spec);
  const SynthResult b = synth_structure(spec);
  CHECK(a.image.values == b.image.values);
  CHECK(a.seeds == b.seeds);
  CHECK(encode_gray_png(a.image) == encode_gray_png(b.image));
}

TEST_CASE("density gradient favours the bottom-right corner") {
  double sx = 0.0, sy = 0.0;
  int count = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    SynthSpec spec;
    spec.rng_seed = 300 + s;
    for (const Point2 p : synth_structure(spec).seeds) {
      sx += p.x;
      sy += p.y;
      ++count;
    }
  }
  CHECK(sx / count > 0.55);
  CHECK(sy / count > 0.55);
}

TEST_CASE("synth spec validation") {
  SynthSpec spec;
  spec.seed_count = 1;
  CHECK_THROWS_AS(spec.validate(), ParameterError);
  spec = {};
  spec.size = 16;
  CHECK_THROWS_AS(spec.validate(), ParameterError);
}

TEST_CASE("batch synthesis writes images and a manifest") {
  TempDir a, b, empty;
  SynthSpec spec;
  spec.rng_seed = 5;
  spec.size = 64;
  const auto entries = synth_batch(spec, 3, a.path());
  REQUIRE(entries.size() == 3);
  for (const auto& e : entries) {
    CHECK(std::filesystem::exists(a / e.filename));
    CHECK(int(e.seeds.size()) == spec.seed_count);
  }
  CHECK(read_manifest(a / "manifest.txt").size() == 3);
  CHECK(format_manifest(read_manifest(a / "manifest.txt")) == format_manifest(entries));

  synth_batch(spec, 3, b.path());
  std::ifstream ma(a / "manifest.txt"), mb(b / "manifest.txt");
  const std::string text_a((std::istreambuf_iterator<char>(ma)), {});
  const std::string text_b((std::istreambuf_iterator<char>(mb)), {});
  CHECK(text_a == text_b);

  CHECK(synth_batch(spec, 0, empty.path()).empty());
  int pngs = 0;
  for (const auto& f : std::filesystem::directory_iterator(empty.path())) {
    if (f.path().extension() == ".png") ++pngs;
  }
  CHECK(pngs == 0);
  CHECK(read_manifest(empty / "manifest.txt").empty());
}

TEST_CASE("edge masks and edge rasters round trip") {
  SynthSpec spec;
  spec.rng_seed = 9;
  spec.size = 64;
  const GrayImage img = synth_structure(spec).image;
  const EdgePixelSet dark = edges_from_mask(img, true);
  const GrayImage raster = edges_to_image(dark);
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    CHECK(raster.values[i] == (img.values[i] < 0.5 ? 1.0 : 0.0));
  }
  CHECK(edges_from_mask(raster).size() == dark.size());
}
