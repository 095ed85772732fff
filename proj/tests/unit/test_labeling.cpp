#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <queue>

#include "test_support.hpp"

using namespace csvd;
using csvd::test::Rng;
using csvd::test::TempDir;

namespace {

struct TwoSeedScene {
  SynthResult synth;
  AssignmentImage assign;
  EdgePixelSet omega;
};

TwoSeedScene two_seed_scene() {
  SynthSpec spec;
  spec.forced_seeds = {{0.25, 0.5}, {0.75, 0.5}};
  TwoSeedScene s;
  s.synth = synth_structure(spec);
  s.omega = edges_from_mask(s.synth.image, true);
  s.assign = rasterize_assignment(csvd::test::two_site_grid(0.25), 128, 128);
  return s;
}

struct FittedScene {
  SynthResult synth;
  SiteGrid grid;
  AssignmentImage assign;
  EdgePixelSet omega;
  CoincidenceTable table;
};

const FittedScene& eight_seed_scene() {
  static const FittedScene scene = [] {
    SynthSpec spec;
    spec.seed_count = 8;
    spec.rng_seed = 7;
    FittedScene s;
    s.synth = synth_structure(spec);
    s.omega = edges_from_mask(s.synth.image, true);
    s.grid = fit(init_grid(8, 8, 6), s.omega, FitConfig{}).final_grid;
    s.assign = rasterize_assignment(s.grid, 128, 128);
    s.table = coincidence(s.assign, s.omega, 1.5, &s.grid);
    return s;
  }();
  return scene;
}

CoincidenceTable random_table(Rng& rng, int sites) {
  CoincidenceTable t;
  t.site_count = sites;
  t.host.assign(sites, -1);
  for (int a = 0; a < sites; ++a) {
    for (int b = a + 1; b < sites; ++b) {
      if (rng.uniform(0, 1) > 0.3) continue;
      CoincidenceEntry e;
      e.boundary_pixel_count = rng.integer(1, 40);
      e.supported_pixel_count = rng.integer(0, e.boundary_pixel_count);
      e.score = double(e.supported_pixel_count) / e.boundary_pixel_count;
      t.pairs[{a, b}] = e;
    }
  }
  return t;
}

// Components of the "merge" relation by breadth-first search.
std::vector<int> component_oracle(const CoincidenceTable& t, double threshold) {
  std::vector<std::vector<int>> adj(t.site_count);
  for (const auto& [pair, e] : t.pairs) {
    if (e.boundary_pixel_count >= kMinEvidencePixels && e.score < threshold) {
      adj[pair.first].push_back(pair.second);
      adj[pair.second].push_back(pair.first);
    }
  }
  std::vector<int> comp(t.site_count, -1);
  int next = 0;
  for (int s = 0; s < t.site_count; ++s) {
    if (comp[s] >= 0) continue;
    std::queue<int> q;
    q.push(s);
    comp[s] = next;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (comp[v] < 0) {
          comp[v] = next;
          q.push(v);
        }
      }
    }
    ++next;
  }
  return comp;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    }
  }
  return true;
}

void check_labeling_invariants(const CoincidenceTable& t, const MergeLabeling& m) {
  REQUIRE(int(m.site_to_label.size()) == t.site_count);
  std::vector<bool> used(m.label_count, false);
  int expected_next = 0;
  for (int l : m.site_to_label) {
    REQUIRE(l >= 0);
    REQUIRE(l < m.label_count);
    if (!used[l]) {
      CHECK(l == expected_next);
      ++expected_next;
    }
    used[l] = true;
  }
  CHECK(expected_next == m.label_count);
  for (const auto& [pair, e] : t.pairs) {
    const bool differ = m.site_to_label[pair.first] != m.site_to_label[pair.second];
    CHECK(differ == m.kept_pairs.contains(pair));
  }
  for (const auto& pair : m.kept_pairs) CHECK(t.pairs.contains(pair));
}

}  // namespace

TEST_CASE("distance transform matches brute force") {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const int w = rng.integer(1, 30), h = rng.integer(1, 30);
    std::vector<bool> mask(std::size_t(w) * h);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = rng.uniform(0, 1) < 0.05;
    const std::vector<double> d = distance_transform(mask, w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double best = std::numeric_limits<double>::infinity();
        for (int v = 0; v < h; ++v) {
          for (int u = 0; u < w; ++u) {
            if (mask[std::size_t(v) * w + u]) best = std::min(best, std::hypot(double(x - u), double(y - v)));
          }
        }
        CHECK(d[std::size_t(y) * w + x] == doctest::Approx(best));
      }
    }
  }
}

TEST_CASE("boundary on omega scores one, boundary in blank space zero") {
  const AssignmentImage a = rasterize_assignment(csvd::test::two_site_grid(0.25), 64, 64);
  const EdgePixelSet on = EdgePixelSet::from_pixels(a.edge_pixels, 64, 64);
  const CoincidenceTable hit = coincidence(a, on);
  REQUIRE(hit.pairs.size() == 1);
  CHECK(hit.pairs.begin()->second.score == 1.0);

  std::vector<PixelCoord> far;
  for (int y = 0; y < 64; ++y) far.push_back({5, y});
  const CoincidenceTable miss = coincidence(a, EdgePixelSet::from_pixels(far, 64, 64));
  CHECK(miss.pairs.begin()->second.score == 0.0);

  const CoincidenceTable none = coincidence(a, EdgePixelSet{});
  for (const auto& [pair, e] : none.pairs) CHECK(e.score == 0.0);
}

TEST_CASE("scores are fractions over present boundaries") {
  const FittedScene& s = eight_seed_scene();
  CHECK(s.table.site_count == 64);
  for (const auto& [pair, e] : s.table.pairs) {
    CHECK(e.boundary_pixel_count > 0);
    CHECK(e.score >= 0.0);
    CHECK(e.score <= 1.0);
    CHECK(s.assign.boundary_segments.contains(pair));
  }
  CHECK(s.table.pairs.size() == s.assign.boundary_segments.size());
}

TEST_CASE("two-seed perfect fit scores the bisector") {
  const TwoSeedScene s = two_seed_scene();
  const CoincidenceTable t = coincidence(s.assign, s.omega, 1.5);
  REQUIRE(t.pairs.contains({0, 1}));
  CHECK(t.pairs.at({0, 1}).score >= 0.95);
  for (const auto& [pair, e] : t.pairs) {
    if (pair != SitePair{0, 1}) CHECK(e.score <= 0.2);
  }
  const MergeLabeling m = merge(t);
  CHECK(m.label_count == 2);
  const std::vector<PixelCoord> c = contours(s.assign, m);
  REQUIRE(c.size() == 128);
  for (const auto& p : c) CHECK(std::abs((p.x + 0.5) - 64.0) <= 1.0);
}

TEST_CASE("all-zero scores merge everything, all-one scores keep everything") {
  Rng rng(2);
  CoincidenceTable t = random_table(rng, 12);
  for (auto& [pair, e] : t.pairs) {
    e.boundary_pixel_count = 10;
    e.supported_pixel_count = 0;
    e.score = 0.0;
  }
  // Chain every site so the relation is connected.
  for (int k = 0; k + 1 < 12; ++k) t.pairs[{k, k + 1}] = {10, 0, 0.0};
  const MergeLabeling zero = merge(t);
  CHECK(zero.label_count == 1);
  CHECK(zero.kept_pairs.empty());

  for (auto& [pair, e] : t.pairs) {
    e.supported_pixel_count = 10;
    e.score = 1.0;
  }
  const MergeLabeling one = merge(t);
  CHECK(one.label_count == 12);
  for (int k = 0; k < 12; ++k) CHECK(one.site_to_label[k] == k);
  CHECK(one.kept_pairs.size() == t.pairs.size());
}

TEST_CASE("short shared boundaries never merge on their own") {
  CoincidenceTable t;
  t.site_count = 3;
  t.host.assign(3, -1);
  t.pairs[{0, 1}] = {kMinEvidencePixels - 1, 0, 0.0};
  t.pairs[{1, 2}] = {kMinEvidencePixels, 0, 0.0};
  const MergeLabeling m = merge(t);
  CHECK(m.label_count == 2);
  CHECK(m.site_to_label[1] == m.site_to_label[2]);
  CHECK(m.kept_pairs == std::set<SitePair>{{0, 1}});
}

TEST_CASE("labels are the components of the merge relation") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const CoincidenceTable t = random_table(rng, rng.integer(1, 25));
    const double thr = rng.uniform(0, 1);
    const MergeLabeling m = merge(t, thr);
    check_labeling_invariants(t, m);
    CHECK(same_partition(m.site_to_label, component_oracle(t, thr)));
  }
}

TEST_CASE("label count is nonincreasing in the threshold") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const CoincidenceTable t = random_table(rng, rng.integer(2, 25));
    int previous = std::numeric_limits<int>::max();
    for (double thr = 0.0; thr <= 1.01; thr += 0.05) {
      const int count = merge(t, thr).label_count;
      CHECK(count <= previous);
      previous = count;
    }
  }
  const FittedScene& s = eight_seed_scene();
  int previous = std::numeric_limits<int>::max();
  for (double thr = 0.0; thr <= 1.01; thr += 0.1) {
    const MergeLabeling m = merge(s.table, thr);
    check_labeling_invariants(s.table, m);
    CHECK(m.label_count <= previous);
    previous = m.label_count;
  }
}

TEST_CASE("labeling does not depend on site order") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const CoincidenceTable t = random_table(rng, rng.integer(2, 20));
    std::vector<int> perm(t.site_count);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    CoincidenceTable p;
    p.site_count = t.site_count;
    p.host.assign(t.site_count, -1);
    for (const auto& [pair, e] : t.pairs) {
      const int a = perm[pair.first], b = perm[pair.second];
      p.pairs[{std::min(a, b), std::max(a, b)}] = e;
    }
    const MergeLabeling lt = merge(t), lp = merge(p);
    CHECK(lt.label_count == lp.label_count);
    std::vector<int> pulled(t.site_count);
    for (int k = 0; k < t.site_count; ++k) pulled[k] = lp.site_to_label[perm[k]];
    CHECK(same_partition(lt.site_to_label, pulled));
  }
}

TEST_CASE("8-seed fit recovers the ground-truth regions") {
  const FittedScene& s = eight_seed_scene();
  const MergeLabeling m = merge(s.table, 0.5);
  REQUIRE(m.label_count == 8);

  const std::vector<int> truth = nearest_seed_labels(s.synth.seeds, 128, 128);
  const std::vector<int> predicted = merged_label_raster(s.assign, m);
  std::vector<bool> counted(truth.size());
  for (std::size_t i = 0; i < counted.size(); ++i) counted[i] = s.synth.image.values[i] >= 0.5;
  CHECK(csvd::test::min_region_iou(truth, predicted, counted, 8, m.label_count) >= 0.9);
}

TEST_CASE("8-seed contours follow the ground-truth edges") {
  const FittedScene& s = eight_seed_scene();
  const MergeLabeling m = merge(s.table, 0.5);
  const std::vector<PixelCoord> c = contours(s.assign, m);
  std::vector<PixelCoord> truth_edges;
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      if (s.synth.image.at(x, y) < 0.5) truth_edges.push_back({x, y});
    }
  }
  CHECK(csvd::test::hausdorff(c, truth_edges) <= 3.0);

  const std::set<PixelCoord> edges(s.assign.edge_pixels.begin(), s.assign.edge_pixels.end());
  for (const auto& p : c) CHECK(edges.contains(p));
}

TEST_CASE("single label has no contour") {
  const FittedScene& s = eight_seed_scene();
  MergeLabeling one;
  one.site_to_label.assign(64, 0);
  one.label_count = 1;
  CHECK(contours(s.assign, one).empty());
}

TEST_CASE("piece graph only covers non-omega pixels") {
  const FittedScene& s = eight_seed_scene();
  const PieceGraph& g = s.table.pieces;
  REQUIRE_FALSE(g.site.empty());
  CHECK(g.site.size() == g.size.size());
  long total = 0;
  for (std::size_t i = 0; i < g.site.size(); ++i) {
    CHECK(g.size[i] > 0);
    CHECK(g.site[i] >= 0);
    CHECK(g.site[i] < 64);
    total += g.size[i];
  }
  CHECK(total == long(128 * 128 - s.omega.size()));
  for (const auto& [pair, e] : g.pairs) {
    CHECK(pair.first < pair.second);
    CHECK(g.site[pair.first] != g.site[pair.second]);
    CHECK(e.score >= 0.0);
    CHECK(e.score <= 1.0);
  }
}

TEST_CASE("coincidence rejects mismatched resolutions") {
  const AssignmentImage a = rasterize_assignment(csvd::test::two_site_grid(0.25), 64, 64);
  CHECK_THROWS_AS(coincidence(a, EdgePixelSet::from_pixels({{1, 1}}, 32, 32)), ParameterError);
}

TEST_CASE("label files round trip") {
  TempDir dir;
  const FittedScene& s = eight_seed_scene();
  LabelFile f;
  f.threshold = 0.4;
  f.tolerance = 2.0;
  f.labeling = merge(s.table, 0.4);
  save_labeling(f, dir / "labels.txt");
  const LabelFile back = load_labeling(dir / "labels.txt");
  CHECK(back.threshold == f.threshold);
  CHECK(back.tolerance == f.tolerance);
  CHECK(back.labeling.site_to_label == f.labeling.site_to_label);
  CHECK(back.labeling.label_count == f.labeling.label_count);
  CHECK(back.labeling.kept_pairs == f.labeling.kept_pairs);

  {
    std::ofstream out(dir / "bad.txt");
    out << "csvd-labels 1\nthreshold 0.5\ntolerance 1.5\nsites 3\nlabels 2\n0 0\n1 5\n";
  }
  CHECK_THROWS_AS(load_labeling(dir / "bad.txt"), ParseError);
  CHECK_THROWS_AS(load_labeling(dir / "missing.txt"), IoError);
}
