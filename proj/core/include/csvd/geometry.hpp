#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace csvd {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

/// One supporting line of a convex site.
///
/// The normal is parameterized by angle so it is unit length by construction.
/// The line is n . (x - p) + b = 0; the site's interior point p satisfies
/// n . (p - x) <= b, i.e. the line sits at distance b from p in direction -n.
struct HalfPlaneEdge {
  double theta = 0.0;
  double b = 1.0;

  Point2 normal() const { return {std::cos(theta), std::sin(theta)}; }
};

/// A generator of the diagram: the convex set (intersection of half-planes
/// with the disk of radius r about p) together with its interior point p.
struct ConvexSite {
  Point2 p;
  std::vector<HalfPlaneEdge> edges;
  double r = 1.0;

  bool valid() const;
};

inline constexpr int kCircleBranch = -1;

struct DistanceEval {
  double value = 0.0;
  // Index of the edge term that attained the max, or kCircleBranch.
  int active_branch = 0;

  bool circle_active() const { return active_branch == kCircleBranch; }
};

// Flat per-site parameter layout shared by gradients, the optimizer and the
// tensor export: [p.x, p.y, theta_1..theta_Ne, b_1..b_Ne, r].
constexpr std::size_t site_param_count(std::size_t edge_count) {
  return 2 * edge_count + 3;
}
constexpr std::size_t theta_offset(std::size_t i) { return 2 + i; }
constexpr std::size_t b_offset(std::size_t edge_count, std::size_t i) {
  return 2 + edge_count + i;
}
constexpr std::size_t r_offset(std::size_t edge_count) {
  return 2 + 2 * edge_count;
}

struct SiteGradient {
  Point2 d_p;
  // Derivative with respect to the query point; always -d_p.
  Point2 d_q;
  std::vector<double> d_theta;
  std::vector<double> d_b;
  double d_r = 0.0;

  std::vector<double> flattened() const;
};

/// Convex set distance in its algebraic form:
///   max( max_i n_i . (p - q) / b_i , |p - q| / r ).
/// Ties go to the lowest edge index; the circle term wins only strictly.
DistanceEval csd_eval(const ConvexSite& site, Point2 q);

/// Value of a single term of the max (edge index or kCircleBranch).
double branch_value(const ConvexSite& site, Point2 q, int branch);

/// Definitional distance |pq| / |pq'| where q' is where the ray p->q leaves
/// the convex set. Independent of csd_eval; used to cross-check it.
double csd_oracle(const ConvexSite& site, Point2 q);

/// Direct membership test for the convex set (polygon intersected with disk).
bool contains(const ConvexSite& site, Point2 q);

/// Subgradient of csd_eval routed through the active branch only.
/// At q == p the gradient is zero.
SiteGradient csd_grad(const ConvexSite& site, Point2 q);

/// Accumulates scale * d(value)/d(params) into site_grad (flat layout above)
/// and, when q_grad is non-null, scale * d(value)/dq into *q_grad.
void accumulate_csd_grad(const ConvexSite& site, Point2 q,
                         const DistanceEval& eval, double scale,
                         std::span<double> site_grad, Point2* q_grad = nullptr);

}  // namespace csvd
