#include "csvd/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

namespace csvd {

bool ConvexSite::valid() const {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  if (!(r > 0.0) || !std::isfinite(r) || edges.empty()) return false;
  return std::all_of(edges.begin(), edges.end(), [](const HalfPlaneEdge& e) {
    return e.b > 0.0 && std::isfinite(e.b) && std::isfinite(e.theta);
  });
}

std::vector<double> SiteGradient::flattened() const {
  std::vector<double> out(site_param_count(d_b.size()), 0.0);
  out[0] = d_p.x;
  out[1] = d_p.y;
  for (std::size_t i = 0; i < d_theta.size(); ++i) {
    out[theta_offset(i)] = d_theta[i];
    out[b_offset(d_b.size(), i)] = d_b[i];
  }
  out[r_offset(d_b.size())] = d_r;
  return out;
}

double branch_value(const ConvexSite& site, Point2 q, int branch) {
  const Point2 v = site.p - q;
  if (branch == kCircleBranch) return norm(v) / site.r;
  const HalfPlaneEdge& e = site.edges[static_cast<std::size_t>(branch)];
  return dot(e.normal(), v) / e.b;
}

DistanceEval csd_eval(const ConvexSite& site, Point2 q) {
  const Point2 v = site.p - q;
  DistanceEval best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < site.edges.size(); ++i) {
    const HalfPlaneEdge& e = site.edges[i];
    const double term =
        (std::cos(e.theta) * v.x + std::sin(e.theta) * v.y) / e.b;
    if (term > best.value) best = {term, static_cast<int>(i)};
  }
  const double circle = norm(v) / site.r;
  if (circle > best.value) best = {circle, kCircleBranch};
  return best;
}

double csd_oracle(const ConvexSite& site, Point2 q) {
  const Point2 pq = q - site.p;
  const double len = norm(pq);
  if (len == 0.0) return 0.0;
  const Point2 u = (1.0 / len) * pq;

  // Walk along the ray until the first boundary crossing: the circle at
  // distance r, or an edge line whose outward side the ray heads into.
  double exit = site.r;
  for (const HalfPlaneEdge& e : site.edges) {
    const double along = dot(e.normal(), u);
    if (along < 0.0) exit = std::min(exit, e.b / -along);
  }
  return len / exit;
}

bool contains(const ConvexSite& site, Point2 q) {
  const Point2 d = q - site.p;
  if (dot(d, d) > site.r * site.r) return false;
  // Inside every half-plane n . (x - p) + b >= 0.
  return std::all_of(site.edges.begin(), site.edges.end(),
                     [&](const HalfPlaneEdge& e) {
                       return dot(e.normal(), d) + e.b >= 0.0;
                     });
}

void accumulate_csd_grad(const ConvexSite& site, Point2 q,
                         const DistanceEval& eval, double scale,
                         std::span<double> site_grad, Point2* q_grad) {
  const std::size_t ne = site.edges.size();
  assert(site_grad.size() >= site_param_count(ne));
  const Point2 v = site.p - q;
  Point2 dp{0.0, 0.0};

  if (eval.circle_active()) {
    const double len = norm(v);
    if (len == 0.0) return;
    dp = (1.0 / (site.r * len)) * v;
    site_grad[r_offset(ne)] += scale * (-len / (site.r * site.r));
  } else {
    const auto i = static_cast<std::size_t>(eval.active_branch);
    const HalfPlaneEdge& e = site.edges[i];
    if (v.x == 0.0 && v.y == 0.0) return;
    const Point2 n = e.normal();
    const Point2 dn{-n.y, n.x};
    dp = (1.0 / e.b) * n;
    site_grad[theta_offset(i)] += scale * dot(dn, v) / e.b;
    site_grad[b_offset(ne, i)] += scale * (-dot(n, v) / (e.b * e.b));
  }

  site_grad[0] += scale * dp.x;
  site_grad[1] += scale * dp.y;
  if (q_grad != nullptr) {
    q_grad->x -= scale * dp.x;
    q_grad->y -= scale * dp.y;
  }
}

SiteGradient csd_grad(const ConvexSite& site, Point2 q) {
  const std::size_t ne = site.edges.size();
  std::vector<double> flat(site_param_count(ne), 0.0);
  Point2 dq{0.0, 0.0};
  accumulate_csd_grad(site, q, csd_eval(site, q), 1.0, flat, &dq);

  SiteGradient g;
  g.d_p = {flat[0], flat[1]};
  g.d_q = dq;
  g.d_theta.resize(ne);
  g.d_b.resize(ne);
  for (std::size_t i = 0; i < ne; ++i) {
    g.d_theta[i] = flat[theta_offset(i)];
    g.d_b[i] = flat[b_offset(ne, i)];
  }
  g.d_r = flat[r_offset(ne)];
  return g;
}

}  // namespace csvd
