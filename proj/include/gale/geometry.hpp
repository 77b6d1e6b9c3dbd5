#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gale/common.hpp"

namespace gale::geo {

using Point = Eigen::Vector2d;

/// Twice the signed area of triangle (o, a, b); > 0 when CCW.
inline double cross(const Point& o, const Point& a, const Point& b) {
  const long double v = (static_cast<long double>(a.x()) - o.x()) * (static_cast<long double>(b.y()) - o.y()) -
                        (static_cast<long double>(a.y()) - o.y()) * (static_cast<long double>(b.x()) - o.x());
  return static_cast<double>(v);
}

inline double triangle_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * cross(a, b, c);
}

/// Convex hull by monotone chain; returns CCW vertices, collinear points dropped.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point& a, const Point& b) { return a.x() == b.x() && a.y() == b.y(); }),
            pts.end());
  const int n = static_cast<int>(pts.size());
  if (n < 3) return pts;
  std::vector<Point> h(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  const int lower = k + 1;
  for (int i = n - 2; i >= 0; --i) {
    while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

/// Signed shoelace area; positive for CCW polygons.
inline double polygon_area(const std::vector<Point>& poly) {
  double s = 0.0;
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    s += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * s;
}

inline bool point_in_convex(const std::vector<Point>& poly, const Point& p, double eps = 1e-12) {
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) {
    if (cross(poly[i], poly[(i + 1) % n], p) < -eps) return false;
  }
  return true;
}

inline double point_segment_distance(const Point& a, const Point& b, const Point& p) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

/// Distance from p to a convex polygon; 0 for points inside or on it.
inline double distance_to_convex(const std::vector<Point>& poly, const Point& p) {
  if (point_in_convex(poly, p)) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i)
    d = std::min(d, point_segment_distance(poly[i], poly[(i + 1) % n], p));
  return d;
}

/// Outward dilation of a CCW convex polygon by radius r, corners rounded by
/// sampled arcs with chord step <= arc_step. Result is convex and CCW.
inline std::vector<Point> dilate_convex(const std::vector<Point>& hull, double r, double arc_step) {
  const int n = static_cast<int>(hull.size());
  std::vector<Point> out;
  auto outward_normal = [](const Point& a, const Point& b) {
    Point d = (b - a).normalized();
    return Point(d.y(), -d.x());  // right of the edge direction = outside for CCW
  };
  const double max_dtheta = std::min(M_PI / 8.0, arc_step / std::max(r, 1e-12));
  for (int i = 0; i < n; ++i) {
    const Point& prev = hull[(i + n - 1) % n];
    const Point& cur = hull[i];
    const Point& next = hull[(i + 1) % n];
    const Point n0 = outward_normal(prev, cur);
    const Point n1 = outward_normal(cur, next);
    double t0 = std::atan2(n0.y(), n0.x());
    double t1 = std::atan2(n1.y(), n1.x());
    while (t1 < t0) t1 += 2.0 * M_PI;  // CCW sweep
    const int steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / max_dtheta)));
    for (int k = 0; k <= steps; ++k) {
      const double t = t0 + (t1 - t0) * k / steps;
      out.emplace_back(cur.x() + r * std::cos(t), cur.y() + r * std::sin(t));
    }
  }
  // drop near-duplicate consecutive points
  std::vector<Point> clean;
  for (const auto& p : out) {
    if (clean.empty() || (clean.back() - p).norm() > 1e-12) clean.push_back(p);
  }
  if (clean.size() > 1 && (clean.front() - clean.back()).norm() <= 1e-12) clean.pop_back();
  return clean;
}

}  // namespace gale::geo
