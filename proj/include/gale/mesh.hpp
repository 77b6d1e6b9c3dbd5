#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gale/common.hpp"
#include "gale/geometry.hpp"

namespace gale::mesh {

/// Density calibration: nominal max-edge values are mapped to the internal
/// refinement size target as size_factor * max_edge. The factor reproduces
/// the vertex densities of the reference mesh generator this tool was tuned
/// against; the literal "no edge longer than max_edge" guarantee holds a
/// fortiori.
inline constexpr double kDefaultSizeFactor = 0.41;

struct MeshSpec {
  double me1 = 1.0;    // max edge, inner domain (degrees)
  double me2 = 1.0;    // max edge, outer extension
  double of1 = 0.15;   // inner offset from the data hull
  double of2 = 0.15;   // additional outer extension width
  double cutoff = 0.0; // merge radius for input locations
  double min_angle_deg = 21.0;
  double size_factor = kDefaultSizeFactor;

  void validate() const {
    if (!(me1 > 0.0) || !(me2 > 0.0)) throw config_error("mesh spec: max edge values must be > 0");
    if (!(of1 > 0.0) || !(of2 > 0.0)) throw config_error("mesh spec: offsets must be > 0");
    if (cutoff < 0.0) throw config_error("mesh spec: cutoff must be >= 0");
    if (!(size_factor > 0.0) || size_factor > 1.0)
      throw config_error("mesh spec: size_factor must be in (0, 1]");
  }
};

struct Mesh {
  std::vector<geo::Point> vertices;
  std::vector<std::array<int, 3>> triangles;  // CCW vertex indices
  std::vector<std::uint8_t> inner;            // 1 = inner-domain vertex
  std::vector<geo::Point> hull;               // convex hull of merged input locations
  std::vector<geo::Point> outer_poly;         // meshed domain boundary (convex, CCW)
  double inner_offset = 0.0;                  // of1 used for the inner/outer split
  std::vector<std::string> warnings;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }

  double domain_area() const { return geo::polygon_area(outer_poly); }

  /// Bounding box of the inner domain (hull dilated by inner_offset).
  void inner_bbox(double& xmin, double& xmax, double& ymin, double& ymax) const {
    xmin = ymin = std::numeric_limits<double>::infinity();
    xmax = ymax = -std::numeric_limits<double>::infinity();
    for (const auto& p : hull) {
      xmin = std::min(xmin, p.x() - inner_offset);
      xmax = std::max(xmax, p.x() + inner_offset);
      ymin = std::min(ymin, p.y() - inner_offset);
      ymax = std::max(ymax, p.y() + inner_offset);
    }
  }
};

namespace detail {

// Orientation predicate, > 0 for CCW; |result| below the noise floor is
// treated as collinear by callers.
inline long double orient_ld(const geo::Point& a, const geo::Point& b, const geo::Point& c) {
  return (static_cast<long double>(b.x()) - a.x()) * (static_cast<long double>(c.y()) - a.y()) -
         (static_cast<long double>(b.y()) - a.y()) * (static_cast<long double>(c.x()) - a.x());
}

// magnitude of the orient_ld terms, for relative tolerances
inline long double orient_mag(const geo::Point& a, const geo::Point& b, const geo::Point& c) {
  return std::abs((static_cast<long double>(b.x()) - a.x()) *
                  (static_cast<long double>(c.y()) - a.y())) +
         std::abs((static_cast<long double>(b.y()) - a.y()) *
                  (static_cast<long double>(c.x()) - a.x())) +
         1e-300L;
}

// In-circumcircle predicate for CCW (a,b,c): > 0 iff p strictly inside.
// When mag is supplied it receives the magnitude of the determinant terms,
// for a relative near-cocircular tolerance.
inline long double incircle_ld(const geo::Point& a, const geo::Point& b, const geo::Point& c,
                               const geo::Point& p, long double* mag = nullptr) {
  const long double adx = a.x() - p.x(), ady = a.y() - p.y();
  const long double bdx = b.x() - p.x(), bdy = b.y() - p.y();
  const long double cdx = c.x() - p.x(), cdy = c.y() - p.y();
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  const long double t0 = bdy * cd - bd * cdy;
  const long double t1 = bdx * cd - bd * cdx;
  const long double t2 = bdx * cdy - bdy * cdx;
  if (mag) {
    *mag = std::abs(adx) * (std::abs(bdy * cd) + std::abs(bd * cdy)) +
           std::abs(ady) * (std::abs(bdx * cd) + std::abs(bd * cdx)) +
           ad * (std::abs(bdx * cdy) + std::abs(bdy * cdx));
  }
  return adx * t0 - ady * t1 + ad * t2;
}

inline geo::Point circumcenter(const geo::Point& a, const geo::Point& b, const geo::Point& c) {
  // computed relative to a for stability
  const double bx = b.x() - a.x(), by = b.y() - a.y();
  const double cx = c.x() - a.x(), cy = c.y() - a.y();
  const double d = 2.0 * (bx * cy - by * cx);
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;
  return {a.x() + (cy * b2 - by * c2) / d, a.y() + (bx * c2 - cx * b2) / d};
}

}  // namespace detail

/// Incremental Delaunay triangulation (Bowyer-Watson) over points contained
/// in a caller-supplied bounding region. Exposed separately from build_mesh
/// so the plain triangulation can be tested against a brute-force oracle.
class Delaunay {
 public:
  /// The bounding box must contain every point that will ever be inserted.
  Delaunay(double xmin, double xmax, double ymin, double ymax) {
    const double spanx = xmax - xmin, spany = ymax - ymin;
    const double span = std::max({spanx, spany, 1e-9});
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    const double m = 64.0 * span;
    pts_.emplace_back(cx - m, cy - 0.6 * m);
    pts_.emplace_back(cx + m, cy - 0.6 * m);
    pts_.emplace_back(cx, cy + m);
    tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true});
  }

  int n_points() const { return static_cast<int>(pts_.size()) - 3; }
  const geo::Point& point(int id) const { return pts_[id + 3]; }

  /// Insert a point; returns its vertex id (0-based over inserted points).
  int insert(const geo::Point& p) {
    const int t = locate(p);
    if (t < 0) {
      if (std::getenv("GALE_MESH_DEBUG")) {
        std::fprintf(stderr, "locate failed for (%.17g, %.17g), n_points=%d\n", p.x(), p.y(),
                     n_points());
        double best = 1e300;
        for (int i = 3; i < static_cast<int>(pts_.size()); ++i)
          best = std::min(best, (pts_[i] - p).norm());
        std::fprintf(stderr, "  nearest existing vertex at distance %.3e\n", best);
      }
      throw numeric_error("delaunay: point outside bounding triangle");
    }
    pts_.push_back(p);
    const int pid = static_cast<int>(pts_.size()) - 1;

    // grow the conflict cavity from the containing triangle
    std::vector<char> mark(tris_.size(), 0);
    {
      std::vector<int> stack{t};
      mark[t] = 1;
      while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        for (int k = 0; k < 3; ++k) {
          const int nb = tris_[cur].nb[k];
          if (nb < 0 || mark[nb]) continue;
          if (in_conflict(nb, p)) {
            mark[nb] = 1;
            stack.push_back(nb);
          }
        }
      }
    }

    // Cavity repair: the retriangulation fans p to every cavity-boundary
    // edge, which requires every boundary edge to face p and the cavity to
    // be edge-connected. Repair degenerate conflicts by dropping non-facing
    // members (growing across the containing triangle's own edges instead).
    std::vector<char> forced(tris_.size(), 0);
    forced[t] = 1;
    const int max_repair = static_cast<int>(tris_.size()) + 64;
    for (int guard = 0;; ++guard) {
      if (guard > max_repair) throw numeric_error("delaunay: cavity repair did not converge");
      // connectivity filter from the containing triangle
      std::vector<char> reach(tris_.size(), 0);
      std::vector<int> stack{t};
      reach[t] = 1;
      while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        for (int k = 0; k < 3; ++k) {
          const int nb = tris_[cur].nb[k];
          if (nb < 0 || reach[nb] || !mark[nb]) continue;
          reach[nb] = 1;
          stack.push_back(nb);
        }
      }
      mark = reach;

      bool changed = false;
      for (int cur = 0; cur < static_cast<int>(tris_.size()) && !changed; ++cur) {
        if (!mark[cur]) continue;
        for (int k = 0; k < 3 && !changed; ++k) {
          const int nb = tris_[cur].nb[k];
          if (nb >= 0 && mark[nb]) continue;
          const geo::Point& a = pts_[tris_[cur].v[(k + 1) % 3]];
          const geo::Point& b = pts_[tris_[cur].v[(k + 2) % 3]];
          if (detail::orient_ld(a, b, p) > 1e-13L * detail::orient_mag(a, b, p)) continue;
          if (forced[cur]) {
            // sticky members grow across the offending edge instead of leaving
            if (nb < 0) throw numeric_error("delaunay: degenerate insertion at the outer boundary");
            mark[nb] = 1;
            forced[nb] = 1;
          } else {
            mark[cur] = 0;
          }
          changed = true;
        }
      }
      if (!changed) break;
    }

    std::vector<int> cavity;
    for (int cur = 0; cur < static_cast<int>(tris_.size()); ++cur)
      if (mark[cur]) cavity.push_back(cur);

    // boundary edges of the cavity, as (edge vertices, outside triangle)
    struct BEdge {
      int a, b, outside;
    };
    std::vector<BEdge> boundary;
    for (const int cur : cavity) {
      for (int k = 0; k < 3; ++k) {
        const int nb = tris_[cur].nb[k];
        if (nb >= 0 && mark[nb]) continue;
        boundary.push_back({tris_[cur].v[(k + 1) % 3], tris_[cur].v[(k + 2) % 3], nb});
      }
    }
    for (const int cur : cavity) tris_[cur].alive = false;

    // fan retriangulation; the boundary is a closed CCW loop of directed
    // edges, so each vertex starts exactly one edge and ends exactly one
    std::map<int, int> tri_starting_at, tri_ending_at;
    std::vector<int> created;
    for (const auto& e : boundary) {
      Tri nt;
      nt.v = {pid, e.a, e.b};
      nt.nb = {e.outside, -1, -1};
      nt.alive = true;
      const int id = static_cast<int>(tris_.size());
      tris_.push_back(nt);
      created.push_back(id);
      if (e.outside >= 0) {
        Tri& o = tris_[e.outside];
        for (int k = 0; k < 3; ++k)
          if (o.v[(k + 1) % 3] == e.b && o.v[(k + 2) % 3] == e.a) o.nb[k] = id;
      }
      tri_starting_at[e.a] = id;
      tri_ending_at[e.b] = id;
    }
    for (const int id : created) {
      Tri& nt = tris_[id];
      nt.nb[1] = tri_starting_at.at(nt.v[2]);  // across edge (v[2], pid)
      nt.nb[2] = tri_ending_at.at(nt.v[1]);    // across edge (pid, v[1])
    }
    if (!created.empty()) {
      last_ = created.front();
      for (const int id : created) new_tris_.push_back(id);
    }
    return pid - 3;
  }

  /// Alive triangles not touching the bounding super-vertices.
  std::vector<std::array<int, 3>> triangles() const {
    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] < 3 || t.v[1] < 3 || t.v[2] < 3) continue;
      out.push_back({t.v[0] - 3, t.v[1] - 3, t.v[2] - 3});
    }
    return out;
  }

  /// ids of triangles created by the most recent insertions; cleared on call.
  std::vector<int> take_new_triangles() {
    auto out = new_tris_;
    new_tris_.clear();
    return out;
  }

  struct Tri {
    std::array<int, 3> v;   // vertex ids into pts_ (including 3 super vertices)
    std::array<int, 3> nb;  // neighbor opposite v[k], -1 = none
    bool alive;
  };

  const std::vector<Tri>& raw_triangles() const { return tris_; }
  const std::vector<geo::Point>& raw_points() const { return pts_; }

  bool tri_alive(int id) const { return tris_[id].alive; }
  bool tri_is_real(int id) const {
    const auto& t = tris_[id];
    return t.v[0] >= 3 && t.v[1] >= 3 && t.v[2] >= 3;
  }
  std::array<geo::Point, 3> tri_points(int id) const {
    const auto& t = tris_[id];
    return {pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]]};
  }

 private:
  // Conflict (circumdisk membership) with ghost semantics: triangles touching
  // the bounding super-vertices are treated as if those vertices sat at
  // infinity, so their "circumdisk" is the half-plane beyond their real edge.
  // This keeps hull slivers intact and keeps all determinant arithmetic on
  // well-scaled real coordinates.
  bool in_conflict(int tri, const geo::Point& p) const {
    const auto& t = tris_[tri];
    int n_super = 0;
    int super_k = -1;
    for (int k = 0; k < 3; ++k) {
      if (t.v[k] < 3) {
        ++n_super;
        super_k = k;
      }
    }
    if (n_super == 0) {
      long double mag = 0.0L;
      const long double det =
          detail::incircle_ld(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]], p, &mag);
      if (det > 1e-16L * mag) return true;
      if (det < -1e-16L * mag) return false;
      // numerically on the circumcircle. A point landing on one of the
      // triangle's edges (a boundary-chain midpoint, typically) must conflict
      // or a zero-area sliver would be fanned over that edge.
      for (int k = 0; k < 3; ++k) {
        const geo::Point& u = pts_[t.v[k]];
        const geo::Point& w = pts_[t.v[(k + 1) % 3]];
        if (std::abs(detail::orient_ld(u, w, p)) > 1e-13L * detail::orient_mag(u, w, p)) continue;
        const long double dx = w.x() - u.x(), dy = w.y() - u.y();
        const long double dp = (p.x() - u.x()) * dx + (p.y() - u.y()) * dy;
        if (dp > 0 && dp < dx * dx + dy * dy) return true;
      }
      return false;
    }
    if (n_super == 3) return false;
    if (n_super == 2) {
      // Corner triangle (one real vertex a): as the two super vertices recede
      // to infinity, the circumdisk converges to the half-plane through a
      // whose inward normal bisects the two super directions.
      int real_k = 0;
      for (int k = 0; k < 3; ++k)
        if (t.v[k] >= 3) real_k = k;
      const geo::Point& a = pts_[t.v[real_k]];
      const geo::Point u1 = (pts_[t.v[(real_k + 1) % 3]] - a).normalized();
      const geo::Point u2 = (pts_[t.v[(real_k + 2) % 3]] - a).normalized();
      const geo::Point w = u1 + u2;
      return (p - a).dot(w) > 1e-14 * (p - a).norm() * w.norm();
    }
    const geo::Point& x = pts_[t.v[(super_k + 1) % 3]];
    const geo::Point& y = pts_[t.v[(super_k + 2) % 3]];
    const long double o = detail::orient_ld(x, y, p);
    const long double mag = (std::abs(static_cast<long double>(y.x()) - x.x()) +
                             std::abs(static_cast<long double>(p.x()) - x.x())) *
                                (std::abs(static_cast<long double>(y.y()) - x.y()) +
                                 std::abs(static_cast<long double>(p.y()) - x.y())) +
                            1e-300L;
    if (o > 1e-14L * mag) return true;
    if (o < -1e-14L * mag) return false;
    // p is on the supporting line: conflict only if strictly inside the segment
    const long double dx = y.x() - x.x(), dy = y.y() - x.y();
    const long double dp = (p.x() - x.x()) * dx + (p.y() - x.y()) * dy;
    return dp > 0 && dp < dx * dx + dy * dy;
  }

  int locate(const geo::Point& p) const {
    int cur = last_;
    if (cur < 0 || !tris_[cur].alive) {
      cur = -1;
      for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i)
        if (tris_[i].alive) {
          cur = i;
          break;
        }
    }
    const int max_steps = static_cast<int>(tris_.size()) * 4 + 64;
    int prev = -1;
    for (int step = 0; step < max_steps && cur >= 0; ++step) {
      const auto& t = tris_[cur];
      bool moved = false;
      for (int k = 0; k < 3; ++k) {
        const int nb = t.nb[k];
        if (nb == prev || nb < 0) continue;
        const geo::Point& ea = pts_[t.v[(k + 1) % 3]];
        const geo::Point& eb = pts_[t.v[(k + 2) % 3]];
        if (detail::orient_ld(ea, eb, p) < -1e-14L * detail::orient_mag(ea, eb, p)) {
          prev = cur;
          cur = nb;
          moved = true;
          break;
        }
      }
      if (!moved) return cur;
    }
    // exhaustive fallback (rare walk cycles)
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
      if (!tris_[i].alive) continue;
      const auto& t = tris_[i];
      bool inside = true;
      for (int k = 0; k < 3 && inside; ++k) {
        const geo::Point& ea = pts_[t.v[(k + 1) % 3]];
        const geo::Point& eb = pts_[t.v[(k + 2) % 3]];
        if (detail::orient_ld(ea, eb, p) < -1e-13L * detail::orient_mag(ea, eb, p)) inside = false;
      }
      if (inside) return i;
    }
    return -1;
  }

  std::vector<geo::Point> pts_;
  std::vector<Tri> tris_;
  std::vector<int> new_tris_;
  int last_ = 0;
};

/// Merge locations closer than cutoff (greedy, in lexicographic order), so
/// clusters of jittered observations collapse to single mesh sites.
inline std::vector<geo::Point> cutoff_merge(std::vector<geo::Point> pts, double cutoff) {
  std::sort(pts.begin(), pts.end(), [](const geo::Point& a, const geo::Point& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  std::vector<geo::Point> kept;
  for (const auto& p : pts) {
    bool ok = true;
    for (const auto& q : kept) {
      if ((p - q).norm() < std::max(cutoff, 1e-12)) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(p);
  }
  return kept;
}

namespace detail {

struct Refiner {
  Delaunay& dt;
  const std::vector<geo::Point>& hull;
  const std::vector<geo::Point>& outer_poly;
  double of1, h1, h2, min_angle_rad;

  // boundary segments as vertex-id pairs (ids into dt point numbering)
  std::vector<std::pair<int, int>> segments;

  bool edge_is_inner(const geo::Point& a, const geo::Point& b) const {
    return geo::distance_to_convex(hull, 0.5 * (a + b)) <= of1 + 1e-12;
  }

  bool tri_in_domain(int id) const {
    const auto p = dt.tri_points(id);
    const geo::Point centroid = (p[0] + p[1] + p[2]) / 3.0;
    return geo::point_in_convex(outer_poly, centroid, 1e-9);
  }

  bool tri_bad(int id) const {
    const auto p = dt.tri_points(id);
    for (int k = 0; k < 3; ++k) {
      const geo::Point& a = p[k];
      const geo::Point& b = p[(k + 1) % 3];
      const double len = (b - a).norm();
      const double bound = edge_is_inner(a, b) ? h1 : h2;
      if (len > bound) return true;
    }
    // minimum angle
    for (int k = 0; k < 3; ++k) {
      const geo::Point u = p[(k + 1) % 3] - p[k];
      const geo::Point v = p[(k + 2) % 3] - p[k];
      const double cosang = u.dot(v) / (u.norm() * v.norm());
      const double ang = std::acos(std::clamp(cosang, -1.0, 1.0));
      if (ang < min_angle_rad) return true;
    }
    return false;
  }

  double segment_floor() const { return 1e-3 * std::min(h1, h2); }

  // segment whose diametral circle strictly contains p, or -1
  int encroached_segment(const geo::Point& p) const {
    for (std::size_t s = 0; s < segments.size(); ++s) {
      const geo::Point a = dt.point(segments[s].first);
      const geo::Point b = dt.point(segments[s].second);
      const geo::Point mid = 0.5 * (a + b);
      const double r2 = 0.25 * (b - a).squaredNorm();
      if ((p - mid).squaredNorm() < r2 * (1.0 - 1e-12)) return static_cast<int>(s);
    }
    return -1;
  }

  // boundary segment crossed by the ray from inside point q toward p
  int crossed_segment(const geo::Point& q, const geo::Point& p) const {
    int best = -1;
    double best_t = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < segments.size(); ++s) {
      const geo::Point a = dt.point(segments[s].first);
      const geo::Point b = dt.point(segments[s].second);
      const double d1 = geo::cross(q, p, a);
      const double d2 = geo::cross(q, p, b);
      if (d1 * d2 > 0) continue;  // strictly same side; zero counts as crossing
      const double d3 = geo::cross(a, b, q);
      const double d4 = geo::cross(a, b, p);
      if (d3 * d4 > 0) continue;
      const double t = d3 / (d3 - d4);  // parameter along q->p
      if (t >= 0.0 && t < best_t) {
        best_t = t;
        best = static_cast<int>(s);
      }
    }
    return best;
  }

  // split segment s at its midpoint, then recursively recondition the halves
  void split_segment(int s, std::deque<int>& queue) {
    const auto [ia, ib] = segments[s];
    const geo::Point a = dt.point(ia);
    const geo::Point b = dt.point(ib);
    if ((a - b).norm() < segment_floor()) return;  // give up rather than grind to dust
    const geo::Point mid = 0.5 * (a + b);
    const int im = dt.insert(mid);
    segments[s] = {ia, im};
    segments.push_back({im, static_cast<int>(ib)});
    for (const int id : dt.take_new_triangles()) queue.push_back(id);
    condition_segment(s, queue);
    condition_segment(static_cast<int>(segments.size()) - 1, queue);
  }

  bool segment_needs_split(int s) const {
    const geo::Point a = dt.point(segments[s].first);
    const geo::Point b = dt.point(segments[s].second);
    const double len = (a - b).norm();
    if (len < 2.0 * segment_floor()) return false;
    if (len > (edge_is_inner(a, b) ? h1 : h2)) return true;
    // encroached by an existing vertex?
    const geo::Point mid = 0.5 * (a + b);
    const double r2 = 0.25 * (b - a).squaredNorm();
    for (int v = 0; v < dt.n_points(); ++v) {
      if (v == segments[s].first || v == segments[s].second) continue;
      if ((dt.point(v) - mid).squaredNorm() < r2 * (1.0 - 1e-12)) return true;
    }
    return false;
  }

  void condition_segment(int s, std::deque<int>& queue) {
    if (segment_needs_split(s)) split_segment(s, queue);
  }

  void run(int max_vertices) {
    std::deque<int> queue;

    // phase 1: subdivide boundary segments to the size bound and until no
    // existing vertex encroaches any segment
    bool changed = true;
    while (changed) {
      changed = false;
      for (int s = 0; s < static_cast<int>(segments.size()); ++s) {
        if (segment_needs_split(s)) {
          split_segment(s, queue);
          changed = true;
        }
      }
      if (dt.n_points() > max_vertices)
        throw numeric_error("mesh refinement exceeded the vertex budget; loosen the spec");
    }

    // phase 2: fix oversized and skinny triangles by circumcenter insertion
    queue.clear();
    for (int i = 0; i < static_cast<int>(dt.raw_triangles().size()); ++i) queue.push_back(i);
    while (!queue.empty()) {
      const int id = queue.front();
      queue.pop_front();
      if (!dt.tri_alive(id) || !dt.tri_is_real(id)) continue;
      if (!tri_in_domain(id)) continue;
      if (!tri_bad(id)) continue;
      if (dt.n_points() > max_vertices)
        throw numeric_error("mesh refinement exceeded the vertex budget; loosen the spec");

      const auto p = dt.tri_points(id);
      const geo::Point cc = circumcenter(p[0], p[1], p[2]);
      if (!std::isfinite(cc.x()) || !std::isfinite(cc.y())) continue;

      const bool cc_outside = !geo::point_in_convex(outer_poly, cc, 1e-9);
      int enc = encroached_segment(cc);
      if (enc < 0 && cc_outside) enc = crossed_segment((p[0] + p[1] + p[2]) / 3.0, cc);
      if (enc >= 0) {
        const std::size_t before = segments.size();
        split_segment(enc, queue);
        if (segments.size() > before) {
          queue.push_back(id);  // re-check once progress was made
        } else if (std::getenv("GALE_MESH_DEBUG")) {
          std::fprintf(stderr, "drop: floor-refused split, tri at (%.4f,%.4f)\n",
                       (p[0].x() + p[1].x() + p[2].x()) / 3, (p[0].y() + p[1].y() + p[2].y()) / 3);
        }
        continue;
      }
      if (cc_outside) {
        if (std::getenv("GALE_MESH_DEBUG"))
          std::fprintf(stderr, "drop: cc outside, no crossing, tri at (%.4f,%.4f) cc=(%.4f,%.4f)\n",
                       (p[0].x() + p[1].x() + p[2].x()) / 3, (p[0].y() + p[1].y() + p[2].y()) / 3,
                       cc.x(), cc.y());
        continue;  // no responsible segment found: leave the triangle be
      }
      bool too_close = false;
      for (int k = 0; k < 3; ++k)
        if ((cc - p[k]).norm() < 1e-9 * (h1 + h2)) too_close = true;
      if (too_close) continue;
      if (std::getenv("GALE_MESH_DEBUG") && (cc - p[0]).norm() > 100.0) {
        std::fprintf(stderr,
                     "huge cc (%.3e,%.3e) from tri (%.17g,%.17g) (%.17g,%.17g) (%.17g,%.17g)\n",
                     cc.x(), cc.y(), p[0].x(), p[0].y(), p[1].x(), p[1].y(), p[2].x(), p[2].y());
      }
      dt.insert(cc);
      for (const int t : dt.take_new_triangles()) queue.push_back(t);
    }
  }
};

}  // namespace detail

/// Build the refined triangulation over the given locations: merge by
/// cutoff, extend the convex hull by the two offset rings, then refine until
/// the per-zone edge-length bounds and the minimum-angle bound hold.
inline Mesh build_mesh(const std::vector<geo::Point>& locations, const MeshSpec& spec,
                       int max_vertices = 300000) {
  spec.validate();
  Mesh out;
  if (spec.me1 > spec.me2)
    out.warnings.push_back("me1 > me2: inner mesh coarser than the extension");

  std::vector<geo::Point> merged = cutoff_merge(locations, spec.cutoff);
  if (merged.size() < 3)
    throw data_error("mesh: fewer than 3 distinct locations remain after cutoff merge");
  out.hull = geo::convex_hull(merged);
  if (out.hull.size() < 3) throw data_error("mesh: input locations are collinear");
  out.inner_offset = spec.of1;

  const double h1 = spec.size_factor * spec.me1;
  const double h2 = spec.size_factor * spec.me2;

  // Boundary ring: dilated-polygon vertices only. Straight stretches are
  // left long here; the refiner splits boundary segments as the size bound
  // and encroachment rules demand. Pre-subdividing would insert exactly
  // collinear points, which the incremental triangulation must not see.
  std::vector<geo::Point> ring = geo::dilate_convex(out.hull, spec.of1 + spec.of2, 0.9 * h2);
  out.outer_poly = ring;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& p : ring) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }

  Delaunay dt(xmin, xmax, ymin, ymax);
  detail::Refiner refiner{dt, out.hull, out.outer_poly, spec.of1, h1, h2,
                          spec.min_angle_deg * M_PI / 180.0, {}};
  for (std::size_t i = 0; i < ring.size(); ++i) dt.insert(ring[i]);
  for (std::size_t i = 0; i < ring.size(); ++i)
    refiner.segments.push_back({static_cast<int>(i), static_cast<int>((i + 1) % ring.size())});
  for (const auto& p : merged) dt.insert(p);
  dt.take_new_triangles();

  refiner.run(max_vertices);

  // extract triangles inside the domain; keep vertex insertion order
  const auto& raw = dt.raw_triangles();
  std::vector<int> vmap(dt.n_points(), -1);
  for (const auto& t : raw) {
    if (!t.alive || t.v[0] < 3 || t.v[1] < 3 || t.v[2] < 3) continue;
    const geo::Point centroid =
        (dt.raw_points()[t.v[0]] + dt.raw_points()[t.v[1]] + dt.raw_points()[t.v[2]]) / 3.0;
    if (!geo::point_in_convex(out.outer_poly, centroid, 1e-9)) continue;
    for (int k = 0; k < 3; ++k) vmap[t.v[k] - 3] = 0;
  }
  int next = 0;
  for (int i = 0; i < static_cast<int>(vmap.size()); ++i)
    if (vmap[i] == 0) vmap[i] = next++;
  out.vertices.resize(next);
  out.inner.resize(next);
  for (int i = 0; i < static_cast<int>(vmap.size()); ++i) {
    if (vmap[i] < 0) continue;
    out.vertices[vmap[i]] = dt.point(i);
    out.inner[vmap[i]] =
        geo::distance_to_convex(out.hull, dt.point(i)) <= spec.of1 + 1e-9 ? 1 : 0;
  }
  for (const auto& t : raw) {
    if (!t.alive || t.v[0] < 3 || t.v[1] < 3 || t.v[2] < 3) continue;
    const geo::Point centroid =
        (dt.raw_points()[t.v[0]] + dt.raw_points()[t.v[1]] + dt.raw_points()[t.v[2]]) / 3.0;
    if (!geo::point_in_convex(out.outer_poly, centroid, 1e-9)) continue;
    std::array<int, 3> tri{vmap[t.v[0] - 3], vmap[t.v[1] - 3], vmap[t.v[2] - 3]};
    if (geo::cross(out.vertices[tri[0]], out.vertices[tri[1]], out.vertices[tri[2]]) < 0)
      std::swap(tri[1], tri[2]);
    out.triangles.push_back(tri);
  }
  return out;
}

/// Sparse barycentric interpolation matrix from mesh vertices to locations.
/// Rows for locations outside the mesh are all zero and counted.
struct ProjectorResult {
  SpMat matrix;
  int n_outside = 0;
};

inline ProjectorResult projector(const Mesh& mesh, const std::vector<geo::Point>& locs) {
  ProjectorResult res;
  res.matrix.resize(static_cast<int>(locs.size()), mesh.n_vertices());
  std::vector<Triplet> trips;
  trips.reserve(locs.size() * 3);

  for (std::size_t r = 0; r < locs.size(); ++r) {
    const geo::Point& p = locs[r];
    bool found = false;
    for (std::size_t t = 0; t < mesh.triangles.size() && !found; ++t) {
      const auto& tri = mesh.triangles[t];
      const geo::Point& a = mesh.vertices[tri[0]];
      const geo::Point& b = mesh.vertices[tri[1]];
      const geo::Point& c = mesh.vertices[tri[2]];
      const double det = geo::cross(a, b, c);
      if (det <= 0) continue;
      double w0 = geo::cross(p, b, c) / det;
      double w1 = geo::cross(a, p, c) / det;
      double w2 = 1.0 - w0 - w1;
      const double tol = -1e-10;
      if (w0 < tol || w1 < tol || w2 < tol) continue;
      // snap weights that are numerically zero, keep the row sum exactly one
      std::array<double, 3> w{w0, w1, w2};
      for (auto& x : w)
        if (std::abs(x) < 1e-12) x = 0.0;
      const double s = w[0] + w[1] + w[2];
      int imax = 0;
      for (int k = 1; k < 3; ++k)
        if (w[k] > w[imax]) imax = k;
      w[imax] += 1.0 - s;
      for (int k = 0; k < 3; ++k)
        if (w[k] != 0.0) trips.emplace_back(static_cast<int>(r), tri[k], w[k]);
      found = true;
    }
    if (!found) ++res.n_outside;
  }
  res.matrix.setFromTriplets(trips.begin(), trips.end());
  return res;
}

inline void save_mesh(const Mesh& mesh, const std::string& path) {
  nlohmann::json j;
  auto pts = nlohmann::json::array();
  for (const auto& p : mesh.vertices) pts.push_back({p.x(), p.y()});
  j["vertices"] = std::move(pts);
  auto tris = nlohmann::json::array();
  for (const auto& t : mesh.triangles) tris.push_back({t[0], t[1], t[2]});
  j["triangles"] = std::move(tris);
  j["inner"] = mesh.inner;
  auto hull = nlohmann::json::array();
  for (const auto& p : mesh.hull) hull.push_back({p.x(), p.y()});
  j["hull"] = std::move(hull);
  auto outer = nlohmann::json::array();
  for (const auto& p : mesh.outer_poly) outer.push_back({p.x(), p.y()});
  j["outer_poly"] = std::move(outer);
  j["inner_offset"] = mesh.inner_offset;
  std::ofstream f(path);
  if (!f) throw data_error("cannot write mesh file: " + path);
  f << j.dump(1) << '\n';
}

inline Mesh load_mesh(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw data_error("cannot open mesh file: " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw data_error("malformed mesh file " + path + ": " + e.what());
  }
  Mesh m;
  for (const auto& p : j.at("vertices")) m.vertices.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  for (const auto& t : j.at("triangles"))
    m.triangles.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
  m.inner = j.at("inner").get<std::vector<std::uint8_t>>();
  for (const auto& p : j.at("hull")) m.hull.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  for (const auto& p : j.at("outer_poly"))
    m.outer_poly.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  m.inner_offset = j.at("inner_offset").get<double>();
  if (m.inner.size() != m.vertices.size()) throw data_error("mesh file: inner flag count mismatch");
  return m;
}

}  // namespace gale::mesh
