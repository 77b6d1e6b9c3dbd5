#include <catch2/catch_amalgamated.hpp>
#include <map>
#include <set>

#include "gale/ingest.hpp"
#include "gale/mesh.hpp"
#include "gale/rng.hpp"
#include "oracles.hpp"

using gale::geo::Point;
using namespace gale::mesh;

namespace {

std::vector<Point> station_points() {
  std::vector<Point> pts;
  for (const auto& [id, st] : gale::ingest::default_station_table())
    pts.emplace_back(st.longitude, st.latitude);
  return pts;
}

// brute-force empty-circumcircle check over every (triangle, point) pair
bool delaunay_valid(const std::vector<Point>& pts, const std::vector<std::array<int, 3>>& tris) {
  for (const auto& t : tris) {
    const Point &a = pts[t[0]], &b = pts[t[1]], &c = pts[t[2]];
    const double orient = gale::geo::cross(a, b, c);
    if (orient <= 0) return false;  // degenerate or misoriented
    for (std::size_t p = 0; p < pts.size(); ++p) {
      if (static_cast<int>(p) == t[0] || static_cast<int>(p) == t[1] || static_cast<int>(p) == t[2])
        continue;
      long double mag = 0;
      const long double det = gale::mesh::detail::incircle_ld(a, b, c, pts[p], &mag);
      if (det > 1e-12L * mag) return false;  // strictly inside someone's circumcircle
    }
  }
  return true;
}

std::map<std::pair<int, int>, int> edge_use_counts(const std::vector<std::array<int, 3>>& tris) {
  std::map<std::pair<int, int>, int> cnt;
  for (const auto& t : tris) {
    for (int k = 0; k < 3; ++k) {
      int u = t[k], v = t[(k + 1) % 3];
      if (u > v) std::swap(u, v);
      ++cnt[{u, v}];
    }
  }
  return cnt;
}

}  // namespace

TEST_CASE("delaunay of the unit-square corners", "[mesh]") {
  Delaunay dt(0, 1, 0, 1);
  dt.insert({0, 0});
  dt.insert({1, 0});
  dt.insert({1, 1});
  dt.insert({0, 1});
  const auto tris = dt.triangles();
  REQUIRE(dt.n_points() == 4);
  REQUIRE(tris.size() == 2);
  std::vector<Point> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  REQUIRE(delaunay_valid(pts, tris));
  double area = 0;
  for (const auto& t : tris) area += gale::geo::triangle_area(pts[t[0]], pts[t[1]], pts[t[2]]);
  REQUIRE(area == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("delaunay empty-circle property on random points", "[mesh]") {
  gale::Rng rng(2024);
  std::vector<Point> pts;
  for (int i = 0; i < 200; ++i) pts.emplace_back(rng.uniform() * 10.0, rng.uniform() * 5.0);
  Delaunay dt(0, 10, 0, 5);
  for (const auto& p : pts) dt.insert(p);
  const auto tris = dt.triangles();
  REQUIRE(delaunay_valid(pts, tris));

  // Euler: triangles = 2n - 2 - hull_size for a triangulated convex region
  const auto hull = gale::geo::convex_hull(pts);
  REQUIRE(static_cast<int>(tris.size()) == 2 * 200 - 2 - static_cast<int>(hull.size()));

  double area = 0;
  for (const auto& t : tris) area += gale::geo::triangle_area(pts[t[0]], pts[t[1]], pts[t[2]]);
  REQUIRE(area == Catch::Approx(gale::geo::polygon_area(hull)).epsilon(1e-10));
}

TEST_CASE("cutoff merging", "[mesh]") {
  std::vector<Point> pts{{0, 0}, {0, 0}, {1e-4, 0}, {2, 0}, {0, 2}};
  const auto merged = cutoff_merge(pts, 0.01);
  REQUIRE(merged.size() == 3);
  const auto nomerge = cutoff_merge(pts, 0.0);  // exact duplicates still collapse
  REQUIRE(nomerge.size() == 4);
}

TEST_CASE("build_mesh rejects degenerate inputs", "[mesh]") {
  MeshSpec spec;
  spec.me1 = spec.me2 = 0.5;
  spec.of1 = spec.of2 = 0.2;
  std::vector<Point> line{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  REQUIRE_THROWS_AS(build_mesh(line, spec), gale::data_error);
  std::vector<Point> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  spec.cutoff = 10.0;  // swallows the whole domain
  REQUIRE_THROWS_AS(build_mesh(square, spec), gale::data_error);
}

TEST_CASE("refined mesh honors structural invariants", "[mesh]") {
  MeshSpec spec;
  spec.me1 = spec.me2 = 0.55;
  spec.of1 = spec.of2 = 0.15;
  spec.cutoff = 0.55;
  const auto mesh = build_mesh(station_points(), spec);

  REQUIRE(mesh.n_vertices() > 100);
  REQUIRE(mesh.inner.size() == mesh.vertices.size());

  // positive areas, and per-zone edge-length bounds
  double area_sum = 0.0;
  for (const auto& t : mesh.triangles) {
    const Point &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]], &c = mesh.vertices[t[2]];
    const double ar = gale::geo::triangle_area(a, b, c);
    REQUIRE(ar > 0.0);
    area_sum += ar;
    for (int k = 0; k < 3; ++k) {
      const Point& u = mesh.vertices[t[k]];
      const Point& v = mesh.vertices[t[(k + 1) % 3]];
      const double len = (u - v).norm();
      const bool is_inner =
          gale::geo::distance_to_convex(mesh.hull, 0.5 * (u + v)) <= spec.of1 + 1e-12;
      REQUIRE(len <= (is_inner ? spec.me1 : spec.me2) + 1e-12);
    }
  }
  // triangles tile the offset polygon exactly
  REQUIRE(area_sum == Catch::Approx(mesh.domain_area()).epsilon(1e-8));

  // edge-conforming: every edge is shared by at most two triangles
  for (const auto& [edge, uses] : edge_use_counts(mesh.triangles)) REQUIRE(uses <= 2);

  // both zones are present
  int n_inner = 0;
  for (const auto f : mesh.inner) n_inner += f;
  REQUIRE(n_inner > 0);
  REQUIRE(n_inner < mesh.n_vertices());
}

TEST_CASE("refining the spec never loses vertices", "[mesh]") {
  const auto pts = station_points();
  int prev = 0;
  for (const double me : {1.2, 0.9, 0.7}) {
    MeshSpec spec;
    spec.me1 = spec.me2 = me;
    spec.of1 = spec.of2 = 0.15;
    spec.cutoff = me;
    const auto mesh = build_mesh(pts, spec);
    REQUIRE(mesh.n_vertices() >= prev);
    prev = mesh.n_vertices();
  }
}

TEST_CASE("mesh vertex count tracks the reference density", "[mesh][calibration]") {
  MeshSpec spec;
  spec.me1 = spec.me2 = 0.55;
  spec.of1 = spec.of2 = 0.15;
  spec.cutoff = 0.55;
  const auto mesh = build_mesh(station_points(), spec);
  REQUIRE(mesh.n_vertices() > 2194 * 0.7);
  REQUIRE(mesh.n_vertices() < 2194 * 1.3);
}

TEST_CASE("meshes are reproducible bit for bit", "[mesh]") {
  MeshSpec spec;
  spec.me1 = spec.me2 = 0.9;
  spec.of1 = spec.of2 = 0.15;
  spec.cutoff = 0.9;
  const auto a = build_mesh(station_points(), spec);
  const auto b = build_mesh(station_points(), spec);
  REQUIRE(a.n_vertices() == b.n_vertices());
  for (int i = 0; i < a.n_vertices(); ++i) {
    REQUIRE(a.vertices[i].x() == b.vertices[i].x());
    REQUIRE(a.vertices[i].y() == b.vertices[i].y());
  }
  REQUIRE(a.triangles == b.triangles);
}

TEST_CASE("projector barycentric weights", "[mesh]") {
  MeshSpec spec;
  spec.me1 = spec.me2 = 0.9;
  spec.of1 = spec.of2 = 0.15;
  spec.cutoff = 0.9;
  const auto mesh = build_mesh(station_points(), spec);

  SECTION("a location at a mesh vertex gets a single unit weight") {
    const int vid = mesh.n_vertices() / 2;
    const auto res = projector(mesh, {mesh.vertices[vid]});
    REQUIRE(res.n_outside == 0);
    REQUIRE(res.matrix.nonZeros() == 1);
    REQUIRE(res.matrix.coeff(0, vid) == 1.0);
  }

  SECTION("a location at a triangle centroid gets three equal weights") {
    const auto& t = mesh.triangles[mesh.triangles.size() / 2];
    const Point centroid =
        (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
    const auto res = projector(mesh, {centroid});
    REQUIRE(res.matrix.nonZeros() == 3);
    for (int k = 0; k < 3; ++k)
      REQUIRE(res.matrix.coeff(0, t[k]) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
  }

  SECTION("interior points are reproduced as convex combinations") {
    gale::Rng rng(7);
    std::vector<Point> locs;
    double xmin, xmax, ymin, ymax;
    mesh.inner_bbox(xmin, xmax, ymin, ymax);
    while (locs.size() < 50) {
      Point p(xmin + rng.uniform() * (xmax - xmin), ymin + rng.uniform() * (ymax - ymin));
      if (gale::geo::distance_to_convex(mesh.hull, p) == 0.0) locs.push_back(p);
    }
    const auto res = projector(mesh, locs);
    REQUIRE(res.n_outside == 0);
    const Eigen::MatrixXd dense = res.matrix;
    for (int r = 0; r < static_cast<int>(locs.size()); ++r) {
      REQUIRE(dense.row(r).sum() == Catch::Approx(1.0).margin(1e-12));
      Point recon(0, 0);
      int nnz = 0;
      for (int c = 0; c < dense.cols(); ++c) {
        if (dense(r, c) == 0.0) continue;
        ++nnz;
        recon += dense(r, c) * mesh.vertices[c];
      }
      REQUIRE(nnz <= 3);
      REQUIRE((recon - locs[r]).norm() < 1e-12);
    }
  }

  SECTION("outside locations produce zero rows") {
    const auto res = projector(mesh, {Point(1000.0, 1000.0)});
    REQUIRE(res.n_outside == 1);
    REQUIRE(res.matrix.nonZeros() == 0);
  }
}

TEST_CASE("mesh json round trip", "[mesh]") {
  MeshSpec spec;
  spec.me1 = spec.me2 = 1.0;
  spec.of1 = spec.of2 = 0.2;
  spec.cutoff = 0.9;
  const auto mesh = build_mesh(station_points(), spec);
  const std::string path = "/tmp/gale_test_mesh.json";
  save_mesh(mesh, path);
  const auto back = load_mesh(path);
  REQUIRE(back.n_vertices() == mesh.n_vertices());
  REQUIRE(back.triangles == mesh.triangles);
  REQUIRE(back.inner == mesh.inner);
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    REQUIRE(back.vertices[i].x() == mesh.vertices[i].x());
    REQUIRE(back.vertices[i].y() == mesh.vertices[i].y());
  }
}
