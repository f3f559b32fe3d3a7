// Spherical Voronoi geometry: platonic-solid cases with known areas and
// adjacency, random clouds, degenerate rejections, CVT behavior, and the
// cache round trip.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "cvt.hpp"
#include "sphere_geometry.hpp"
#include "test_util.hpp"

using namespace fpmorph;

namespace {

constexpr double kSphereArea = 4.0 * std::numbers::pi;

// Girard: spherical polygon area = sum of interior angles - (m - 2) pi.
// Independent of the fan-excess computation used by the library.
double girard_area(const std::vector<Vec3>& poly) {
  const int m = int(poly.size());
  double angles = 0.0;
  for (int k = 0; k < m; ++k) {
    const Vec3& a = poly[std::size_t((k + m - 1) % m)];
    const Vec3& b = poly[std::size_t(k)];
    const Vec3& c = poly[std::size_t((k + 1) % m)];
    const Vec3 ta = normalized(a - b * dot(a, b));
    const Vec3 tc = normalized(c - b * dot(c, b));
    angles += std::acos(std::clamp(dot(ta, tc), -1.0, 1.0));
  }
  return angles - double(m - 2) * std::numbers::pi;
}

}  // namespace

TEST_CASE("octahedron: six congruent quad cells") {
  const auto tess = sphere_voronoi_geometry(testutil::octahedron_points());
  REQUIRE(tess.size() == 6);
  double sum = 0.0;
  for (int i = 0; i < 6; ++i) {
    CHECK(tess.cell_area[std::size_t(i)] ==
          doctest::Approx(kSphereArea / 6.0).epsilon(1e-12));
    CHECK(tess.neighbors[std::size_t(i)].size() == 4);
    sum += tess.cell_area[std::size_t(i)];
    for (int s = 0; s < 4; ++s) {
      // faces are arcs between normalized (+-1,+-1,+-1) corners
      CHECK(tess.face_length[std::size_t(i)][std::size_t(s)] ==
            doctest::Approx(std::acos(1.0 / 3.0)).epsilon(1e-12));
      CHECK(tess.chord_dist[std::size_t(i)][std::size_t(s)] ==
            doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    }
    // opposite cell is never adjacent
    CHECK(tess.neighbor_slot(i, i ^ 1) == -1);
  }
  CHECK(sum == doctest::Approx(kSphereArea).epsilon(1e-13));
}

TEST_CASE("face lengths and chords are symmetric") {
  const auto tess = sphere_voronoi_geometry(testutil::random_sphere_points(40, 5));
  for (int i = 0; i < tess.size(); ++i) {
    for (int s = 0; s < int(tess.neighbors[std::size_t(i)].size()); ++s) {
      const int j = tess.neighbors[std::size_t(i)][std::size_t(s)];
      const int back = tess.neighbor_slot(j, i);
      REQUIRE(back >= 0);
      CHECK(tess.face_length[std::size_t(i)][std::size_t(s)] ==
            tess.face_length[std::size_t(j)][std::size_t(back)]);
      CHECK(tess.chord_dist[std::size_t(i)][std::size_t(s)] ==
            tess.chord_dist[std::size_t(j)][std::size_t(back)]);
    }
  }
}

TEST_CASE("icosahedron: twelve congruent pentagon cells, Girard cross-check") {
  const auto pts = testutil::icosahedron_points();
  const auto tess = sphere_voronoi_geometry(pts);
  REQUIRE(tess.size() == 12);
  for (int i = 0; i < 12; ++i) {
    CHECK(tess.cell_area[std::size_t(i)] ==
          doctest::Approx(kSphereArea / 12.0).epsilon(1e-9));
    CHECK(tess.neighbors[std::size_t(i)].size() == 5);
  }

  // Reconstruct cell 0's pentagon independently: Voronoi vertices are the
  // normalized centroids of the icosahedron faces incident to the generator.
  const Vec3 g = pts[0];
  const double edge = 2.0 / std::sqrt((5.0 + std::sqrt(5.0)) / 2.0);  // unit icosahedron edge
  std::vector<Vec3> corners;
  for (int a = 1; a < 12; ++a) {
    for (int b = a + 1; b < 12; ++b) {
      if (std::abs(norm(pts[std::size_t(a)] - g) - edge) < 1e-9 &&
          std::abs(norm(pts[std::size_t(b)] - g) - edge) < 1e-9 &&
          std::abs(norm(pts[std::size_t(a)] - pts[std::size_t(b)]) - edge) < 1e-9) {
        corners.push_back(normalized(g + pts[std::size_t(a)] + pts[std::size_t(b)]));
      }
    }
  }
  REQUIRE(corners.size() == 5);
  // order the corners around g in its tangent plane
  const Vec3 e1 = normalized(corners[0] - g * dot(corners[0], g));
  const Vec3 e2 = cross(g, e1);
  std::sort(corners.begin(), corners.end(), [&](const Vec3& p, const Vec3& q) {
    return std::atan2(dot(p, e2), dot(p, e1)) < std::atan2(dot(q, e2), dot(q, e1));
  });
  const double area = girard_area(corners);
  CHECK(area == doctest::Approx(kSphereArea / 12.0).epsilon(1e-9));
  CHECK(area == doctest::Approx(tess.cell_area[0]).epsilon(1e-9));
}

TEST_CASE("random clouds partition the sphere") {
  for (std::uint64_t seed : {7ull, 8ull, 9ull}) {
    const auto tess = sphere_voronoi_geometry(testutil::random_sphere_points(50, seed));
    double sum = 0.0;
    for (double a : tess.cell_area) sum += a;
    CHECK(std::abs(sum - kSphereArea) < 1e-9 * kSphereArea);
    CHECK(tess.connected());
    CHECK_NOTHROW(tess.validate());
  }
}

TEST_CASE("hemisphere-confined points still tessellate the whole sphere") {
  // all generators near the north pole; the cell of the outermost point
  // wraps far beyond the hemisphere
  std::vector<Vec3> pts = {{0.1, 0.0, 1.0},
                           {-0.1, 0.05, 1.0},
                           {0.0, -0.1, 1.0},
                           {0.3, 0.3, 1.0},
                           {-0.2, -0.25, 1.0}};
  for (auto& p : pts) p = normalized(p);
  const auto tess = sphere_voronoi_geometry(pts);
  double sum = 0.0;
  for (double a : tess.cell_area) sum += a;
  CHECK(std::abs(sum - kSphereArea) < 1e-9 * kSphereArea);
  CHECK_NOTHROW(tess.validate());
}

TEST_CASE("degenerate configurations are rejected") {
  CHECK_THROWS_AS(sphere_voronoi_geometry({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}),
                  std::invalid_argument);
  // duplicate point
  CHECK_THROWS_AS(
      sphere_voronoi_geometry({{1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, -1}}),
      std::invalid_argument);
  // four points on one great circle: flat hull
  CHECK_THROWS_AS(sphere_voronoi_geometry({{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}}),
                  std::invalid_argument);
  // off-sphere input
  CHECK_THROWS_AS(sphere_voronoi_geometry({{2, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, -1}}),
                  std::invalid_argument);
}

TEST_CASE("cvt_sphere: four points relax toward a regular tetrahedron") {
  const auto tess = cvt_sphere(4, 200, 12345);
  REQUIRE(tess.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(tess.cell_area[std::size_t(i)] - std::numbers::pi) < 0.05 * std::numbers::pi);
  }
}

TEST_CASE("cvt_sphere: Lloyd iterations shrink the cell-area spread on average") {
  double before = 0.0, after = 0.0;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    before += cvt_sphere(64, 0, seed).area_stddev();
    after += cvt_sphere(64, 30, seed).area_stddev();
  }
  CHECK(after < before);
}

TEST_CASE("cvt_sphere is deterministic for a fixed seed") {
  const auto a = cvt_sphere(32, 10, 99);
  const auto b = cvt_sphere(32, 10, 99);
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a.points[std::size_t(i)].x == b.points[std::size_t(i)].x);
    CHECK(a.points[std::size_t(i)].y == b.points[std::size_t(i)].y);
    CHECK(a.points[std::size_t(i)].z == b.points[std::size_t(i)].z);
    CHECK(a.cell_area[std::size_t(i)] == b.cell_area[std::size_t(i)]);
  }
  CHECK_THROWS_AS(cvt_sphere(3, 10, 1), std::invalid_argument);
}

TEST_CASE("tessellation cache round-trips bit-faithfully") {
  const auto tess = cvt_sphere(48, 15, 4242);
  const std::string path = (std::filesystem::temp_directory_path() / "fpm_tess_test.txt").string();
  save_tessellation(tess, path);
  const auto loaded = load_tessellation(path);
  std::remove(path.c_str());

  REQUIRE(loaded.size() == tess.size());
  CHECK(loaded.seed == tess.seed);
  CHECK(loaded.cvt_iterations == tess.cvt_iterations);
  for (int i = 0; i < tess.size(); ++i) {
    CHECK(loaded.points[std::size_t(i)].x == tess.points[std::size_t(i)].x);
    CHECK(loaded.points[std::size_t(i)].y == tess.points[std::size_t(i)].y);
    CHECK(loaded.points[std::size_t(i)].z == tess.points[std::size_t(i)].z);
    CHECK(loaded.cell_area[std::size_t(i)] == tess.cell_area[std::size_t(i)]);
    REQUIRE(loaded.neighbors[std::size_t(i)] == tess.neighbors[std::size_t(i)]);
    for (std::size_t s = 0; s < tess.neighbors[std::size_t(i)].size(); ++s) {
      CHECK(loaded.face_length[std::size_t(i)][s] == tess.face_length[std::size_t(i)][s]);
      CHECK(loaded.chord_dist[std::size_t(i)][s] == tess.chord_dist[std::size_t(i)][s]);
    }
  }

  CHECK_THROWS_AS(load_tessellation("/nonexistent/path/tess.txt"), std::runtime_error);
}
