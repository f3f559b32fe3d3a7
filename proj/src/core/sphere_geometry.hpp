#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vec3.hpp"

namespace fpmorph {

// Voronoi tessellation of the unit sphere induced by a point cloud.
//
// Geodesic-distance Voronoi cells on the sphere are spherical polygons cut
// by great circles, and their combinatorics are dual to the convex hull of
// the generators: hull triangles map to Voronoi vertices (the outward unit
// face normals, which are equidistant from the triangle's generators) and
// hull edges map to Voronoi edges. Cell areas come from fanning the cell
// polygon around its generator (cells are geodesically star-shaped about
// their generator) and summing signed spherical-triangle excesses.
//
// neighbors[i] lists the adjacent cells in cyclic order around cell i;
// face_length[i][s] / chord_dist[i][s] are parallel to neighbors[i] and hold
// the geodesic length of the shared Voronoi edge and the Euclidean distance
// between the two generators.
struct SphereTessellation {
  std::vector<Vec3> points;  // unit generators
  std::vector<double> cell_area;
  std::vector<std::vector<int>> neighbors;
  std::vector<std::vector<double>> face_length;
  std::vector<std::vector<double>> chord_dist;

  // Provenance, carried through the cache file.
  std::uint64_t seed = 0;
  int cvt_iterations = 0;

  int size() const { return int(points.size()); }
  int neighbor_slot(int i, int j) const;  // index of j in neighbors[i], -1 if absent
  double area_stddev() const;
  bool connected() const;
  void validate() const;  // throws std::invalid_argument on any broken invariant
};

// Builds the full tessellation. Throws on degenerate input: fewer than 4
// points, coincident points, or configurations whose hull collapses
// (e.g. all points on one great circle). If lloyd_centroids is non-null it
// receives the re-projected area-weighted cell centroids.
SphereTessellation sphere_voronoi_geometry(std::vector<Vec3> points,
                                           std::vector<Vec3>* lloyd_centroids = nullptr);

// Cache file round-trip. Coordinates and derived quantities are written as
// hex floats, so a load reproduces the saved tessellation bit for bit.
void save_tessellation(const SphereTessellation& tess, const std::string& path);
SphereTessellation load_tessellation(const std::string& path);

namespace detail {

struct HullFace {
  int a, b, c;  // CCW when viewed from outside
};

// Incremental convex hull of points in convex position (all on the unit
// sphere). Every input point must end up a hull vertex; anything else means
// coincident or coplanar-degenerate input, which is reported as an error.
std::vector<HullFace> convex_hull_unit_points(const std::vector<Vec3>& pts);

}  // namespace detail

}  // namespace fpmorph
