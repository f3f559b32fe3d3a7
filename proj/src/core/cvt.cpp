#include "cvt.hpp"

#include <stdexcept>

#include "rng.hpp"

namespace fpmorph {

SphereTessellation cvt_sphere(int n, int iterations, std::uint64_t seed) {
  if (n < 4) throw std::invalid_argument("cvt_sphere needs at least 4 points");
  if (iterations < 0) throw std::invalid_argument("iteration count must be non-negative");

  Rng rng(seed);
  std::vector<Vec3> points(static_cast<std::size_t>(n));
  for (auto& p : points) {
    double len = 0.0;
    do {
      p = {rng.gaussian(), rng.gaussian(), rng.gaussian()};
      len = norm(p);
    } while (len < 1e-6);
    p = p / len;
  }

  std::vector<Vec3> centroids;
  for (int it = 0; it < iterations; ++it) {
    sphere_voronoi_geometry(points, &centroids);
    points.swap(centroids);
  }

  SphereTessellation tess = sphere_voronoi_geometry(std::move(points));
  tess.seed = seed;
  tess.cvt_iterations = iterations;
  return tess;
}

}  // namespace fpmorph
