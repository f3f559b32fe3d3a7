#pragma once

#include <cstdint>

#include "sphere_geometry.hpp"

namespace fpmorph {

// Seeded uniform sample of n points on the unit sphere followed by Lloyd
// iterations (move each generator to its cell's re-projected area-weighted
// centroid). Returns the full tessellation geometry of the final points.
SphereTessellation cvt_sphere(int n, int iterations, std::uint64_t seed);

}  // namespace fpmorph
