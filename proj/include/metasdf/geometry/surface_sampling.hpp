#pragma once

#include "metasdf/geometry/contour.hpp"
#include "metasdf/geometry/mesh.hpp"

namespace metasdf::geom {

using Point3 = std::array<double, 3>;

// n points uniform by arc length; z = 0. Deterministic per seed.
std::vector<Point3> sample_surface(const Contour& contour, int n, std::uint64_t seed);

// n points uniform by triangle area. Deterministic per seed.
std::vector<Point3> sample_surface(const Mesh& mesh, int n, std::uint64_t seed);

}  // namespace metasdf::geom
