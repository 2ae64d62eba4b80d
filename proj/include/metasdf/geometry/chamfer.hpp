#pragma once

#include "metasdf/geometry/surface_sampling.hpp"

namespace metasdf::geom {

// Symmetric mean squared nearest-neighbor distance:
//   mean_a min_b |a-b|^2 + mean_b min_a |b-a|^2.
double chamfer(const std::vector<Point3>& a, const std::vector<Point3>& b);

// Reference implementation, O(|a| * |b|); the accelerated path above must
// match it exactly.
double chamfer_brute_force(const std::vector<Point3>& a, const std::vector<Point3>& b);

}  // namespace metasdf::geom
