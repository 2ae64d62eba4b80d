#pragma once

#include <array>
#include <vector>

#include "metasdf/sdfdata/grid.hpp"

namespace metasdf::geom {

struct Mesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<int, 3>> triangles;
  bool empty() const { return triangles.empty(); }
  double total_area() const;
};

// 3D zero crossing extraction. A 256-case lookup (built once from the cube
// face topology; ambiguous faces use a fixed inside-corners-disconnected
// pairing so adjacent cells always agree) with interpolated edge vertices.
// Triangles are oriented outward (normal agrees with the value gradient).
// Watertight on sign-consistent grids except where the surface crosses the
// domain boundary.
Mesh marching_cubes(const data::SdfGrid& grid, double iso = 0.0);

}  // namespace metasdf::geom
