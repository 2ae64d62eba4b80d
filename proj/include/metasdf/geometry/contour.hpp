#pragma once

#include <array>
#include <vector>

#include "metasdf/sdfdata/grid.hpp"

namespace metasdf::geom {

struct Polyline {
  std::vector<std::array<double, 2>> points;  // (x, y)
  bool closed = false;                        // closed loops repeat the first point last
  double length() const;
};

struct Contour {
  std::vector<Polyline> polylines;
  bool empty() const { return polylines.empty(); }
  double total_length() const;
  std::size_t point_count() const;
};

// 2D zero crossing extraction on cell-center lattices. Crossings are linearly
// interpolated; the two ambiguous saddle cases are resolved by sampling the
// cell center (average of the four corners).
Contour marching_squares(const data::SdfGrid& grid, double iso = 0.0);

}  // namespace metasdf::geom
