#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "metasdf/common/error.hpp"

namespace metasdf::data {

// Signed distances sampled at cell centers of a regular lattice over
// [-1, 1]^d. Negative strictly inside the shape. Storage is row-major with
// res = (H, W) for 2D (index y*W + x) or (D, H, W) for 3D
// (index (z*H + y)*W + x); a point (x, y[, z]) maps x to the last axis.
struct SdfGrid {
  std::vector<int> res;
  std::vector<double> values;

  int dim() const { return static_cast<int>(res.size()); }
  std::int64_t cell_count() const;

  // Cell width along an axis of the point coordinate order (x first).
  double cell_width_axis(int point_axis) const;
  double max_cell_width() const;

  // Center coordinate of cell index i along a point axis.
  double center_coord(int point_axis, int index) const;

  double at2(int y, int x) const { return values[static_cast<std::size_t>(y) * res[1] + x]; }
  double at3(int z, int y, int x) const {
    return values[(static_cast<std::size_t>(z) * res[1] + y) * res[2] + x];
  }

  // Multilinear interpolation between cell centers; clamped at the border.
  double interpolate(std::span<const double> point) const;

  void validate() const;
};

struct EikonalStats {
  double fraction_ok = 0.0;
  std::int64_t checked = 0;
};

// Central-difference |grad| over cells farther than margin_cells cell widths
// from the zero level; reports the fraction inside [lo, hi].
EikonalStats eikonal_stats(const SdfGrid& grid, double lo = 0.8, double hi = 1.2,
                           double margin_cells = 2.0);

}  // namespace metasdf::data
