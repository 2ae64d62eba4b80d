#include "metasdf/geometry/chamfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

namespace metasdf::geom {

namespace {

double dist_sq(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

// Uniform-grid nearest-neighbor index. Exact: expanding Chebyshev shells with
// a one-shell slack in the stopping bound, so the returned minimum equals the
// brute-force minimum bit for bit.
class NnGrid {
 public:
  explicit NnGrid(const std::vector<Point3>& points) : points_(points) {
    for (int a = 0; a < 3; ++a) {
      lo_[a] = std::numeric_limits<double>::infinity();
      hi_[a] = -std::numeric_limits<double>::infinity();
    }
    for (const auto& p : points) {
      for (int a = 0; a < 3; ++a) {
        lo_[a] = std::min(lo_[a], p[a]);
        hi_[a] = std::max(hi_[a], p[a]);
      }
    }
    double max_extent = 0.0;
    for (int a = 0; a < 3; ++a) max_extent = std::max(max_extent, hi_[a] - lo_[a]);
    const int k = std::max<int>(1, static_cast<int>(std::cbrt(static_cast<double>(points.size()))));
    cell_ = max_extent > 0.0 ? max_extent / k : 1.0;
    for (int a = 0; a < 3; ++a) {
      count_[a] = std::max<std::int64_t>(
          1, static_cast<std::int64_t>(std::floor((hi_[a] - lo_[a]) / cell_)) + 1);
    }
    for (int i = 0; i < static_cast<int>(points.size()); ++i) {
      cells_[key_of(cell_index(points[i]))].push_back(i);
    }
    max_shell_ = static_cast<int>(*std::max_element(count_, count_ + 3));
  }

  double nearest_sq(const Point3& q) const {
    const auto base = cell_index(q);
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0;; ++r) {
      if (r > 1 && best <= square(cell_ * (r - 1))) break;
      if (r > max_shell_) break;
      bool any_cell = false;
      visit_shell(base, r, [&](const std::array<std::int64_t, 3>& c) {
        any_cell = true;
        auto it = cells_.find(key_of(c));
        if (it == cells_.end()) return;
        for (int i : it->second) best = std::min(best, dist_sq(q, points_[i]));
      });
      if (!any_cell && best < std::numeric_limits<double>::infinity()) break;
    }
    return best;
  }

 private:
  static double square(double v) { return v * v; }

  std::array<std::int64_t, 3> cell_index(const Point3& p) const {
    std::array<std::int64_t, 3> c;
    for (int a = 0; a < 3; ++a) {
      auto i = static_cast<std::int64_t>(std::floor((p[a] - lo_[a]) / cell_));
      c[a] = std::clamp<std::int64_t>(i, 0, count_[a] - 1);
    }
    return c;
  }

  std::uint64_t key_of(const std::array<std::int64_t, 3>& c) const {
    return (static_cast<std::uint64_t>(c[2]) * static_cast<std::uint64_t>(count_[1]) +
            static_cast<std::uint64_t>(c[1])) *
               static_cast<std::uint64_t>(count_[0]) +
           static_cast<std::uint64_t>(c[0]);
  }

  template <typename F>
  void visit_shell(const std::array<std::int64_t, 3>& base, int r, F&& f) const {
    const std::int64_t x0 = base[0] - r, x1 = base[0] + r;
    const std::int64_t y0 = base[1] - r, y1 = base[1] + r;
    const std::int64_t z0 = base[2] - r, z1 = base[2] + r;
    for (std::int64_t z = z0; z <= z1; ++z) {
      if (z < 0 || z >= count_[2]) continue;
      for (std::int64_t y = y0; y <= y1; ++y) {
        if (y < 0 || y >= count_[1]) continue;
        for (std::int64_t x = x0; x <= x1; ++x) {
          if (x < 0 || x >= count_[0]) continue;
          const bool on_shell = (z == z0 || z == z1) || (y == y0 || y == y1) ||
                                (x == x0 || x == x1);
          if (!on_shell) continue;
          f(std::array<std::int64_t, 3>{x, y, z});
        }
      }
    }
  }

  const std::vector<Point3>& points_;
  double lo_[3], hi_[3];
  double cell_ = 1.0;
  std::int64_t count_[3] = {1, 1, 1};
  int max_shell_ = 1;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

double one_sided(const std::vector<Point3>& from, const NnGrid& to_index) {
  double acc = 0.0;
  for (const auto& p : from) acc += to_index.nearest_sq(p);
  return acc / static_cast<double>(from.size());
}

double one_sided_brute(const std::vector<Point3>& from, const std::vector<Point3>& to) {
  double acc = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) best = std::min(best, dist_sq(p, q));
    acc += best;
  }
  return acc / static_cast<double>(from.size());
}

void require_nonempty(const std::vector<Point3>& a, const std::vector<Point3>& b) {
  if (a.empty() || b.empty()) throw Error("chamfer: point sets must be nonempty");
}

}  // namespace

double chamfer(const std::vector<Point3>& a, const std::vector<Point3>& b) {
  require_nonempty(a, b);
  NnGrid ga(a), gb(b);
  return one_sided(a, gb) + one_sided(b, ga);
}

double chamfer_brute_force(const std::vector<Point3>& a, const std::vector<Point3>& b) {
  require_nonempty(a, b);
  return one_sided_brute(a, b) + one_sided_brute(b, a);
}

}  // namespace metasdf::geom
