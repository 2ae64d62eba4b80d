#include "metasdf/geometry/contour.hpp"

#include <cmath>
#include <map>

namespace metasdf::geom {

double Polyline::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    len += std::hypot(points[i][0] - points[i - 1][0], points[i][1] - points[i - 1][1]);
  }
  return len;
}

double Contour::total_length() const {
  double len = 0.0;
  for (const auto& p : polylines) len += p.length();
  return len;
}

std::size_t Contour::point_count() const {
  std::size_t n = 0;
  for (const auto& p : polylines) n += p.points.size();
  return n;
}

namespace {

// A crossing lives on a lattice edge between adjacent cell centers.
// axis 0: horizontal edge (x, y)-(x+1, y); axis 1: vertical edge (x, y)-(x, y+1).
struct EdgeKey {
  int axis, x, y;
  auto operator<=>(const EdgeKey&) const = default;
};

struct Segment {
  EdgeKey a, b;
};

}  // namespace

Contour marching_squares(const data::SdfGrid& grid, double iso) {
  grid.validate();
  if (grid.dim() != 2) throw Error("marching_squares: expected a 2D grid");
  const int h = grid.res[0], w = grid.res[1];

  auto inside = [&](int y, int x) { return grid.at2(y, x) < iso; };
  auto lerp_point = [&](const EdgeKey& e) -> std::array<double, 2> {
    const double v0 = grid.at2(e.y, e.x);
    const int x1 = e.axis == 0 ? e.x + 1 : e.x;
    const int y1 = e.axis == 0 ? e.y : e.y + 1;
    const double v1 = grid.at2(y1, x1);
    const double t = (iso - v0) / (v1 - v0);
    const double x0c = grid.center_coord(0, e.x), y0c = grid.center_coord(1, e.y);
    const double x1c = grid.center_coord(0, x1), y1c = grid.center_coord(1, y1);
    return {x0c + t * (x1c - x0c), y0c + t * (y1c - y0c)};
  };

  std::vector<Segment> segments;
  for (int y = 0; y + 1 < h; ++y) {
    for (int x = 0; x + 1 < w; ++x) {
      // Corners a(x,y) b(x+1,y) c(x+1,y+1) d(x,y+1); edges in cyclic order.
      const bool ia = inside(y, x), ib = inside(y, x + 1), ic = inside(y + 1, x + 1),
                 id = inside(y + 1, x);
      const EdgeKey ab{0, x, y}, bc{1, x + 1, y}, dc{0, x, y + 1}, ad{1, x, y};
      std::vector<EdgeKey> crossed;
      if (ia != ib) crossed.push_back(ab);
      if (ib != ic) crossed.push_back(bc);
      if (id != ic) crossed.push_back(dc);
      if (ia != id) crossed.push_back(ad);
      if (crossed.empty()) continue;
      if (crossed.size() == 2) {
        segments.push_back({crossed[0], crossed[1]});
      } else {
        // Saddle: a and c share a sign, b and d share the other. The cell
        // center decides which diagonal stays connected.
        const double center =
            0.25 * (grid.at2(y, x) + grid.at2(y, x + 1) + grid.at2(y + 1, x + 1) +
                    grid.at2(y + 1, x));
        const bool center_matches_a = (center < iso) == ia;
        if (center_matches_a) {
          // a-c connected: boundary wraps around b and around d.
          segments.push_back({ab, bc});
          segments.push_back({dc, ad});
        } else {
          segments.push_back({ab, ad});
          segments.push_back({bc, dc});
        }
      }
    }
  }

  // Stitch segments into chains; every edge key touches at most two segments.
  std::map<EdgeKey, std::vector<int>> incident;
  for (int i = 0; i < static_cast<int>(segments.size()); ++i) {
    incident[segments[i].a].push_back(i);
    incident[segments[i].b].push_back(i);
  }

  Contour contour;
  std::vector<bool> used(segments.size(), false);
  for (int start = 0; start < static_cast<int>(segments.size()); ++start) {
    if (used[start]) continue;
    // Walk in both directions from the starting segment.
    std::vector<EdgeKey> chain{segments[start].a, segments[start].b};
    used[start] = true;
    for (int dir = 0; dir < 2; ++dir) {
      for (;;) {
        const EdgeKey tip = dir == 0 ? chain.back() : chain.front();
        int next = -1;
        for (int cand : incident[tip]) {
          if (!used[cand]) next = cand;
        }
        if (next < 0) break;
        used[next] = true;
        const EdgeKey other = segments[next].a == tip ? segments[next].b : segments[next].a;
        if (dir == 0) {
          chain.push_back(other);
        } else {
          chain.insert(chain.begin(), other);
        }
      }
    }
    Polyline line;
    line.closed = chain.front() == chain.back() && chain.size() > 2;
    if (!line.closed && chain.size() > 2) {
      // A loop may close between the two walk tips.
      for (int cand : incident[chain.front()]) {
        const EdgeKey other = segments[cand].a == chain.front() ? segments[cand].b
                                                                : segments[cand].a;
        if (other == chain.back()) line.closed = true;
      }
      if (line.closed) chain.push_back(chain.front());
    }
    line.points.reserve(chain.size());
    for (const auto& e : chain) line.points.push_back(lerp_point(e));
    contour.polylines.push_back(std::move(line));
  }
  return contour;
}

}  // namespace metasdf::geom
