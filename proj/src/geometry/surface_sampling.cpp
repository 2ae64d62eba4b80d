#include "metasdf/geometry/surface_sampling.hpp"

#include <cmath>

#include "metasdf/common/rng.hpp"

namespace metasdf::geom {

namespace {

// Index of the interval containing u within the cumulative weights.
std::size_t locate(const std::vector<double>& cumulative, double u) {
  std::size_t lo = 0, hi = cumulative.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (cumulative[mid] <= u) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

std::vector<Point3> sample_surface(const Contour& contour, int n, std::uint64_t seed) {
  if (n < 0) throw Error("sample_surface: negative count");
  if (n == 0) return {};
  struct Seg {
    std::array<double, 2> a, b;
  };
  std::vector<Seg> segs;
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& line : contour.polylines) {
    for (std::size_t i = 1; i < line.points.size(); ++i) {
      const auto& a = line.points[i - 1];
      const auto& b = line.points[i];
      const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
      if (len <= 0.0) continue;
      segs.push_back({a, b});
      total += len;
      cumulative.push_back(total);
    }
  }
  if (segs.empty()) throw Error("sample_surface: empty contour");

  auto rng = Rng::seeded(seed);
  std::vector<Point3> points;
  points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform() * total;
    const auto s = locate(cumulative, u);
    const double prev = s == 0 ? 0.0 : cumulative[s - 1];
    const double t = (u - prev) / (cumulative[s] - prev);
    const auto& seg = segs[s];
    points.push_back({seg.a[0] + t * (seg.b[0] - seg.a[0]),
                      seg.a[1] + t * (seg.b[1] - seg.a[1]), 0.0});
  }
  return points;
}

std::vector<Point3> sample_surface(const Mesh& mesh, int n, std::uint64_t seed) {
  if (n < 0) throw Error("sample_surface: negative count");
  if (n == 0) return {};
  if (mesh.triangles.empty()) throw Error("sample_surface: empty mesh");
  std::vector<double> cumulative;
  cumulative.reserve(mesh.triangles.size());
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    const auto& a = mesh.vertices[t[0]];
    const auto& b = mesh.vertices[t[1]];
    const auto& c = mesh.vertices[t[2]];
    const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
    const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
    const double nx = uy * vz - uz * vy, ny = uz * vx - ux * vz, nz = ux * vy - uy * vx;
    total += 0.5 * std::sqrt(nx * nx + ny * ny + nz * nz);
    cumulative.push_back(total);
  }
  if (total <= 0.0) throw Error("sample_surface: degenerate mesh");

  auto rng = Rng::seeded(seed);
  std::vector<Point3> points;
  points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform() * total;
    const auto& t = mesh.triangles[locate(cumulative, u)];
    const auto& a = mesh.vertices[t[0]];
    const auto& b = mesh.vertices[t[1]];
    const auto& c = mesh.vertices[t[2]];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const double wa = 1.0 - r1, wb = r1 * (1.0 - r2), wc = r1 * r2;
    points.push_back({wa * a[0] + wb * b[0] + wc * c[0],
                      wa * a[1] + wb * b[1] + wc * c[1],
                      wa * a[2] + wb * b[2] + wc * c[2]});
  }
  return points;
}

}  // namespace metasdf::geom
