#include "metasdf/geometry/mesh.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace metasdf::geom {

double Mesh::total_area() const {
  double area = 0.0;
  for (const auto& t : triangles) {
    const auto& a = vertices[t[0]];
    const auto& b = vertices[t[1]];
    const auto& c = vertices[t[2]];
    const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
    const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
    const double nx = uy * vz - uz * vy, ny = uz * vx - ux * vz, nz = ux * vy - uy * vx;
    area += 0.5 * std::sqrt(nx * nx + ny * ny + nz * nz);
  }
  return area;
}

namespace {

// Cube corners in (dx, dy, dz); edges as corner pairs.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
// Edges in corner pairs: 0:(0,1) 1:(1,2) 2:(2,3) 3:(3,0) 4:(4,5) 5:(5,6)
// 6:(6,7) 7:(7,4) 8:(0,4) 9:(1,5) 10:(2,6) 11:(3,7).
// Faces as corner cycles; face edge k connects face corners k and k+1.
constexpr int kFaceCorner[6][4] = {{0, 1, 2, 3}, {4, 5, 6, 7}, {0, 1, 5, 4},
                                   {3, 2, 6, 7}, {0, 3, 7, 4}, {1, 2, 6, 5}};
constexpr int kFaceEdge[6][4] = {{0, 1, 2, 3},  {4, 5, 6, 7},  {0, 9, 4, 8},
                                 {2, 10, 6, 11}, {3, 11, 7, 8}, {1, 10, 5, 9}};

// For the shared-vertex map: each local edge is the (axis, base corner) pair
// with the base at the lexicographically lower end.
constexpr int kEdgeAxis[12] = {0, 1, 0, 1, 0, 1, 0, 1, 2, 2, 2, 2};
constexpr int kEdgeBase[12] = {0, 1, 3, 0, 4, 5, 7, 4, 0, 1, 2, 3};

// Loops of crossed edges per case, fan-triangulated lazily by the caller.
struct CaseEntry {
  std::vector<std::vector<int>> loops;
};

std::array<CaseEntry, 256> build_case_table() {
  std::array<CaseEntry, 256> table;
  for (int mask = 0; mask < 256; ++mask) {
    auto in = [&](int corner) { return (mask >> corner) & 1; };
    // Each crossed edge receives exactly one partner per adjacent face.
    std::vector<std::array<int, 2>> partner(12, {-1, -1});
    auto connect = [&](int ea, int eb) {
      for (int* slot : {&partner[ea][0], &partner[ea][1]}) {
        if (*slot < 0) {
          *slot = eb;
          break;
        }
      }
      for (int* slot : {&partner[eb][0], &partner[eb][1]}) {
        if (*slot < 0) {
          *slot = ea;
          break;
        }
      }
    };

    for (int f = 0; f < 6; ++f) {
      int crossed[4];
      int n_crossed = 0;
      for (int k = 0; k < 4; ++k) {
        const int ca = kFaceCorner[f][k], cb = kFaceCorner[f][(k + 1) % 4];
        if (in(ca) != in(cb)) crossed[n_crossed++] = k;
      }
      if (n_crossed == 2) {
        connect(kFaceEdge[f][crossed[0]], kFaceEdge[f][crossed[1]]);
      } else if (n_crossed == 4) {
        // Ambiguous face: keep the two inside corners separated, wrapping a
        // boundary arc around each. Face edge k-1 and k meet at face corner k.
        for (int k = 0; k < 4; ++k) {
          if (!in(kFaceCorner[f][k])) continue;
          connect(kFaceEdge[f][(k + 3) % 4], kFaceEdge[f][k]);
        }
      }
    }

    bool visited[12] = {};
    for (int e = 0; e < 12; ++e) {
      if (visited[e] || partner[e][0] < 0) continue;
      std::vector<int> loop;
      int cur = e, prev = -1;
      do {
        visited[cur] = true;
        loop.push_back(cur);
        const int next = partner[cur][0] == prev ? partner[cur][1] : partner[cur][0];
        prev = cur;
        cur = next;
      } while (cur != e);
      table[mask].loops.push_back(std::move(loop));
    }
  }
  return table;
}

const std::array<CaseEntry, 256>& case_table() {
  static const auto table = build_case_table();
  return table;
}

}  // namespace

Mesh marching_cubes(const data::SdfGrid& grid, double iso) {
  grid.validate();
  if (grid.dim() != 3) throw Error("marching_cubes: expected a 3D grid");
  const int dep = grid.res[0], h = grid.res[1], w = grid.res[2];

  Mesh mesh;
  // Global edge key -> vertex index. Key packs lattice point and axis.
  std::unordered_map<std::uint64_t, int> edge_vertex;
  auto vertex_on_edge = [&](int x, int y, int z, int axis) -> int {
    const std::uint64_t key =
        ((static_cast<std::uint64_t>(z) * h + y) * w + x) * 3 + axis;
    auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    const int x1 = x + (axis == 0), y1 = y + (axis == 1), z1 = z + (axis == 2);
    const double v0 = grid.at3(z, y, x), v1 = grid.at3(z1, y1, x1);
    const double t = (iso - v0) / (v1 - v0);
    std::array<double, 3> p = {
        grid.center_coord(0, x) + t * (grid.center_coord(0, x1) - grid.center_coord(0, x)),
        grid.center_coord(1, y) + t * (grid.center_coord(1, y1) - grid.center_coord(1, y)),
        grid.center_coord(2, z) + t * (grid.center_coord(2, z1) - grid.center_coord(2, z))};
    const int index = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(p);
    edge_vertex.emplace(key, index);
    return index;
  };

  for (int z = 0; z + 1 < dep; ++z) {
    for (int y = 0; y + 1 < h; ++y) {
      for (int x = 0; x + 1 < w; ++x) {
        double corner_val[8];
        int mask = 0;
        for (int c = 0; c < 8; ++c) {
          corner_val[c] = grid.at3(z + kCorner[c][2], y + kCorner[c][1], x + kCorner[c][0]);
          if (corner_val[c] < iso) mask |= 1 << c;
        }
        const auto& entry = case_table()[mask];
        if (entry.loops.empty()) continue;

        // Outward reference direction from the corner values.
        double gx = 0, gy = 0, gz = 0;
        for (int c = 0; c < 8; ++c) {
          gx += corner_val[c] * (kCorner[c][0] - 0.5);
          gy += corner_val[c] * (kCorner[c][1] - 0.5);
          gz += corner_val[c] * (kCorner[c][2] - 0.5);
        }

        for (const auto& loop : entry.loops) {
          std::vector<int> vids;
          vids.reserve(loop.size());
          for (int e : loop) {
            const int base = kEdgeBase[e];
            vids.push_back(vertex_on_edge(x + kCorner[base][0], y + kCorner[base][1],
                                          z + kCorner[base][2], kEdgeAxis[e]));
          }
          for (std::size_t i = 1; i + 1 < vids.size(); ++i) {
            int a = vids[0], b = vids[i], c = vids[i + 1];
            if (a == b || b == c || a == c) continue;
            const auto &pa = mesh.vertices[a], &pb = mesh.vertices[b], &pc = mesh.vertices[c];
            const double ux = pb[0] - pa[0], uy = pb[1] - pa[1], uz = pb[2] - pa[2];
            const double vx = pc[0] - pa[0], vy = pc[1] - pa[1], vz = pc[2] - pa[2];
            const double nx = uy * vz - uz * vy, ny = uz * vx - ux * vz, nz = ux * vy - uy * vx;
            if (0.5 * std::sqrt(nx * nx + ny * ny + nz * nz) < 1e-12) continue;
            if (nx * gx + ny * gy + nz * gz < 0.0) std::swap(b, c);
            mesh.triangles.push_back({a, b, c});
          }
        }
      }
    }
  }
  return mesh;
}

}  // namespace metasdf::geom
