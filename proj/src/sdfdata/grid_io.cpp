#include "metasdf/sdfdata/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "metasdf/sdfdata/grid_file.hpp"

namespace metasdf::data {

std::int64_t SdfGrid::cell_count() const {
  std::int64_t n = 1;
  for (int r : res) n *= r;
  return n;
}

double SdfGrid::cell_width_axis(int point_axis) const {
  return 2.0 / res[dim() - 1 - point_axis];
}

double SdfGrid::max_cell_width() const {
  return 2.0 / static_cast<double>(*std::min_element(res.begin(), res.end()));
}

double SdfGrid::center_coord(int point_axis, int index) const {
  return -1.0 + (index + 0.5) * cell_width_axis(point_axis);
}

void SdfGrid::validate() const {
  if (res.size() != 2 && res.size() != 3) throw Error("sdf grid: rank must be 2 or 3");
  for (int r : res) {
    if (r < 2) throw Error("sdf grid: each axis needs at least 2 cells");
  }
  if (cell_count() != static_cast<std::int64_t>(values.size())) {
    throw Error("sdf grid: resolution does not match value count");
  }
}

double SdfGrid::interpolate(std::span<const double> point) const {
  const int d = dim();
  if (static_cast<int>(point.size()) != d) throw Error("sdf grid: point rank mismatch");
  int base[3] = {0, 0, 0};
  double frac[3] = {0.0, 0.0, 0.0};
  for (int a = 0; a < d; ++a) {
    const int r = res[d - 1 - a];
    const double w = 2.0 / r;
    double f = (point[a] + 1.0) / w - 0.5;
    f = std::clamp(f, 0.0, static_cast<double>(r - 1));
    int i = static_cast<int>(std::floor(f));
    i = std::clamp(i, 0, r - 2);
    base[a] = i;
    frac[a] = std::clamp(f - i, 0.0, 1.0);
  }
  double acc = 0.0;
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    double weight = 1.0;
    std::size_t index = 0;
    for (int a = d - 1; a >= 0; --a) {
      const int bit = (c >> a) & 1;
      weight *= bit ? frac[a] : 1.0 - frac[a];
      index = index * res[d - 1 - a] + (base[a] + bit);
    }
    acc += weight * values[index];
  }
  return acc;
}

EikonalStats eikonal_stats(const SdfGrid& grid, double lo, double hi, double margin_cells) {
  grid.validate();
  EikonalStats stats;
  std::int64_t ok = 0;
  const double margin = margin_cells * grid.max_cell_width();
  if (grid.dim() == 2) {
    const int h = grid.res[0], w = grid.res[1];
    const double wx = grid.cell_width_axis(0), wy = grid.cell_width_axis(1);
    for (int y = 1; y + 1 < h; ++y) {
      for (int x = 1; x + 1 < w; ++x) {
        if (std::fabs(grid.at2(y, x)) <= margin) continue;
        const double gx = (grid.at2(y, x + 1) - grid.at2(y, x - 1)) / (2.0 * wx);
        const double gy = (grid.at2(y + 1, x) - grid.at2(y - 1, x)) / (2.0 * wy);
        const double mag = std::hypot(gx, gy);
        ++stats.checked;
        if (mag >= lo && mag <= hi) ++ok;
      }
    }
  } else {
    const int dep = grid.res[0], h = grid.res[1], w = grid.res[2];
    const double wx = grid.cell_width_axis(0), wy = grid.cell_width_axis(1),
                 wz = grid.cell_width_axis(2);
    for (int z = 1; z + 1 < dep; ++z) {
      for (int y = 1; y + 1 < h; ++y) {
        for (int x = 1; x + 1 < w; ++x) {
          if (std::fabs(grid.at3(z, y, x)) <= margin) continue;
          const double gx = (grid.at3(z, y, x + 1) - grid.at3(z, y, x - 1)) / (2.0 * wx);
          const double gy = (grid.at3(z, y + 1, x) - grid.at3(z, y - 1, x)) / (2.0 * wy);
          const double gz = (grid.at3(z + 1, y, x) - grid.at3(z - 1, y, x)) / (2.0 * wz);
          const double mag = std::sqrt(gx * gx + gy * gy + gz * gz);
          ++stats.checked;
          if (mag >= lo && mag <= hi) ++ok;
        }
      }
    }
  }
  stats.fraction_ok = stats.checked == 0 ? 1.0 : static_cast<double>(ok) / stats.checked;
  return stats;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

// Binary layout: "SDFG" magic, then three u32 little-endian dims; 2D grids
// store (H, W, 0), 3D grids (D, H, W). Values follow as f32 little-endian in
// storage order. Writes are atomic (temp file + rename).
void write_grid_file(const SdfGrid& grid, const std::string& path) {
  grid.validate();
  std::string blob;
  blob.reserve(16 + grid.values.size() * 4);
  blob += "SDFG";
  if (grid.dim() == 2) {
    put_u32(blob, static_cast<std::uint32_t>(grid.res[0]));
    put_u32(blob, static_cast<std::uint32_t>(grid.res[1]));
    put_u32(blob, 0);
  } else {
    put_u32(blob, static_cast<std::uint32_t>(grid.res[0]));
    put_u32(blob, static_cast<std::uint32_t>(grid.res[1]));
    put_u32(blob, static_cast<std::uint32_t>(grid.res[2]));
  }
  for (double v : grid.values) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(blob, bits);
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw IoError("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

SdfGrid read_grid_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (blob.size() < 16 || blob.compare(0, 4, "SDFG") != 0) {
    throw IoError(path + ": not an SDFG grid file");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
  const std::uint32_t a = get_u32(p + 4), b = get_u32(p + 8), c = get_u32(p + 12);
  SdfGrid grid;
  if (c == 0) {
    grid.res = {static_cast<int>(a), static_cast<int>(b)};
  } else {
    grid.res = {static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)};
  }
  const std::size_t count = static_cast<std::size_t>(grid.cell_count());
  if (blob.size() != 16 + count * 4) throw IoError(path + ": truncated grid file");
  grid.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t bits = get_u32(p + 16 + i * 4);
    float f;
    std::memcpy(&f, &bits, 4);
    grid.values[i] = static_cast<double>(f);
  }
  grid.validate();
  return grid;
}

}  // namespace metasdf::data
