#pragma once

#include <string>

#include "metasdf/sdfdata/grid.hpp"

namespace metasdf::data {

// Little-endian f32 grid container, 16-byte "SDFG" header. See grid_io.cpp
// for the exact layout. Writing is atomic.
void write_grid_file(const SdfGrid& grid, const std::string& path);
SdfGrid read_grid_file(const std::string& path);

}  // namespace metasdf::data
