#pragma once

// Raster file formats.
//
// Depth: 16-byte header ("DPF1", uint32 LE rows, uint32 LE cols, uint32
// reserved = 0) followed by rows*cols little-endian float32, row-major.
// Class rasters: binary PGM (P5, maxval 255), one byte per cell.

#include <filesystem>
#include <iosfwd>

#include "routepilot/raster.hpp"

namespace routepilot {

void write_depth(std::ostream& out, const DepthMap& depth);
DepthMap read_depth(std::istream& in);
void save_depth(const DepthMap& depth, const std::filesystem::path& path);
DepthMap load_depth(const std::filesystem::path& path);

void write_pgm(std::ostream& out, const Raster<std::uint8_t>& raster);
Raster<std::uint8_t> read_pgm(std::istream& in);
void save_pgm(const Raster<std::uint8_t>& raster, const std::filesystem::path& path);
Raster<std::uint8_t> load_pgm(const std::filesystem::path& path);

}  // namespace routepilot
