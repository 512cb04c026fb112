#pragma once

// Depth back-projection and bird's-eye-view semantic projection.
//
// Vehicle frame for 3-D points: x right, y forward, z up, origin on the ground
// directly below the camera.

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "routepilot/raster.hpp"

namespace routepilot {

struct CameraIntrinsics {
  double fx = 256.0;
  double fy = 256.0;
  double cx = 256.0;
  double cy = 128.0;
  std::size_t width = 512;
  std::size_t height = 256;
  double cam_height_m = 0.9;
  // Positive pitch tilts the optical axis down toward the ground.
  double cam_pitch_deg = 0.0;

  // Throws InvalidArgument when focal lengths or principal point are invalid.
  void validate() const;
};

CameraIntrinsics parse_intrinsics(std::string_view json_text);
CameraIntrinsics load_intrinsics(const std::filesystem::path& path);

struct CloudPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  std::uint32_t row = 0;
  std::uint32_t col = 0;
};

// Pinhole back-projection of every valid pixel (finite, positive depth),
// rotated by the camera pitch and lifted by the camera height.
std::vector<CloudPoint> depth_to_points(const DepthMap& depth, const CameraIntrinsics& intr);

// 128 x 256 top-view grid of class ids covering 24 m ahead and 24 m to each
// side. The vehicle sits in the bottom-center cell (row 127, col 128).
struct BevGeometry {
  static constexpr std::size_t kRows = 128;
  static constexpr std::size_t kCols = 256;
  static constexpr double kCellM = 0.1875;
  static constexpr std::size_t kOriginRow = 127;
  static constexpr std::size_t kOriginCol = 128;
  static constexpr double kRangeM = 24.0;
  static constexpr double kMinZ = -0.5;
  static constexpr double kMaxZ = 3.0;
};

using BevGrid = Raster<std::uint8_t>;

BevGrid empty_bev();

struct BevCell {
  std::size_t row = 0;
  std::size_t col = 0;
};

// Cell holding a vehicle-frame ground position, or false when outside the
// grid footprint.
bool bev_cell_of(double x, double y, BevCell& out);

// Center of a cell in vehicle-frame meters.
void bev_cell_center(const BevCell& cell, double& x, double& y);

// Keeps points with -24 <= x < 24, 0 <= y < 24, -0.5 <= z <= 3. Within a
// cell the point with the greatest z wins, equal z going to the smaller
// class id, so the result does not depend on point order. Untouched cells
// are None.
BevGrid project_to_bev(const std::vector<CloudPoint>& points, const SegMap& seg);

}  // namespace routepilot
