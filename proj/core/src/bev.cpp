#include "routepilot/bev.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "routepilot/geodesy.hpp"

namespace routepilot {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw InvalidArgument("focal lengths must be positive");
  }
  if (width == 0 || height == 0) throw InvalidArgument("image size must be positive");
  if (!(cx >= 0.0 && cx < static_cast<double>(width)) || !(cy >= 0.0 && cy < static_cast<double>(height))) {
    throw InvalidArgument("principal point outside the image");
  }
  if (!std::isfinite(cam_height_m) || !std::isfinite(cam_pitch_deg)) {
    throw InvalidArgument("camera height and pitch must be finite");
  }
}

CameraIntrinsics parse_intrinsics(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(fmt::format("intrinsics are not valid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw FormatError("intrinsics must be a JSON object");
  CameraIntrinsics c;
  try {
    c.fx = j.value("fx", c.fx);
    c.fy = j.value("fy", c.fy);
    c.cx = j.value("cx", c.cx);
    c.cy = j.value("cy", c.cy);
    c.width = j.value("width", c.width);
    c.height = j.value("height", c.height);
    c.cam_height_m = j.value("cam_height_m", c.cam_height_m);
    c.cam_pitch_deg = j.value("cam_pitch_deg", c.cam_pitch_deg);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("bad intrinsics field: {}", e.what()));
  }
  c.validate();
  return c;
}

CameraIntrinsics load_intrinsics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(fmt::format("cannot open intrinsics file {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_intrinsics(ss.str());
}

std::vector<CloudPoint> depth_to_points(const DepthMap& depth, const CameraIntrinsics& intr) {
  intr.validate();
  const double pitch = deg_to_rad(intr.cam_pitch_deg);
  const double cp = std::cos(pitch);
  const double sp = std::sin(pitch);

  std::vector<CloudPoint> out;
  out.reserve(depth.size());
  for (std::size_t v = 0; v < depth.rows(); ++v) {
    for (std::size_t u = 0; u < depth.cols(); ++u) {
      const double d = depth(v, u);
      if (!std::isfinite(d) || d <= 0.0) continue;
      const double right = (static_cast<double>(u) - intr.cx) / intr.fx * d;
      const double up = -(static_cast<double>(v) - intr.cy) / intr.fy * d;
      CloudPoint p;
      p.x = right;
      p.y = d * cp + up * sp;
      p.z = -d * sp + up * cp + intr.cam_height_m;
      p.row = static_cast<std::uint32_t>(v);
      p.col = static_cast<std::uint32_t>(u);
      out.push_back(p);
    }
  }
  return out;
}

BevGrid empty_bev() { return BevGrid(BevGeometry::kRows, BevGeometry::kCols, class_id(SemanticClass::None)); }

bool bev_cell_of(double x, double y, BevCell& out) {
  using G = BevGeometry;
  if (!(x >= -G::kRangeM && x < G::kRangeM && y >= 0.0 && y < G::kRangeM)) return false;
  const auto fwd = static_cast<long>(std::floor(y / G::kCellM));
  const auto lat = static_cast<long>(std::floor(x / G::kCellM));
  const long row = static_cast<long>(G::kOriginRow) - fwd;
  const long col = static_cast<long>(G::kOriginCol) + lat;
  // Division can round a value just under the range up onto the edge.
  if (row < 0 || col < 0 || col >= static_cast<long>(G::kCols)) return false;
  out = {static_cast<std::size_t>(row), static_cast<std::size_t>(col)};
  return true;
}

void bev_cell_center(const BevCell& cell, double& x, double& y) {
  using G = BevGeometry;
  x = (static_cast<double>(cell.col) - static_cast<double>(G::kOriginCol) + 0.5) * G::kCellM;
  y = (static_cast<double>(G::kOriginRow) - static_cast<double>(cell.row) + 0.5) * G::kCellM;
}

BevGrid project_to_bev(const std::vector<CloudPoint>& points, const SegMap& seg) {
  using G = BevGeometry;
  BevGrid grid = empty_bev();
  Raster<double> best_z(G::kRows, G::kCols, -std::numeric_limits<double>::infinity());
  Raster<std::uint8_t> touched(G::kRows, G::kCols, 0);

  for (const auto& p : points) {
    if (p.row >= seg.rows() || p.col >= seg.cols()) {
      throw InvalidArgument("point pixel tag outside the segmentation raster");
    }
    if (!(p.z >= G::kMinZ && p.z <= G::kMaxZ)) continue;
    BevCell cell;
    if (!bev_cell_of(p.x, p.y, cell)) continue;
    const std::uint8_t cls = seg(p.row, p.col);
    if (cls >= kClassCount) throw InvalidArgument(fmt::format("class id {} out of range", cls));
    auto& z = best_z(cell.row, cell.col);
    auto& c = grid(cell.row, cell.col);
    auto& t = touched(cell.row, cell.col);
    if (!t || p.z > z || (p.z == z && cls < c)) {
      z = p.z;
      c = cls;
      t = 1;
    }
  }
  return grid;
}

}  // namespace routepilot
