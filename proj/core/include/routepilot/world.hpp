#pragma once

// Static simulated world: a ground-truth class grid with per-cell heights over
// a flat east/north area anchored at a global origin.
//
// World file (JSON):
//   {
//     "origin": {"lat_deg": .., "lon_deg": ..},
//     "bounds": {"x_min": .., "x_max": .., "y_min": .., "y_max": ..},  // meters east/north
//     "cell_m": 0.25,
//     "default_class": 10,
//     "ground":    [ {"class": 1, "rect": [x0, y0, x1, y1]},
//                    {"class": 2, "polyline": [[x, y], ...], "width": 2.0} ],
//     "obstacles": [ {"class": 14, "rect": [...], "height": 1.5}, ... ],
//     "start": {"x": .., "y": .., "bearing_deg": ..}          // or lat_deg/lon_deg
//     "route": {"file": "route.json"} | {"local": [[x, y], ...]} | {"points": [...]}
//   }
// Ground shapes are painted flat in order; obstacles are painted afterwards
// with their height (class default when omitted).

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "routepilot/geodesy.hpp"
#include "routepilot/raster.hpp"
#include "routepilot/route.hpp"

namespace routepilot {

// Height in meters a class stands above the ground when used as an obstacle.
// Flat classes (none, road, sidewalk, terrain, sky) return 0.
double default_class_height(std::uint8_t cls);

struct WorldShape {
  std::uint8_t cls = 0;
  std::optional<std::array<double, 4>> rect;  // x0, y0, x1, y1
  std::vector<LocalOffset> polyline;
  double width_m = 0.0;
  double height_m = 0.0;
};

class World {
 public:
  World(GeoPoint origin, double x_min, double y_min, double x_max, double y_max, double cell_m,
        std::uint8_t default_class);

  void paint_ground(const WorldShape& shape);
  void paint_obstacle(const WorldShape& shape);

  const GeoPoint& origin() const { return origin_; }
  double cell_m() const { return cell_m_; }
  double x_min() const { return x_min_; }
  double y_min() const { return y_min_; }
  double x_max() const { return x_min_ + cell_m_ * static_cast<double>(nx_); }
  double y_max() const { return y_min_ + cell_m_ * static_cast<double>(ny_); }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }

  bool in_bounds(long ix, long iy) const {
    return ix >= 0 && iy >= 0 && ix < static_cast<long>(nx_) && iy < static_cast<long>(ny_);
  }
  // Cell accessors; ix runs east, iy runs north.
  std::uint8_t cell_class(long ix, long iy) const;
  float cell_height(long ix, long iy) const;

  // Point queries in local meters; outside the bounds is flat None ground.
  std::uint8_t class_at(double x, double y) const;
  float height_at(double x, double y) const;
  bool solid_at(double x, double y) const { return height_at(x, y) > 0.0f; }

  LocalOffset to_local(const GeoPoint& p) const { return geo_to_offset(origin_, p); }
  GeoPoint to_geo(const LocalOffset& o) const { return offset_to_geo(origin_, o); }

  Pose start;
  std::optional<Route> route;

 private:
  template <typename Fn>
  void paint(const WorldShape& shape, Fn&& fn);

  GeoPoint origin_;
  double x_min_;
  double y_min_;
  double cell_m_;
  std::size_t nx_;
  std::size_t ny_;
  Raster<std::uint8_t> classes_;  // rows = iy, cols = ix
  Raster<float> heights_;
};

// `base_dir` resolves a relative route file reference.
World parse_world(std::string_view json_text, const std::filesystem::path& base_dir = {});
World load_world(const std::filesystem::path& path);

// Route expressed in the world's local meters.
std::vector<LocalOffset> route_polyline(const World& world, const Route& route);

// Euclidean distance from a point to a polyline (or to its only vertex).
double distance_to_polyline(const LocalOffset& p, const std::vector<LocalOffset>& polyline);

}  // namespace routepilot
