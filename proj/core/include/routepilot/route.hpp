#pragma once

#include <cstddef>
#include <filesystem>
#include <string_view>
#include <vector>

#include "routepilot/geodesy.hpp"

namespace routepilot {

// Ordered list of global route points. Holds at least two points.
class Route {
 public:
  static constexpr double kNominalSpacingM = 12.0;
  static constexpr double kMinSpacingM = 6.0;
  static constexpr double kMaxSpacingM = 20.0;

  explicit Route(std::vector<GeoPoint> points);

  const std::vector<GeoPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const GeoPoint& operator[](std::size_t i) const { return points_[i]; }

  // Indices i whose spacing to point i+1 falls outside [6 m, 20 m].
  std::vector<std::size_t> spacing_warnings() const;

 private:
  std::vector<GeoPoint> points_;
};

// Reads either a bare JSON array of {lat_deg, lon_deg} or {"points": [...]}.
Route load_route(const std::filesystem::path& path);
Route parse_route(std::string_view json_text);
// Writes a bare JSON array with nine fractional digits per coordinate.
void save_route(const Route& route, const std::filesystem::path& path);

struct RouteWindow {
  LocalPoint rp1;
  LocalPoint rp2;
};

enum class NavCommand { TurnLeft, TurnRight, GoStraight };

std::string_view to_string(NavCommand c);

struct RouteTracker {
  static constexpr double kDefaultSwitchRadiusM = 4.0;

  explicit RouteTracker(Route r, double switch_radius_m = kDefaultSwitchRadiusM);

  Route route;
  std::size_t current_index = 0;
  double switch_radius_m = kDefaultSwitchRadiusM;
};

struct AdvanceResult {
  RouteTracker tracker;
  bool finished = false;
};

// Moves past every route point closer than the switch radius. Several points
// may be consumed in one call. `finished` is set once the last point is within
// the radius.
AdvanceResult advance(RouteTracker tracker, const Pose& pose);

// Current and next route points in the vehicle frame. The next index is
// clamped to the last point.
RouteWindow window(const RouteTracker& tracker, const Pose& pose);

// Route-point-to-command rule: left tested before right.
NavCommand command(const RouteWindow& w);

}  // namespace routepilot
