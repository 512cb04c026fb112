#include "routepilot/predictor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "routepilot/errors.hpp"

namespace routepilot {

void WaypointDelta::validate() const {
  if (!std::isfinite(dx_m) || !std::isfinite(dy_m)) throw InvalidArgument("waypoint delta is not finite");
  if (std::abs(dx_m) > kMaxAbsM || std::abs(dy_m) > kMaxAbsM) {
    throw InvalidArgument(fmt::format("waypoint delta ({}, {}) exceeds +/-{} m", dx_m, dy_m, kMaxAbsM));
  }
}

LocalPoint accumulate(const LocalPoint& current, const WaypointDelta& delta) {
  delta.validate();
  return {current.x_m + delta.dx_m, current.y_m + delta.dy_m};
}

Waypoints waypoints_from_deltas(std::span<const WaypointDelta, 3> deltas) {
  Waypoints w;
  w.wp1 = accumulate(LocalPoint{}, deltas[0]);
  w.wp2 = accumulate(w.wp1, deltas[1]);
  w.wp3 = accumulate(w.wp2, deltas[2]);
  return w;
}

std::vector<std::uint8_t> default_obstacle_classes() {
  using C = SemanticClass;
  return {class_id(C::Person), class_id(C::Rider),      class_id(C::Car),     class_id(C::Truck),
          class_id(C::Bus),    class_id(C::Train),      class_id(C::Motorcycle), class_id(C::Bicycle),
          class_id(C::Wall),   class_id(C::Fence),      class_id(C::Pole)};
}

namespace {

bool is_obstacle(std::uint8_t cls, std::span<const std::uint8_t> classes) {
  return std::find(classes.begin(), classes.end(), cls) != classes.end();
}

// Visits the in-grid cells of the 3x3 block around the cell holding `p`.
template <typename Fn>
void for_each_neighbour(const LocalPoint& p, Fn&& fn) {
  BevCell center;
  if (!bev_cell_of(p.x_m, p.y_m, center)) return;
  for (long dr = -1; dr <= 1; ++dr) {
    for (long dc = -1; dc <= 1; ++dc) {
      const long r = static_cast<long>(center.row) + dr;
      const long c = static_cast<long>(center.col) + dc;
      if (r < 0 || c < 0 || r >= static_cast<long>(BevGeometry::kRows) || c >= static_cast<long>(BevGeometry::kCols)) {
        continue;
      }
      fn(BevCell{static_cast<std::size_t>(r), static_cast<std::size_t>(c)});
    }
  }
}

std::array<LocalPoint, 3> path_points(LocalPoint dir, LocalPoint perp, double step, double shift) {
  const LocalPoint offset = shift * perp;
  return {offset + step * dir, offset + (2.0 * step) * dir, offset + (3.0 * step) * dir};
}

bool path_free(const BevGrid& bev, const std::array<LocalPoint, 3>& pts, std::span<const std::uint8_t> classes) {
  return std::none_of(pts.begin(), pts.end(), [&](const LocalPoint& p) { return near_obstacle(bev, p, classes); });
}

}  // namespace

bool near_obstacle(const BevGrid& bev, const LocalPoint& p, std::span<const std::uint8_t> obstacle_classes) {
  bool hit = false;
  for_each_neighbour(p, [&](const BevCell& c) { hit = hit || is_obstacle(bev(c.row, c.col), obstacle_classes); });
  return hit;
}

PredictionOutput pure_pursuit_predict(const ObservationBundle& obs, double speed_target, const PursuitConfig& config) {
  if (!std::isfinite(speed_target) || speed_target < 0.0) throw InvalidArgument("speed target must be >= 0");
  if (!(config.shift_step_m > 0.0) || config.max_shift_m < 0.0) throw InvalidArgument("bad lateral shift settings");

  LocalPoint target = obs.window.rp1;
  if (norm(target) < 1e-6) target = obs.window.rp2;
  LocalPoint dir{0.0, 1.0};
  if (norm(target) >= 1e-6) dir = (1.0 / norm(target)) * target;
  const LocalPoint perp{dir.y_m, -dir.x_m};  // right of the travel direction
  const std::span<const std::uint8_t> classes(config.obstacle_classes);

  std::optional<double> chosen;
  const auto base = path_points(dir, perp, speed_target, 0.0);
  if (path_free(obs.bev, base, classes)) {
    chosen = 0.0;
  } else {
    // Side of the closest obstacle cell next to the unshifted path.
    double best_d = std::numeric_limits<double>::infinity();
    double obstacle_side = 0.0;
    for (const auto& p : base) {
      for_each_neighbour(p, [&](const BevCell& c) {
        if (!is_obstacle(obs.bev(c.row, c.col), classes)) return;
        LocalPoint center;
        bev_cell_center(c, center.x_m, center.y_m);
        const double d = norm(center);
        if (d < best_d) {
          best_d = d;
          obstacle_side = center.x_m * perp.x_m + center.y_m * perp.y_m;
        }
      });
    }
    // Obstacle on the right pushes the preference to the left.
    const double preferred = obstacle_side > 0.0 ? -1.0 : 1.0;
    const int steps = static_cast<int>(std::floor(config.max_shift_m / config.shift_step_m + 1e-9));
    for (int i = 1; i <= steps && !chosen; ++i) {
      for (double side : {preferred, -preferred}) {
        const double shift = side * i * config.shift_step_m;
        if (path_free(obs.bev, path_points(dir, perp, speed_target, shift), classes)) {
          chosen = shift;
          break;
        }
      }
    }
  }

  PredictionOutput out;
  if (!chosen) {
    const std::array<WaypointDelta, 3> zero{};
    out.waypoints = waypoints_from_deltas(zero);
    out.control = {};
    return out;
  }

  const LocalPoint offset = *chosen * perp;
  const LocalPoint step = speed_target * dir;
  const std::array<WaypointDelta, 3> deltas{WaypointDelta{offset.x_m + step.x_m, offset.y_m + step.y_m},
                                            WaypointDelta{step.x_m, step.y_m}, WaypointDelta{step.x_m, step.y_m}};
  out.waypoints = waypoints_from_deltas(deltas);

  const LocalPoint aim = aim_point(out.waypoints);
  const double l2 = aim.x_m * aim.x_m + aim.y_m * aim.y_m;
  const double curvature = l2 > 1e-12 ? 2.0 * aim.x_m / l2 : 0.0;
  out.control.steering = speed_target * curvature / config.yaw_rate_max;
  out.control.throttle =
      speed_target / config.v_max + config.throttle_gain * (speed_target - linear_speed(obs.wheels));
  out.control = out.control.clamped();
  return out;
}

Waypoints playback_predict(std::span<const RecordTick> ticks, std::size_t tick) {
  if (tick + kGroundTruthHorizonTicks >= ticks.size()) {
    throw EndOfRecordError(fmt::format("tick {} has fewer than {} future ticks", tick, kGroundTruthHorizonTicks));
  }
  const Pose pose = ticks[tick].pose();
  Waypoints w;
  w.wp1 = route_point_to_local(pose, ticks[tick + kTicksPerSecond].gnss);
  w.wp2 = route_point_to_local(pose, ticks[tick + 2 * kTicksPerSecond].gnss);
  w.wp3 = route_point_to_local(pose, ticks[tick + 3 * kTicksPerSecond].gnss);
  return w;
}

}  // namespace routepilot
