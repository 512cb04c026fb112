#pragma once

// Waypoint predictors. The learned waypoint/control network is not part of
// this library; its slot is filled by a geometric oracle, by playback of a
// recorded drive, or by an external process over a line protocol
// (see stream_predictor.hpp).

#include <cstdint>
#include <span>
#include <vector>

#include "routepilot/bev.hpp"
#include "routepilot/controller.hpp"
#include "routepilot/record.hpp"
#include "routepilot/route.hpp"

namespace routepilot {

struct ObservationBundle {
  BevGrid bev;
  RouteWindow window;
  WheelFeedback wheels;
};

// Per-step waypoint increment. Components are bounded by +/-8 m.
struct WaypointDelta {
  static constexpr double kMaxAbsM = 8.0;

  double dx_m = 0.0;
  double dy_m = 0.0;

  // Throws InvalidArgument when non-finite or out of bounds.
  void validate() const;
};

struct PredictionOutput {
  Waypoints waypoints;
  Control control;
};

// Next waypoint = current + delta.
LocalPoint accumulate(const LocalPoint& current, const WaypointDelta& delta);

// Three waypoints from three deltas, starting at the vehicle (0, 0).
Waypoints waypoints_from_deltas(std::span<const WaypointDelta, 3> deltas);

// Person, rider, car, truck, bus, train, motorcycle, bicycle, wall, fence, pole.
std::vector<std::uint8_t> default_obstacle_classes();

struct PursuitConfig {
  std::vector<std::uint8_t> obstacle_classes = default_obstacle_classes();
  double shift_step_m = 0.375;
  double max_shift_m = 3.0;
  double v_max = 2.0;
  double yaw_rate_max = 1.0;
  double throttle_gain = 0.5;
};

// Geometric stand-in for the learned controller. Places waypoints along the
// bearing to the first route point at speed_target * {1, 2, 3} s, sliding the
// whole path sideways in shift_step increments when any waypoint's 3x3 BEV
// neighbourhood holds an obstacle. The direct control is pure pursuit on the
// aim point plus proportional throttle; a fully blocked corridor yields all
// waypoints at the origin and zero control.
PredictionOutput pure_pursuit_predict(const ObservationBundle& obs, double speed_target,
                                      const PursuitConfig& config = {});

// True when the BEV cell under `p` or any of its 8 neighbours holds one of
// the obstacle classes.
bool near_obstacle(const BevGrid& bev, const LocalPoint& p, std::span<const std::uint8_t> obstacle_classes);

inline constexpr int kTicksPerSecond = 4;
inline constexpr int kGroundTruthHorizonTicks = 3 * kTicksPerSecond;

// Recorded positions 4, 8 and 12 ticks ahead of `tick` in that tick's vehicle
// frame. Throws EndOfRecordError when fewer than 12 future ticks remain.
Waypoints playback_predict(std::span<const RecordTick> ticks, std::size_t tick);

}  // namespace routepilot
