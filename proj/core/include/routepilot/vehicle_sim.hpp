#pragma once

// Closed-loop vehicle simulation: unicycle kinematics with first-order
// actuator lag, a ground-truth depth/segmentation renderer, sensor noise and
// the automatic safety supervisor that stands in for a human driver.

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "routepilot/bev.hpp"
#include "routepilot/controller.hpp"
#include "routepilot/geodesy.hpp"
#include "routepilot/world.hpp"

namespace routepilot {

struct VehicleParams {
  double wheel_radius_m = 0.15;
  double track_width_m = 0.5;
  double v_max = 2.0;         // m/s at full throttle
  double yaw_rate_max = 1.0;  // rad/s at full steering
  double dt = 0.25;           // s, one record tick
  double lag_tau_s = 0.5;     // first-order actuator time constant
  double length_m = 1.0;      // footprint, centered on the pose
  double width_m = 0.6;

  void validate() const;
};

struct VehicleState {
  Pose pose;
  double v = 0.0;
  // rad/s, positive turns clockwise (to the right), matching compass bearings.
  double yaw_rate = 0.0;
  double time_s = 0.0;
};

// Advances one dt: speed and yaw rate relax toward throttle*v_max and
// steering*yaw_rate_max, then the pose follows the exact arc for those rates.
VehicleState step(const VehicleState& state, const Control& control, const VehicleParams& params);

// Wheel angular speeds for the current motion, floored at zero. A right turn
// (positive yaw rate) spins the left wheel faster.
WheelFeedback wheel_speeds(const VehicleState& state, const VehicleParams& params);

struct SensorNoise {
  double gnss_sigma_m = 0.0;
  double bearing_sigma_deg = 0.0;
  double depth_relative_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-episode Gaussian noise source; identical seeds give identical draws.
class NoiseStream {
 public:
  explicit NoiseStream(const SensorNoise& noise);

  const SensorNoise& settings() const { return noise_; }
  double gaussian(double sigma);

 private:
  SensorNoise noise_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> unit_{0.0, 1.0};
};

struct ObservationSet {
  DepthMap depth;
  SegMap seg;
  GeoPoint gnss;
  double bearing_deg = 0.0;
  WheelFeedback wheels;
};

struct RenderSettings {
  double max_range_m = 60.0;
};

// Ground-truth depth (along the optical axis) and class rasters seen from a
// level camera at the vehicle position. Rays that hit nothing within range
// are sky with infinite depth. Throws InvalidArgument for a pitched camera.
void render_camera(const World& world, const VehicleState& state, const CameraIntrinsics& intr, DepthMap& depth,
                   SegMap& seg, const RenderSettings& settings = {});

// Renders the camera, then applies GNSS, bearing and depth noise.
ObservationSet sense(const World& world, const VehicleState& state, const VehicleParams& params,
                     const CameraIntrinsics& intr, NoiseStream& noise);

enum class InterventionCause { PredictedCollision, OffRoute };

std::string_view to_string(InterventionCause c);

struct InterventionEvent {
  int start_tick = 0;
  int end_tick = 0;  // inclusive
  InterventionCause cause = InterventionCause::PredictedCollision;

  double duration_s(double dt) const { return static_cast<double>(end_tick - start_tick + 1) * dt; }
};

struct InterventionConfig {
  double horizon_s = 2.0;
  double off_route_m = 5.0;
  double release_m = 1.0;
  double lookahead_m = 3.0;
  double supervisor_speed = 1.0;
};

// True when the vehicle footprint at `state` overlaps any solid world cell.
bool footprint_collides(const World& world, const VehicleState& state, const VehicleParams& params);

// Rolls `control` forward for `horizon_s` and reports the first footprint
// overlap, including the current pose.
bool rollout_collides(const World& world, const VehicleState& state, const Control& control,
                      const VehicleParams& params, double horizon_s);

// Reason a supervisor would take over now, if any: a collision within the
// horizon under the current control, or drifting too far from the route.
std::optional<InterventionCause> check_intervention(const World& world, const VehicleState& state,
                                                    const Control& control, const VehicleParams& params,
                                                    const std::vector<LocalOffset>& route_polyline,
                                                    const InterventionConfig& config = {});

// Automatic safety driver. Watches the policy's control each tick, takes over
// when check_intervention fires, steers back to the route centerline with a
// collision-checked pure pursuit, and hands control back once the policy's own
// control is collision-free and the vehicle is within release_m of the route.
class Supervisor {
 public:
  Supervisor(const World& world, std::vector<LocalOffset> route_polyline, VehicleParams params,
             InterventionConfig config = {});

  // Control to apply at `tick` given what the policy asked for.
  Control update(int tick, const VehicleState& state, const Control& policy);

  bool active() const { return active_.has_value(); }
  // Closes any open event at `last_tick`.
  void finish(int last_tick);
  const std::vector<InterventionEvent>& events() const { return events_; }

  Control takeover_control(const VehicleState& state) const;

 private:
  const World& world_;
  std::vector<LocalOffset> polyline_;
  VehicleParams params_;
  InterventionConfig config_;
  std::optional<InterventionEvent> active_;
  std::vector<InterventionEvent> events_;
};

}  // namespace routepilot
