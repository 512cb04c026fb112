#pragma once

// Waypoint-following control: aim-point geometry, the PID agent, and the
// policy that fuses the PID agent with a directly-estimating agent.

#include "routepilot/geodesy.hpp"

namespace routepilot {

struct Waypoints {
  LocalPoint wp1;
  LocalPoint wp2;
  LocalPoint wp3;
};

struct WheelFeedback {
  static constexpr double kDefaultWheelRadiusM = 0.15;

  double omega_l = 0.0;  // rad/s
  double omega_r = 0.0;  // rad/s
  double wheel_radius_m = kDefaultWheelRadiusM;
};

// steering in [-1, 1], positive turns right; throttle in [0, 1].
struct Control {
  double steering = 0.0;
  double throttle = 0.0;

  Control clamped() const;
  friend bool operator==(const Control&, const Control&) = default;
};

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  // Bound on the accumulated integral of error*dt.
  double integral_limit = 2.0;
};

struct PidState {
  double integral = 0.0;
  double prev_error = 0.0;

  void reset() { *this = PidState{}; }
};

struct OutputRange {
  double lo = -1.0;
  double hi = 1.0;
};

inline constexpr OutputRange kSteeringRange{-1.0, 1.0};
inline constexpr OutputRange kThrottleRange{0.0, 1.0};

// One discrete PID update: kp*e + ki*integral + kd*(e - e_prev)/dt, with the
// integral clamped to +/-integral_limit and the output clamped to `range`.
// Throws InvalidArgument when dt <= 0.
double pid_step(PidState& state, const PidGains& gains, double error, double dt, OutputRange range);

// Midpoint of the first two waypoints.
LocalPoint aim_point(const Waypoints& wp);

// Angle of the aim point relative to straight ahead, degrees, wrapped to
// (-180, 180]. Negative when the aim is to the right.
// Throws DegenerateAimError when the aim is within 1e-6 m of the vehicle.
double heading_error_deg(const LocalPoint& aim);

inline constexpr double kDefaultSpeedGain = 1.75;

// speed_gain * |wp1 - wp2|, m/s.
double desired_speed(const Waypoints& wp, double speed_gain = kDefaultSpeedGain);

// Mean wheel angular speed times wheel radius, m/s.
double linear_speed(const WheelFeedback& fb);

struct ControlWeights {
  double beta00 = 0.5;  // MLP steering
  double beta10 = 0.5;  // PID steering
  double beta01 = 0.5;  // MLP throttle
  double beta11 = 0.5;  // PID throttle
};

// beta00 = a2/(a2+a1), beta01 = a3/(a3+a1), complements fill the rest.
// Throws NonPositiveAlphaError unless every alpha is positive.
ControlWeights weights_from_alphas(double alpha1, double alpha2, double alpha3);

inline constexpr double kDefaultMinActuation = 0.1;

// Arbitrates between the two agents. An agent whose throttle is below the
// minimum actuation level cannot drive. When both can, a steering magnitude
// below the minimum hands steering to the other agent, otherwise steering and
// throttle are beta-blended.
Control fuse(const Control& mlp, const Control& pid, const ControlWeights& beta,
             double min_actuation = kDefaultMinActuation);

struct PidAgentConfig {
  PidGains lateral{-0.8, 0.0, -0.2, 2.0};
  PidGains longitudinal{0.8, 0.05, 0.0, 2.0};
  double speed_gain = kDefaultSpeedGain;
  // Heading error is divided by this before entering the lateral loop so the
  // gains act on a [-2, 2] range rather than raw degrees.
  double heading_error_scale_deg = 90.0;
};

// Lateral and longitudinal PID pair turning waypoints into controls. Holds
// per-episode state: one instance per simulated episode.
class PidAgent {
 public:
  explicit PidAgent(PidAgentConfig config = {});

  Control control(const Waypoints& wp, const WheelFeedback& fb, double dt);
  void reset();

  const PidAgentConfig& config() const { return config_; }

 private:
  PidAgentConfig config_;
  PidState lateral_;
  PidState longitudinal_;
};

}  // namespace routepilot
