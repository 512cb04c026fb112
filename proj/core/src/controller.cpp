#include "routepilot/controller.hpp"

#include <algorithm>
#include <cmath>

#include "routepilot/errors.hpp"

namespace routepilot {
namespace {

constexpr double kDegenerateAimM = 1e-6;

}  // namespace

Control Control::clamped() const {
  return {std::clamp(steering, kSteeringRange.lo, kSteeringRange.hi),
          std::clamp(throttle, kThrottleRange.lo, kThrottleRange.hi)};
}

double pid_step(PidState& state, const PidGains& gains, double error, double dt, OutputRange range) {
  if (!(dt > 0.0)) throw InvalidArgument("pid_step requires dt > 0");
  if (!std::isfinite(error)) throw InvalidArgument("pid_step error is not finite");
  state.integral = std::clamp(state.integral + error * dt, -gains.integral_limit, gains.integral_limit);
  const double derivative = (error - state.prev_error) / dt;
  state.prev_error = error;
  const double out = gains.kp * error + gains.ki * state.integral + gains.kd * derivative;
  return std::clamp(out, range.lo, range.hi);
}

LocalPoint aim_point(const Waypoints& wp) { return 0.5 * (wp.wp1 + wp.wp2); }

double heading_error_deg(const LocalPoint& aim) {
  if (norm(aim) < kDegenerateAimM) throw DegenerateAimError("aim point coincides with the vehicle");
  double e = rad_to_deg(std::atan2(aim.y_m, aim.x_m)) - 90.0;
  if (e <= -180.0) e += 360.0;
  return e;
}

double desired_speed(const Waypoints& wp, double speed_gain) { return speed_gain * norm(wp.wp1 - wp.wp2); }

double linear_speed(const WheelFeedback& fb) { return 0.5 * (fb.omega_l + fb.omega_r) * fb.wheel_radius_m; }

ControlWeights weights_from_alphas(double alpha1, double alpha2, double alpha3) {
  if (!(alpha1 > 0.0) || !(alpha2 > 0.0) || !(alpha3 > 0.0) || !std::isfinite(alpha1) ||
      !std::isfinite(alpha2) || !std::isfinite(alpha3)) {
    throw NonPositiveAlphaError("loss weights must be positive and finite");
  }
  ControlWeights w;
  w.beta00 = alpha2 / (alpha2 + alpha1);
  w.beta10 = 1.0 - w.beta00;
  w.beta01 = alpha3 / (alpha3 + alpha1);
  w.beta11 = 1.0 - w.beta01;
  return w;
}

Control fuse(const Control& mlp, const Control& pid, const ControlWeights& beta, double min_actuation) {
  const bool mlp_drives = mlp.throttle >= min_actuation;
  const bool pid_drives = pid.throttle >= min_actuation;
  Control out;
  if (mlp_drives && pid_drives) {
    const bool mlp_steers = std::abs(mlp.steering) >= min_actuation;
    const bool pid_steers = std::abs(pid.steering) >= min_actuation;
    if (mlp_steers && !pid_steers) {
      out.steering = mlp.steering;
    } else if (!mlp_steers && pid_steers) {
      out.steering = pid.steering;
    } else {
      out.steering = beta.beta00 * mlp.steering + beta.beta10 * pid.steering;
    }
    out.throttle = beta.beta01 * mlp.throttle + beta.beta11 * pid.throttle;
  } else if (mlp_drives) {
    out = mlp;
  } else if (pid_drives) {
    out = pid;
  }
  return out.clamped();
}

PidAgent::PidAgent(PidAgentConfig config) : config_(config) {
  if (!(config_.heading_error_scale_deg > 0.0)) throw InvalidArgument("heading error scale must be positive");
}

void PidAgent::reset() {
  lateral_.reset();
  longitudinal_.reset();
}

Control PidAgent::control(const Waypoints& wp, const WheelFeedback& fb, double dt) {
  const LocalPoint aim = aim_point(wp);
  // A degenerate aim means "stay put": no heading error.
  const double heading = norm(aim) < kDegenerateAimM ? 0.0 : heading_error_deg(aim);
  Control c;
  c.steering = pid_step(lateral_, config_.lateral, heading / config_.heading_error_scale_deg, dt, kSteeringRange);
  c.throttle = pid_step(longitudinal_, config_.longitudinal, desired_speed(wp, config_.speed_gain) - linear_speed(fb),
                        dt, kThrottleRange);
  return c;
}

}  // namespace routepilot
