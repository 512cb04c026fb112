#include "routepilot/vehicle_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "routepilot/errors.hpp"

namespace routepilot {

void VehicleParams::validate() const {
  for (double v : {wheel_radius_m, track_width_m, v_max, yaw_rate_max, dt, lag_tau_s, length_m, width_m}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("vehicle parameters must be positive");
  }
}

VehicleState step(const VehicleState& state, const Control& control, const VehicleParams& params) {
  const Control c = control.clamped();
  const double decay = std::exp(-params.dt / params.lag_tau_s);
  const double v_cmd = c.throttle * params.v_max;
  const double r_cmd = c.steering * params.yaw_rate_max;

  VehicleState next = state;
  next.v = std::clamp(v_cmd + (state.v - v_cmd) * decay, 0.0, params.v_max);
  next.yaw_rate = r_cmd + (state.yaw_rate - r_cmd) * decay;

  const double psi0 = deg_to_rad(state.pose.bearing_deg);
  const double psi1 = psi0 + next.yaw_rate * params.dt;
  LocalOffset move;
  if (std::abs(next.yaw_rate) < 1e-9) {
    move = {next.v * params.dt * std::sin(psi0), next.v * params.dt * std::cos(psi0)};
  } else {
    const double radius = next.v / next.yaw_rate;
    move = {radius * (std::cos(psi0) - std::cos(psi1)), radius * (std::sin(psi1) - std::sin(psi0))};
  }
  next.pose.position = offset_to_geo(state.pose.position, move);
  next.pose.bearing_deg = normalize_bearing_deg(rad_to_deg(psi1));
  next.time_s = state.time_s + params.dt;
  return next;
}

WheelFeedback wheel_speeds(const VehicleState& state, const VehicleParams& params) {
  const double half = 0.5 * params.track_width_m * state.yaw_rate;
  WheelFeedback fb;
  fb.wheel_radius_m = params.wheel_radius_m;
  fb.omega_l = std::max(0.0, (state.v + half) / params.wheel_radius_m);
  fb.omega_r = std::max(0.0, (state.v - half) / params.wheel_radius_m);
  return fb;
}

void SensorNoise::validate() const {
  if (!(gnss_sigma_m >= 0.0) || !(bearing_sigma_deg >= 0.0) || !(depth_relative_sigma >= 0.0)) {
    throw InvalidArgument("noise sigmas must be non-negative");
  }
}

NoiseStream::NoiseStream(const SensorNoise& noise) : noise_(noise), engine_(noise.seed) { noise_.validate(); }

double NoiseStream::gaussian(double sigma) {
  if (sigma == 0.0) return 0.0;
  return sigma * unit_(engine_);
}

namespace {

struct ColumnFill {
  DepthMap& depth;
  SegMap& seg;
  const CameraIntrinsics& intr;
  std::size_t u;
  std::size_t fill_bottom;  // rows [fill_bottom, height) are done

  // A span [s0, s1] of forward distance over one cell of height `h_cell`.
  void cell(double s0, double s1, double h_cell, std::uint8_t cls) {
    if (fill_bottom == 0) return;
    const double cam_h = intr.cam_height_m;
    double v_start_f;
    if (h_cell >= cam_h) {
      v_start_f = s0 > 0.0 ? intr.cy + intr.fy * (cam_h - h_cell) / s0 : -1.0;
    } else {
      v_start_f = intr.cy + intr.fy * (cam_h - h_cell) / s1;
    }
    const double clamped = std::clamp(std::ceil(v_start_f), 0.0, static_cast<double>(fill_bottom));
    const auto v_start = static_cast<std::size_t>(clamped);
    for (std::size_t v = v_start; v < fill_bottom; ++v) {
      const double k = (static_cast<double>(v) - intr.cy) / intr.fy;
      double d = s0;
      if (h_cell < cam_h && k > 0.0) d = std::max(s0, (cam_h - h_cell) / k);
      depth(v, u) = static_cast<float>(d);
      seg(v, u) = cls;
    }
    fill_bottom = std::min(fill_bottom, v_start);
  }
};

}  // namespace

void render_camera(const World& world, const VehicleState& state, const CameraIntrinsics& intr, DepthMap& depth,
                   SegMap& seg, const RenderSettings& settings) {
  intr.validate();
  if (intr.cam_pitch_deg != 0.0) throw InvalidArgument("the renderer supports level cameras only");
  depth = DepthMap(intr.height, intr.width, std::numeric_limits<float>::infinity());
  seg = SegMap(intr.height, intr.width, class_id(SemanticClass::Sky));

  const LocalOffset pos = world.to_local(state.pose.position);
  const double psi = deg_to_rad(state.pose.bearing_deg);
  const double fwd_x = std::sin(psi), fwd_y = std::cos(psi);
  const double right_x = std::cos(psi), right_y = -std::sin(psi);
  const double cell = world.cell_m();
  const double ox = (pos.dx_m - world.x_min()) / cell;
  const double oy = (pos.dy_m - world.y_min()) / cell;
  const double max_s = settings.max_range_m;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  for (std::size_t u = 0; u < intr.width; ++u) {
    const double a = (static_cast<double>(u) - intr.cx) / intr.fx;
    // Ray direction per unit of forward distance, in cells.
    const double dx = (a * right_x + fwd_x) / cell;
    const double dy = (a * right_y + fwd_y) / cell;
    long ix = static_cast<long>(std::floor(ox));
    long iy = static_cast<long>(std::floor(oy));
    const long step_x = dx > 0.0 ? 1 : -1;
    const long step_y = dy > 0.0 ? 1 : -1;
    double t_max_x = dx > 0.0 ? (static_cast<double>(ix) + 1.0 - ox) / dx
                     : dx < 0.0 ? (ox - static_cast<double>(ix)) / -dx
                                : kInf;
    double t_max_y = dy > 0.0 ? (static_cast<double>(iy) + 1.0 - oy) / dy
                     : dy < 0.0 ? (oy - static_cast<double>(iy)) / -dy
                                : kInf;
    const double t_delta_x = dx != 0.0 ? 1.0 / std::abs(dx) : kInf;
    const double t_delta_y = dy != 0.0 ? 1.0 / std::abs(dy) : kInf;

    ColumnFill fill{depth, seg, intr, u, intr.height};
    double s0 = 0.0;
    while (s0 < max_s && fill.fill_bottom > 0) {
      const double s1 = std::min({t_max_x, t_max_y, max_s});
      fill.cell(s0, s1, world.cell_height(ix, iy), world.cell_class(ix, iy));
      if (t_max_x < t_max_y) {
        ix += step_x;
        s0 = t_max_x;
        t_max_x += t_delta_x;
      } else {
        iy += step_y;
        s0 = t_max_y;
        t_max_y += t_delta_y;
      }
    }
  }
}

ObservationSet sense(const World& world, const VehicleState& state, const VehicleParams& params,
                     const CameraIntrinsics& intr, NoiseStream& noise) {
  ObservationSet obs;
  render_camera(world, state, intr, obs.depth, obs.seg);

  const auto& n = noise.settings();
  const LocalOffset gnss_err{noise.gaussian(n.gnss_sigma_m), noise.gaussian(n.gnss_sigma_m)};
  obs.gnss = offset_to_geo(state.pose.position, gnss_err);
  obs.bearing_deg = normalize_bearing_deg(state.pose.bearing_deg + noise.gaussian(n.bearing_sigma_deg));
  if (n.depth_relative_sigma > 0.0) {
    for (float& d : obs.depth.data()) {
      if (std::isfinite(d)) d = static_cast<float>(d * (1.0 + noise.gaussian(n.depth_relative_sigma)));
    }
  }
  obs.wheels = wheel_speeds(state, params);
  return obs;
}

std::string_view to_string(InterventionCause c) {
  return c == InterventionCause::PredictedCollision ? "PredictedCollision" : "OffRoute";
}

bool footprint_collides(const World& world, const VehicleState& state, const VehicleParams& params) {
  const LocalOffset pos = world.to_local(state.pose.position);
  const double psi = deg_to_rad(state.pose.bearing_deg);
  const double fx = std::sin(psi), fy = std::cos(psi);
  const double rx = std::cos(psi), ry = -std::sin(psi);
  const double spacing = 0.5 * world.cell_m();
  const int nl = static_cast<int>(std::ceil(params.length_m / spacing));
  const int nw = static_cast<int>(std::ceil(params.width_m / spacing));
  for (int i = 0; i <= nl; ++i) {
    const double along = -0.5 * params.length_m + params.length_m * i / nl;
    for (int j = 0; j <= nw; ++j) {
      const double across = -0.5 * params.width_m + params.width_m * j / nw;
      if (world.solid_at(pos.dx_m + along * fx + across * rx, pos.dy_m + along * fy + across * ry)) return true;
    }
  }
  return false;
}

bool rollout_collides(const World& world, const VehicleState& state, const Control& control,
                      const VehicleParams& params, double horizon_s) {
  if (footprint_collides(world, state, params)) return true;
  const int steps = static_cast<int>(std::ceil(horizon_s / params.dt - 1e-9));
  VehicleState s = state;
  for (int i = 0; i < steps; ++i) {
    s = step(s, control, params);
    if (footprint_collides(world, s, params)) return true;
  }
  return false;
}

std::optional<InterventionCause> check_intervention(const World& world, const VehicleState& state,
                                                    const Control& control, const VehicleParams& params,
                                                    const std::vector<LocalOffset>& route_polyline,
                                                    const InterventionConfig& config) {
  if (rollout_collides(world, state, control, params, config.horizon_s)) return InterventionCause::PredictedCollision;
  if (distance_to_polyline(world.to_local(state.pose.position), route_polyline) > config.off_route_m) {
    return InterventionCause::OffRoute;
  }
  return std::nullopt;
}

Supervisor::Supervisor(const World& world, std::vector<LocalOffset> route_polyline, VehicleParams params,
                       InterventionConfig config)
    : world_(world), polyline_(std::move(route_polyline)), params_(params), config_(config) {
  if (polyline_.empty()) throw InvalidArgument("supervisor needs a route polyline");
  params_.validate();
}

namespace {

// Point `ahead` meters further along the polyline than the closest point to p.
LocalOffset lookahead_point(const std::vector<LocalOffset>& line, const LocalOffset& p, double ahead) {
  if (line.size() == 1) return line.front();
  std::size_t best_i = 0;
  double best_t = 0.0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const double vx = line[i + 1].dx_m - line[i].dx_m;
    const double vy = line[i + 1].dy_m - line[i].dy_m;
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((p.dx_m - line[i].dx_m) * vx + (p.dy_m - line[i].dy_m) * vy) / len2, 0.0, 1.0);
    const double d = std::hypot(p.dx_m - (line[i].dx_m + t * vx), p.dy_m - (line[i].dy_m + t * vy));
    if (d < best_d) {
      best_d = d;
      best_i = i;
      best_t = t;
    }
  }
  double remaining = ahead;
  std::size_t i = best_i;
  double t = best_t;
  while (true) {
    const double vx = line[i + 1].dx_m - line[i].dx_m;
    const double vy = line[i + 1].dy_m - line[i].dy_m;
    const double len = std::hypot(vx, vy);
    const double left = (1.0 - t) * len;
    if (remaining <= left || i + 2 >= line.size()) {
      const double tt = len > 0.0 ? std::min(1.0, t + remaining / len) : 1.0;
      return {line[i].dx_m + tt * vx, line[i].dy_m + tt * vy};
    }
    remaining -= left;
    ++i;
    t = 0.0;
  }
}

}  // namespace

Control Supervisor::takeover_control(const VehicleState& state) const {
  const LocalOffset pos = world_.to_local(state.pose.position);
  const LocalOffset target = lookahead_point(polyline_, pos, config_.lookahead_m);
  const LocalPoint local =
      offset_to_vehicle_frame({target.dx_m - pos.dx_m, target.dy_m - pos.dy_m}, state.pose.bearing_deg);
  const double l2 = local.x_m * local.x_m + local.y_m * local.y_m;
  double curvature = l2 > 1e-9 ? 2.0 * local.x_m / l2 : 0.0;
  // Target behind the vehicle: turn toward it at full lock.
  if (local.y_m < 0.0) curvature = local.x_m >= 0.0 ? 1e3 : -1e3;
  const double throttle = std::clamp(config_.supervisor_speed / params_.v_max, 0.0, 1.0);
  const Control pursuit =
      Control{config_.supervisor_speed * curvature / params_.yaw_rate_max, throttle}.clamped();
  if (!rollout_collides(world_, state, pursuit, params_, config_.horizon_s)) return pursuit;

  // Steering fan ordered by closeness to the pursuit command.
  std::vector<double> fan;
  for (int i = -8; i <= 8; ++i) fan.push_back(i * 0.125);
  std::stable_sort(fan.begin(), fan.end(), [&](double a, double b) {
    return std::abs(a - pursuit.steering) < std::abs(b - pursuit.steering);
  });
  for (double st : fan) {
    const Control c{st, throttle};
    if (!rollout_collides(world_, state, c, params_, config_.horizon_s)) return c;
  }
  return {pursuit.steering, 0.0};
}

Control Supervisor::update(int tick, const VehicleState& state, const Control& policy) {
  if (!active_) {
    const auto cause = check_intervention(world_, state, policy, params_, polyline_, config_);
    if (!cause) return policy;
    active_ = InterventionEvent{tick, tick, *cause};
  } else {
    const double off = distance_to_polyline(world_.to_local(state.pose.position), polyline_);
    if (off <= config_.release_m && !rollout_collides(world_, state, policy, params_, config_.horizon_s)) {
      events_.push_back(*active_);
      active_.reset();
      return policy;
    }
    active_->end_tick = tick;
  }
  return takeover_control(state);
}

void Supervisor::finish(int last_tick) {
  if (!active_) return;
  active_->end_tick = std::max(active_->start_tick, last_tick);
  events_.push_back(*active_);
  active_.reset();
}

}  // namespace routepilot
