#include "routepilot/geodesy.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "routepilot/errors.hpp"

namespace routepilot {

LocalPoint operator+(LocalPoint a, LocalPoint b) { return {a.x_m + b.x_m, a.y_m + b.y_m}; }
LocalPoint operator-(LocalPoint a, LocalPoint b) { return {a.x_m - b.x_m, a.y_m - b.y_m}; }
LocalPoint operator*(double s, LocalPoint p) { return {s * p.x_m, s * p.y_m}; }
double norm(LocalPoint p) { return std::hypot(p.x_m, p.y_m); }
double norm(LocalOffset o) { return std::hypot(o.dx_m, o.dy_m); }

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

void validate(const GeoPoint& p) {
  if (!std::isfinite(p.lat_deg) || !std::isfinite(p.lon_deg)) {
    throw InvalidArgument("geo point has non-finite coordinates");
  }
  if (p.lat_deg < -90.0 || p.lat_deg > 90.0) {
    throw InvalidArgument(fmt::format("latitude {} outside [-90, 90]", p.lat_deg));
  }
  if (p.lon_deg < -180.0 || p.lon_deg > 180.0) {
    throw InvalidArgument(fmt::format("longitude {} outside [-180, 180]", p.lon_deg));
  }
}

double normalize_bearing_deg(double bearing_deg) {
  if (!std::isfinite(bearing_deg)) {
    throw InvalidArgument("bearing is not finite");
  }
  double b = std::fmod(bearing_deg, 360.0);
  if (b < 0.0) b += 360.0;
  // fmod of a tiny negative value can round back up to exactly 360.
  if (b >= 360.0) b = 0.0;
  return b;
}

namespace {

void check_projectable(const GeoPoint& origin, const GeoPoint& target) {
  validate(origin);
  validate(target);
  if (std::abs(origin.lat_deg) >= earth::kMaxAbsLatitudeDeg ||
      std::abs(target.lat_deg) >= earth::kMaxAbsLatitudeDeg) {
    throw PolarRegionError(fmt::format("latitude beyond +/-{} deg", earth::kMaxAbsLatitudeDeg));
  }
  if (std::abs(target.lon_deg - origin.lon_deg) > 180.0) {
    throw AntimeridianError("longitude difference crosses the antimeridian");
  }
}

}  // namespace

LocalOffset geo_to_offset(const GeoPoint& origin, const GeoPoint& target) {
  check_projectable(origin, target);
  const double east_scale =
      earth::kEquatorialCircumferenceM * std::cos(deg_to_rad(origin.lat_deg)) / 360.0;
  const double north_scale = earth::kMeridionalCircumferenceM / 360.0;
  return {(target.lon_deg - origin.lon_deg) * east_scale,
          (target.lat_deg - origin.lat_deg) * north_scale};
}

GeoPoint offset_to_geo(const GeoPoint& origin, const LocalOffset& offset) {
  validate(origin);
  if (std::abs(origin.lat_deg) >= earth::kMaxAbsLatitudeDeg) {
    throw PolarRegionError("origin latitude too close to a pole");
  }
  if (!std::isfinite(offset.dx_m) || !std::isfinite(offset.dy_m)) {
    throw InvalidArgument("offset is not finite");
  }
  const double east_scale =
      earth::kEquatorialCircumferenceM * std::cos(deg_to_rad(origin.lat_deg)) / 360.0;
  const double north_scale = earth::kMeridionalCircumferenceM / 360.0;
  GeoPoint out{origin.lat_deg + offset.dy_m / north_scale,
               origin.lon_deg + offset.dx_m / east_scale};
  validate(out);
  return out;
}

std::array<double, 4> rotation_matrix(double theta_rad) {
  const double c = std::cos(theta_rad);
  const double s = std::sin(theta_rad);
  return {c, -s, s, c};
}

LocalPoint offset_to_vehicle_frame(const LocalOffset& offset, double bearing_deg) {
  if (!std::isfinite(offset.dx_m) || !std::isfinite(offset.dy_m) || !std::isfinite(bearing_deg)) {
    throw InvalidArgument("non-finite input to vehicle frame transform");
  }
  const auto r = rotation_matrix(-deg_to_rad(bearing_deg));
  // Transposed product: [x, y] = R^T [dx, dy].
  return {r[0] * offset.dx_m + r[2] * offset.dy_m, r[1] * offset.dx_m + r[3] * offset.dy_m};
}

LocalOffset vehicle_frame_to_offset(const LocalPoint& point, double bearing_deg) {
  if (!std::isfinite(point.x_m) || !std::isfinite(point.y_m) || !std::isfinite(bearing_deg)) {
    throw InvalidArgument("non-finite input to vehicle frame transform");
  }
  const auto r = rotation_matrix(-deg_to_rad(bearing_deg));
  return {r[0] * point.x_m + r[1] * point.y_m, r[2] * point.x_m + r[3] * point.y_m};
}

LocalPoint route_point_to_local(const Pose& pose, const GeoPoint& route_point) {
  return offset_to_vehicle_frame(geo_to_offset(pose.position, route_point), pose.bearing_deg);
}

}  // namespace routepilot
