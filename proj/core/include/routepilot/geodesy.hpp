#pragma once

// Global (latitude/longitude, compass bearing) to vehicle-local conversions.
//
// Frames used throughout the library:
//   * LocalOffset: flat-earth east/north displacement in meters.
//   * LocalPoint:  vehicle frame, x to the right, y forward, meters.
// Bearings are degrees clockwise from true north, normalized to [0, 360).

#include <array>

namespace routepilot {

struct GeoPoint {
  double lat_deg = 0.0;
  double lon_deg = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct Pose {
  GeoPoint position;
  double bearing_deg = 0.0;
};

struct LocalOffset {
  double dx_m = 0.0;  // east
  double dy_m = 0.0;  // north
};

struct LocalPoint {
  double x_m = 0.0;  // right
  double y_m = 0.0;  // forward

  friend bool operator==(const LocalPoint&, const LocalPoint&) = default;
};

LocalPoint operator+(LocalPoint a, LocalPoint b);
LocalPoint operator-(LocalPoint a, LocalPoint b);
LocalPoint operator*(double s, LocalPoint p);
double norm(LocalPoint p);
double norm(LocalOffset o);

namespace earth {
inline constexpr double kEquatorialCircumferenceM = 40'075'000.0;
inline constexpr double kMeridionalCircumferenceM = 40'008'000.0;
// Beyond this latitude cos(lat) degenerates and the projection is rejected.
inline constexpr double kMaxAbsLatitudeDeg = 89.0;
}  // namespace earth

// Throws InvalidArgument on non-finite or out-of-range coordinates.
void validate(const GeoPoint& p);

double normalize_bearing_deg(double bearing_deg);
double deg_to_rad(double deg);
double rad_to_deg(double rad);

// Flat-earth displacement from `origin` to `target`, scaled by the equatorial
// and meridional circumferences. cos() is taken of the origin latitude in
// radians.
//
// Throws PolarRegionError when either latitude is at or beyond 89 degrees and
// AntimeridianError when the longitude difference exceeds 180 degrees.
LocalOffset geo_to_offset(const GeoPoint& origin, const GeoPoint& target);

// Inverse of geo_to_offset about the same origin.
GeoPoint offset_to_geo(const GeoPoint& origin, const LocalOffset& offset);

// Row-major 2x2 rotation [[cos, -sin], [sin, cos]] for an angle in radians
// measured counter-clockwise.
std::array<double, 4> rotation_matrix(double theta_rad);

// Rotates an east/north offset into the vehicle frame. The compass bearing is
// clockwise, so the counter-clockwise rotation angle is -bearing and the
// result is R(-bearing)^T * [dx, dy].
LocalPoint offset_to_vehicle_frame(const LocalOffset& offset, double bearing_deg);

// Inverse of offset_to_vehicle_frame.
LocalOffset vehicle_frame_to_offset(const LocalPoint& point, double bearing_deg);

// Global route point expressed in the vehicle frame of `pose`.
LocalPoint route_point_to_local(const Pose& pose, const GeoPoint& route_point);

}  // namespace routepilot
