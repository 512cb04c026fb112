#include "routepilot/route.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "routepilot/errors.hpp"

namespace routepilot {

Route::Route(std::vector<GeoPoint> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw InvalidArgument("a route needs at least two points");
  }
  for (const auto& p : points_) validate(p);
}

std::vector<std::size_t> Route::spacing_warnings() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const double d = norm(geo_to_offset(points_[i], points_[i + 1]));
    if (d < kMinSpacingM || d > kMaxSpacingM) out.push_back(i);
  }
  return out;
}

Route parse_route(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(fmt::format("route file is not valid JSON: {}", e.what()));
  }
  const nlohmann::json* arr = &doc;
  if (doc.is_object()) {
    if (!doc.contains("points")) throw FormatError("route object has no \"points\" array");
    arr = &doc.at("points");
  }
  if (!arr->is_array()) throw FormatError("route must be an array of points");
  std::vector<GeoPoint> pts;
  pts.reserve(arr->size());
  for (const auto& item : *arr) {
    if (!item.is_object() || !item.contains("lat_deg") || !item.contains("lon_deg") ||
        !item["lat_deg"].is_number() || !item["lon_deg"].is_number()) {
      throw FormatError("route point must be {\"lat_deg\": number, \"lon_deg\": number}");
    }
    pts.push_back({item["lat_deg"].get<double>(), item["lon_deg"].get<double>()});
  }
  return Route(std::move(pts));
}

Route load_route(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(fmt::format("cannot open route file {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_route(ss.str());
}

void save_route(const Route& route, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError(fmt::format("cannot write route file {}", path.string()));
  out << "[\n";
  for (std::size_t i = 0; i < route.size(); ++i) {
    out << fmt::format("  {{\"lat_deg\": {:.9f}, \"lon_deg\": {:.9f}}}{}\n", route[i].lat_deg,
                       route[i].lon_deg, i + 1 < route.size() ? "," : "");
  }
  out << "]\n";
}

std::string_view to_string(NavCommand c) {
  switch (c) {
    case NavCommand::TurnLeft:
      return "TurnLeft";
    case NavCommand::TurnRight:
      return "TurnRight";
    case NavCommand::GoStraight:
      return "GoStraight";
  }
  return "GoStraight";
}

RouteTracker::RouteTracker(Route r, double switch_radius) : route(std::move(r)), switch_radius_m(switch_radius) {
  if (!(switch_radius_m > 0.0)) throw InvalidArgument("switch radius must be positive");
}

AdvanceResult advance(RouteTracker tracker, const Pose& pose) {
  const std::size_t last = tracker.route.size() - 1;
  bool finished = false;
  while (true) {
    const double d = norm(geo_to_offset(pose.position, tracker.route[tracker.current_index]));
    if (d >= tracker.switch_radius_m) break;
    if (tracker.current_index == last) {
      finished = true;
      break;
    }
    ++tracker.current_index;
  }
  return {std::move(tracker), finished};
}

RouteWindow window(const RouteTracker& tracker, const Pose& pose) {
  const std::size_t last = tracker.route.size() - 1;
  const std::size_t i = std::min(tracker.current_index, last);
  const std::size_t j = std::min(i + 1, last);
  return {route_point_to_local(pose, tracker.route[i]), route_point_to_local(pose, tracker.route[j])};
}

NavCommand command(const RouteWindow& w) {
  if (w.rp1.x_m <= -4.0 || w.rp2.x_m <= -8.0) return NavCommand::TurnLeft;
  if (w.rp1.x_m >= 4.0 || w.rp2.x_m >= 8.0) return NavCommand::TurnRight;
  return NavCommand::GoStraight;
}

}  // namespace routepilot
