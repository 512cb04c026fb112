#include "routepilot/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "routepilot/errors.hpp"

namespace routepilot {

double default_class_height(std::uint8_t cls) {
  using C = SemanticClass;
  switch (static_cast<C>(cls)) {
    case C::Building:
    case C::Pole:
    case C::TrafficLight:
    case C::Truck:
    case C::Bus:
    case C::Train:
      return 3.0;
    case C::TrafficSign:
      return 2.0;
    case C::Person:
    case C::Rider:
      return 1.7;
    case C::Wall:
    case C::Car:
      return 1.5;
    case C::Fence:
    case C::Motorcycle:
    case C::Bicycle:
      return 1.2;
    case C::Vegetation:
      return 1.0;
    default:
      return 0.0;
  }
}

World::World(GeoPoint origin, double x_min, double y_min, double x_max, double y_max, double cell_m,
             std::uint8_t default_class)
    : origin_(origin), x_min_(x_min), y_min_(y_min), cell_m_(cell_m) {
  validate(origin_);
  if (!(cell_m_ > 0.0)) throw InvalidArgument("world cell size must be positive");
  if (!(x_max > x_min) || !(y_max > y_min)) throw InvalidArgument("world bounds are empty");
  if (default_class >= kClassCount) throw InvalidArgument("default class out of range");
  nx_ = static_cast<std::size_t>(std::ceil((x_max - x_min) / cell_m_));
  ny_ = static_cast<std::size_t>(std::ceil((y_max - y_min) / cell_m_));
  if (nx_ * ny_ > (std::size_t{1} << 26)) throw InvalidArgument("world grid too large");
  classes_ = Raster<std::uint8_t>(ny_, nx_, default_class);
  heights_ = Raster<float>(ny_, nx_, static_cast<float>(default_class_height(default_class)));
  start.position = origin_;
}

std::uint8_t World::cell_class(long ix, long iy) const {
  if (!in_bounds(ix, iy)) return class_id(SemanticClass::None);
  return classes_(static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
}

float World::cell_height(long ix, long iy) const {
  if (!in_bounds(ix, iy)) return 0.0f;
  return heights_(static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
}

std::uint8_t World::class_at(double x, double y) const {
  return cell_class(static_cast<long>(std::floor((x - x_min_) / cell_m_)),
                    static_cast<long>(std::floor((y - y_min_) / cell_m_)));
}

float World::height_at(double x, double y) const {
  return cell_height(static_cast<long>(std::floor((x - x_min_) / cell_m_)),
                     static_cast<long>(std::floor((y - y_min_) / cell_m_)));
}

namespace {

double segment_distance(const LocalOffset& p, const LocalOffset& a, const LocalOffset& b) {
  const double vx = b.dx_m - a.dx_m;
  const double vy = b.dy_m - a.dy_m;
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.dx_m - a.dx_m) * vx + (p.dy_m - a.dy_m) * vy) / len2, 0.0, 1.0);
  return std::hypot(p.dx_m - (a.dx_m + t * vx), p.dy_m - (a.dy_m + t * vy));
}

}  // namespace

double distance_to_polyline(const LocalOffset& p, const std::vector<LocalOffset>& polyline) {
  if (polyline.empty()) throw InvalidArgument("empty polyline");
  if (polyline.size() == 1) return std::hypot(p.dx_m - polyline[0].dx_m, p.dy_m - polyline[0].dy_m);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    best = std::min(best, segment_distance(p, polyline[i], polyline[i + 1]));
  }
  return best;
}

// Calls fn(ix, iy) for every cell whose center lies inside the shape.
template <typename Fn>
void World::paint(const WorldShape& shape, Fn&& fn) {
  if (shape.cls >= kClassCount) throw InvalidArgument(fmt::format("shape class {} out of range", shape.cls));
  double bx0, by0, bx1, by1;
  if (shape.rect) {
    const auto& r = *shape.rect;
    bx0 = std::min(r[0], r[2]);
    bx1 = std::max(r[0], r[2]);
    by0 = std::min(r[1], r[3]);
    by1 = std::max(r[1], r[3]);
  } else {
    if (shape.polyline.empty() || !(shape.width_m > 0.0)) {
      throw InvalidArgument("polyline shape needs points and a positive width");
    }
    bx0 = by0 = std::numeric_limits<double>::infinity();
    bx1 = by1 = -std::numeric_limits<double>::infinity();
    for (const auto& p : shape.polyline) {
      bx0 = std::min(bx0, p.dx_m);
      bx1 = std::max(bx1, p.dx_m);
      by0 = std::min(by0, p.dy_m);
      by1 = std::max(by1, p.dy_m);
    }
    const double h = 0.5 * shape.width_m;
    bx0 -= h;
    by0 -= h;
    bx1 += h;
    by1 += h;
  }
  const long ix0 = std::max(0L, static_cast<long>(std::floor((bx0 - x_min_) / cell_m_)));
  const long iy0 = std::max(0L, static_cast<long>(std::floor((by0 - y_min_) / cell_m_)));
  const long ix1 = std::min(static_cast<long>(nx_) - 1, static_cast<long>(std::floor((bx1 - x_min_) / cell_m_)));
  const long iy1 = std::min(static_cast<long>(ny_) - 1, static_cast<long>(std::floor((by1 - y_min_) / cell_m_)));
  for (long iy = iy0; iy <= iy1; ++iy) {
    for (long ix = ix0; ix <= ix1; ++ix) {
      const double cx = x_min_ + (static_cast<double>(ix) + 0.5) * cell_m_;
      const double cy = y_min_ + (static_cast<double>(iy) + 0.5) * cell_m_;
      bool inside;
      if (shape.rect) {
        inside = cx >= bx0 && cx <= bx1 && cy >= by0 && cy <= by1;
      } else {
        inside = distance_to_polyline({cx, cy}, shape.polyline) <= 0.5 * shape.width_m;
      }
      if (inside) fn(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy));
    }
  }
}

void World::paint_ground(const WorldShape& shape) {
  paint(shape, [&](std::size_t ix, std::size_t iy) {
    classes_(iy, ix) = shape.cls;
    heights_(iy, ix) = 0.0f;
  });
}

void World::paint_obstacle(const WorldShape& shape) {
  const double h = shape.height_m > 0.0 ? shape.height_m : default_class_height(shape.cls);
  if (!(h > 0.0)) throw InvalidArgument(fmt::format("obstacle of class {} needs a positive height", shape.cls));
  paint(shape, [&](std::size_t ix, std::size_t iy) {
    classes_(iy, ix) = shape.cls;
    heights_(iy, ix) = static_cast<float>(h);
  });
}

std::vector<LocalOffset> route_polyline(const World& world, const Route& route) {
  std::vector<LocalOffset> out;
  out.reserve(route.size());
  for (const auto& p : route.points()) out.push_back(world.to_local(p));
  return out;
}

namespace {

using nlohmann::json;

WorldShape shape_from(const json& j) {
  WorldShape s;
  const int cls = j.at("class").get<int>();
  if (cls < 0 || cls >= kClassCount) throw FormatError(fmt::format("class id {} out of range", cls));
  s.cls = static_cast<std::uint8_t>(cls);
  if (j.contains("rect")) {
    const auto& r = j.at("rect");
    if (!r.is_array() || r.size() != 4) throw FormatError("rect must be [x0, y0, x1, y1]");
    s.rect = std::array<double, 4>{r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()};
  } else if (j.contains("polyline")) {
    for (const auto& p : j.at("polyline")) {
      if (!p.is_array() || p.size() != 2) throw FormatError("polyline points must be [x, y]");
      s.polyline.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    s.width_m = j.at("width").get<double>();
  } else {
    throw FormatError("shape needs a rect or a polyline");
  }
  s.height_m = j.value("height", 0.0);
  return s;
}

Route route_from(const json& j, const World& world, const std::filesystem::path& base_dir) {
  if (j.contains("file")) {
    std::filesystem::path p = j.at("file").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    return load_route(p);
  }
  std::vector<GeoPoint> pts;
  if (j.contains("local")) {
    for (const auto& p : j.at("local")) {
      if (!p.is_array() || p.size() != 2) throw FormatError("route local points must be [x, y]");
      pts.push_back(world.to_geo({p[0].get<double>(), p[1].get<double>()}));
    }
  } else if (j.contains("points")) {
    return parse_route(j.dump());
  } else {
    throw FormatError("route reference needs file, local or points");
  }
  return Route(std::move(pts));
}

}  // namespace

World parse_world(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(fmt::format("world file is not valid JSON: {}", e.what()));
  }
  try {
    const GeoPoint origin{j.at("origin").at("lat_deg").get<double>(), j.at("origin").at("lon_deg").get<double>()};
    const auto& b = j.at("bounds");
    const int def = j.value("default_class", static_cast<int>(class_id(SemanticClass::Terrain)));
    if (def < 0 || def >= kClassCount) throw FormatError("default_class out of range");
    World w(origin, b.at("x_min").get<double>(), b.at("y_min").get<double>(), b.at("x_max").get<double>(),
            b.at("y_max").get<double>(), j.value("cell_m", 0.25), static_cast<std::uint8_t>(def));
    for (const auto& g : j.value("ground", json::array())) w.paint_ground(shape_from(g));
    for (const auto& o : j.value("obstacles", json::array())) w.paint_obstacle(shape_from(o));
    if (j.contains("start")) {
      const auto& s = j.at("start");
      if (s.contains("lat_deg")) {
        w.start.position = {s.at("lat_deg").get<double>(), s.at("lon_deg").get<double>()};
      } else {
        w.start.position = w.to_geo({s.value("x", 0.0), s.value("y", 0.0)});
      }
      w.start.bearing_deg = normalize_bearing_deg(s.value("bearing_deg", 0.0));
    }
    if (j.contains("route")) w.route = route_from(j.at("route"), w, base_dir);
    return w;
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("malformed world file: {}", e.what()));
  } catch (const InvalidArgument& e) {
    throw FormatError(fmt::format("invalid world: {}", e.what()));
  }
}

World load_world(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(fmt::format("cannot open world file {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_world(ss.str(), path.parent_path());
}

}  // namespace routepilot
