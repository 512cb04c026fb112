#include "plot.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "routepilot/errors.hpp"

namespace routepilot::tools {
namespace {

struct Extent {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(const LocalOffset& p) {
    x0 = std::min(x0, p.dx_m);
    y0 = std::min(y0, p.dy_m);
    x1 = std::max(x1, p.dx_m);
    y1 = std::max(y1, p.dy_m);
  }
};

std::vector<LocalOffset> route_offsets(const DrivingRecord& rec, const GeoPoint& origin) {
  std::vector<LocalOffset> out;
  if (!rec.header.contains("route")) return out;
  for (const auto& p : rec.header.at("route")) out.push_back(geo_to_offset(origin, {p[0].get<double>(), p[1].get<double>()}));
  return out;
}

}  // namespace

std::string trajectory_svg(const DrivingRecord& rec) {
  if (rec.ticks.empty()) throw FormatError("record has no ticks to plot");
  const GeoPoint origin = rec.ticks.front().gnss;
  std::vector<LocalOffset> track;
  Extent ext;
  for (const auto& t : rec.ticks) {
    track.push_back(geo_to_offset(origin, t.gnss));
    ext.add(track.back());
  }
  const auto route = route_offsets(rec, origin);
  for (const auto& p : route) ext.add(p);

  constexpr double kSize = 600.0;
  constexpr double kMargin = 20.0;
  const double span = std::max({ext.x1 - ext.x0, ext.y1 - ext.y0, 1.0});
  const double scale = (kSize - 2.0 * kMargin) / span;
  auto sx = [&](double x) { return kMargin + (x - ext.x0) * scale; };
  auto sy = [&](double y) { return kSize - kMargin - (y - ext.y0) * scale; };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{0:.0f}\" viewBox=\"0 0 {0:.0f} {0:.0f}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kSize);
  if (!route.empty()) {
    svg += "<polyline fill=\"none\" stroke=\"#999999\" stroke-width=\"2\" stroke-dasharray=\"6 4\" points=\"";
    for (const auto& p : route) svg += fmt::format("{:.2f},{:.2f} ", sx(p.dx_m), sy(p.dy_m));
    svg += "\"/>\n";
    for (const auto& p : route) {
      svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"#999999\"/>\n", sx(p.dx_m), sy(p.dy_m));
    }
  }
  svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (const auto& p : track) svg += fmt::format("{:.2f},{:.2f} ", sx(p.dx_m), sy(p.dy_m));
  svg += "\"/>\n";
  for (std::size_t i = 0; i < track.size(); ++i) {
    if (!rec.ticks[i].intervention_flag) continue;
    svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"#d62728\"/>\n", sx(track[i].dx_m),
                       sy(track[i].dy_m));
  }
  svg += fmt::format("<text x=\"{:.0f}\" y=\"{:.0f}\" font-size=\"12\" font-family=\"monospace\">{:.1f} m</text>\n",
                     kMargin, kMargin, span);
  svg += "</svg>\n";
  return svg;
}

std::string tick_csv(const DrivingRecord& rec) {
  std::string out = "t,time_s,x_m,y_m,bearing_deg,steering,throttle,route_index,command,intervention\n";
  if (rec.ticks.empty()) return out;
  const GeoPoint origin = rec.ticks.front().gnss;
  for (const auto& t : rec.ticks) {
    const LocalOffset p = geo_to_offset(origin, t.gnss);
    out += fmt::format("{},{:.3f},{:.4f},{:.4f},{:.3f},{:.4f},{:.4f},{},{},{}\n", t.t, t.time_s, p.dx_m, p.dy_m,
                       t.bearing_deg, t.steering, t.throttle, t.route_index, to_string(t.command),
                       t.intervention_flag ? 1 : 0);
  }
  return out;
}

}  // namespace routepilot::tools
