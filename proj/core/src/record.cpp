#include "routepilot/record.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "routepilot/errors.hpp"
#include "routepilot/predictor.hpp"

namespace routepilot {
namespace {

using nlohmann::json;

json point_json(const LocalPoint& p) { return json::array({p.x_m, p.y_m}); }

LocalPoint point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw FormatError("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json waypoints_json(const Waypoints& w) { return json::array({point_json(w.wp1), point_json(w.wp2), point_json(w.wp3)}); }

Waypoints waypoints_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected three waypoints");
  return {point_from(j[0]), point_from(j[1]), point_from(j[2])};
}

json control_json(const Control& c) { return {{"steering", c.steering}, {"throttle", c.throttle}}; }

Control control_from(const json& j) { return {j.at("steering").get<double>(), j.at("throttle").get<double>()}; }

NavCommand command_from(const std::string& s) {
  if (s == "TurnLeft") return NavCommand::TurnLeft;
  if (s == "TurnRight") return NavCommand::TurnRight;
  if (s == "GoStraight") return NavCommand::GoStraight;
  throw FormatError(fmt::format("unknown command '{}'", s));
}

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> optional_string_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

json to_json(const RecordTick& tick) {
  json j;
  j["t"] = tick.t;
  j["time_s"] = tick.time_s;
  j["gnss"] = {{"lat", tick.gnss.lat_deg}, {"lon", tick.gnss.lon_deg}};
  j["bearing_deg"] = tick.bearing_deg;
  j["omega_l"] = tick.omega_l;
  j["omega_r"] = tick.omega_r;
  j["steering"] = tick.steering;
  j["throttle"] = tick.throttle;
  j["control_pred"] = control_json(tick.control_pred);
  j["mlp_control"] = control_json(tick.mlp_control);
  j["pid_control"] = control_json(tick.pid_control);
  j["route_index"] = tick.route_index;
  j["rp_window"] = {{"rp1", point_json(tick.rp_window.rp1)}, {"rp2", point_json(tick.rp_window.rp2)}};
  j["command"] = std::string(to_string(tick.command));
  j["depth_path"] = optional_string(tick.depth_path);
  j["seg_path"] = optional_string(tick.seg_path);
  j["waypoints_pred"] = waypoints_json(tick.waypoints_pred);
  j["waypoints_gt"] = tick.waypoints_gt ? waypoints_json(*tick.waypoints_gt) : json(nullptr);
  j["intervention_flag"] = tick.intervention_flag;
  return j;
}

RecordTick tick_from_json(const json& j) {
  try {
    RecordTick t;
    t.t = j.at("t").get<int>();
    t.time_s = j.value("time_s", t.t * kRecordDtS);
    t.gnss = {j.at("gnss").at("lat").get<double>(), j.at("gnss").at("lon").get<double>()};
    t.bearing_deg = j.at("bearing_deg").get<double>();
    t.omega_l = j.at("omega_l").get<double>();
    t.omega_r = j.at("omega_r").get<double>();
    t.steering = j.at("steering").get<double>();
    t.throttle = j.at("throttle").get<double>();
    t.control_pred = j.contains("control_pred") ? control_from(j.at("control_pred")) : Control{t.steering, t.throttle};
    if (j.contains("mlp_control")) t.mlp_control = control_from(j.at("mlp_control"));
    if (j.contains("pid_control")) t.pid_control = control_from(j.at("pid_control"));
    t.route_index = j.value("route_index", 0);
    if (j.contains("rp_window")) {
      t.rp_window = {point_from(j.at("rp_window").at("rp1")), point_from(j.at("rp_window").at("rp2"))};
    }
    if (j.contains("command")) t.command = command_from(j.at("command").get<std::string>());
    t.depth_path = optional_string_from(j, "depth_path");
    t.seg_path = optional_string_from(j, "seg_path");
    if (j.contains("waypoints_pred") && !j.at("waypoints_pred").is_null()) {
      t.waypoints_pred = waypoints_from(j.at("waypoints_pred"));
    }
    if (j.contains("waypoints_gt") && !j.at("waypoints_gt").is_null()) {
      t.waypoints_gt = waypoints_from(j.at("waypoints_gt"));
    }
    t.intervention_flag = j.value("intervention_flag", false);
    return t;
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("malformed record tick: {}", e.what()));
  }
}

void write_record(std::ostream& out, const DrivingRecord& record) {
  out << json{{"header", record.header}}.dump() << '\n';
  for (const auto& t : record.ticks) out << to_json(t).dump() << '\n';
  if (!out) throw FormatError("failed writing driving record");
}

DrivingRecord read_record(std::istream& in) {
  DrivingRecord rec;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(fmt::format("record line {}: {}", lineno, e.what()));
    }
    if (j.is_object() && j.contains("header")) {
      rec.header = j.at("header");
      continue;
    }
    rec.ticks.push_back(tick_from_json(j));
  }
  return rec;
}

void save_record(const DrivingRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(fmt::format("cannot write {}", path.string()));
  write_record(out, record);
}

DrivingRecord load_record(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open record {}", path.string()));
  return read_record(in);
}

void fill_ground_truth_waypoints(std::vector<RecordTick>& ticks) {
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    if (i + kGroundTruthHorizonTicks < ticks.size()) {
      ticks[i].waypoints_gt = playback_predict(ticks, i);
    } else {
      ticks[i].waypoints_gt.reset();
    }
  }
}

}  // namespace routepilot
