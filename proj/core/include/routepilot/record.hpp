#pragma once

// Driving record: JSON Lines. The first line is {"header": {...}} carrying the
// run configuration; every following line is one 4 Hz tick.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "routepilot/controller.hpp"
#include "routepilot/geodesy.hpp"
#include "routepilot/route.hpp"

namespace routepilot {

inline constexpr double kRecordRateHz = 4.0;
inline constexpr double kRecordDtS = 1.0 / kRecordRateHz;

struct RecordTick {
  int t = 0;
  double time_s = 0.0;
  GeoPoint gnss;
  double bearing_deg = 0.0;
  double omega_l = 0.0;
  double omega_r = 0.0;
  // Applied actuation (supervisor output during an intervention).
  double steering = 0.0;
  double throttle = 0.0;
  // Output of the control policy for this tick, before any supervisor override.
  Control control_pred;
  Control mlp_control;
  Control pid_control;
  int route_index = 0;
  RouteWindow rp_window;
  NavCommand command = NavCommand::GoStraight;
  std::optional<std::string> depth_path;
  std::optional<std::string> seg_path;
  Waypoints waypoints_pred;
  std::optional<Waypoints> waypoints_gt;
  bool intervention_flag = false;

  Pose pose() const { return {gnss, bearing_deg}; }
};

struct DrivingRecord {
  nlohmann::json header = nlohmann::json::object();
  std::vector<RecordTick> ticks;
};

nlohmann::json to_json(const RecordTick& tick);
RecordTick tick_from_json(const nlohmann::json& j);

void write_record(std::ostream& out, const DrivingRecord& record);
DrivingRecord read_record(std::istream& in);
void save_record(const DrivingRecord& record, const std::filesystem::path& path);
DrivingRecord load_record(const std::filesystem::path& path);

// Fills waypoints_gt of every tick that has 12 future ticks: the recorded
// positions 1, 2 and 3 seconds ahead in that tick's vehicle frame.
void fill_ground_truth_waypoints(std::vector<RecordTick>& ticks);

}  // namespace routepilot
