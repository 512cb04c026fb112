#pragma once

// Run configuration file (JSON). Relative paths resolve against the file's
// directory. Example:
//   {
//     "world": "worlds/straight.json",
//     "route": "routes/straight.json",          // optional, overrides the world's route
//     "predictor": "oracle",                    // oracle | playback | external
//     "playback_record": "runs/a/record.jsonl", // predictor = playback
//     "external_command": "./my_model --serve", // predictor = external
//     "seed": 7,
//     "noise": {"gnss_m": 0.0, "bearing_deg": 0.0, "depth_rel": 0.0},
//     "gains": {"lateral": {"kp": -0.8, "ki": 0, "kd": -0.2},
//               "longitudinal": {"kp": 0.8, "ki": 0.05, "kd": 0}},
//     "alphas": [1, 1, 1],
//     "min_actuation": 0.1, "speed_gain": 1.75, "speed_target": 1.25,
//     "tick_limit": 1200, "out": "runs", "name": "episode", "save_rasters": false
//   }

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "routepilot/bev.hpp"
#include "routepilot/controller.hpp"
#include "routepilot/vehicle_sim.hpp"

namespace routepilot {

enum class PredictorKind { Oracle, Playback, External };

std::string_view to_string(PredictorKind k);
// Throws ConfigError for an unknown name.
PredictorKind predictor_from_string(std::string_view name);

inline constexpr const char* kConfigEnvVar = "ROUTEPILOT_CONFIG";

struct RunConfig {
  std::filesystem::path world_path;
  std::optional<std::filesystem::path> route_path;
  PredictorKind predictor = PredictorKind::Oracle;
  std::optional<std::filesystem::path> playback_record;
  std::string external_command;
  SensorNoise noise;
  PidAgentConfig pid;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double alpha3 = 1.0;
  double min_actuation = kDefaultMinActuation;
  double speed_target = 1.25;
  int tick_limit = 1200;
  std::filesystem::path out_dir = "runs";
  std::string name = "episode";
  bool save_rasters = false;
  CameraIntrinsics camera;
  VehicleParams vehicle;
  InterventionConfig intervention;

  // Throws ConfigError on inconsistent settings or missing files.
  void validate() const;
};

// Throws ConfigError on malformed JSON, unknown predictor or a missing seed.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Fully resolved form, suitable for copying into a run directory.
nlohmann::json to_json(const RunConfig& config);

// Value of ROUTEPILOT_CONFIG, if set and non-empty.
std::optional<std::filesystem::path> default_config_path();

}  // namespace routepilot
