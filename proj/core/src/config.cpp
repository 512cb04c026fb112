#include "routepilot/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "routepilot/errors.hpp"

namespace routepilot {

std::string_view to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::Oracle:
      return "oracle";
    case PredictorKind::Playback:
      return "playback";
    case PredictorKind::External:
      return "external";
  }
  return "oracle";
}

PredictorKind predictor_from_string(std::string_view name) {
  if (name == "oracle") return PredictorKind::Oracle;
  if (name == "playback") return PredictorKind::Playback;
  if (name == "external") return PredictorKind::External;
  throw ConfigError(fmt::format("unknown predictor '{}' (expected oracle, playback or external)", name));
}

void RunConfig::validate() const {
  try {
    noise.validate();
    vehicle.validate();
    camera.validate();
    weights_from_alphas(alpha1, alpha2, alpha3);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (world_path.empty()) throw ConfigError("config needs a world file");
  if (!std::filesystem::exists(world_path)) throw ConfigError(fmt::format("world file {} not found", world_path.string()));
  if (route_path && !std::filesystem::exists(*route_path)) {
    throw ConfigError(fmt::format("route file {} not found", route_path->string()));
  }
  if (predictor == PredictorKind::Playback) {
    if (!playback_record) throw ConfigError("playback predictor needs playback_record");
    if (!std::filesystem::exists(*playback_record)) {
      throw ConfigError(fmt::format("playback record {} not found", playback_record->string()));
    }
  }
  if (predictor == PredictorKind::External && external_command.empty()) {
    throw ConfigError("external predictor needs external_command");
  }
  if (tick_limit <= 0) throw ConfigError("tick_limit must be positive");
  if (!(speed_target >= 0.0)) throw ConfigError("speed_target must be non-negative");
  if (!(min_actuation >= 0.0)) throw ConfigError("min_actuation must be non-negative");
  if (name.empty() || name.find('/') != std::string::npos) throw ConfigError("name must be a plain directory name");
}

namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path = p;
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

PidGains gains_from(const json& j, PidGains g) {
  g.kp = j.value("kp", g.kp);
  g.ki = j.value("ki", g.ki);
  g.kd = j.value("kd", g.kd);
  g.integral_limit = j.value("integral_limit", g.integral_limit);
  return g;
}

json gains_json(const PidGains& g) {
  return {{"kp", g.kp}, {"ki", g.ki}, {"kd", g.kd}, {"integral_limit", g.integral_limit}};
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    RunConfig c;
    c.world_path = resolve(base_dir, j.at("world").get<std::string>());
    if (j.contains("route") && !j.at("route").is_null()) c.route_path = resolve(base_dir, j.at("route").get<std::string>());
    c.predictor = predictor_from_string(j.value("predictor", std::string("oracle")));
    if (j.contains("playback_record") && !j.at("playback_record").is_null()) {
      c.playback_record = resolve(base_dir, j.at("playback_record").get<std::string>());
    }
    c.external_command = j.value("external_command", std::string{});
    if (!j.contains("seed")) throw ConfigError("config needs a seed");
    c.noise.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      c.noise.gnss_sigma_m = n.value("gnss_m", 0.0);
      c.noise.bearing_sigma_deg = n.value("bearing_deg", 0.0);
      c.noise.depth_relative_sigma = n.value("depth_rel", 0.0);
    }
    if (j.contains("gains")) {
      const auto& g = j.at("gains");
      if (g.contains("lateral")) c.pid.lateral = gains_from(g.at("lateral"), c.pid.lateral);
      if (g.contains("longitudinal")) c.pid.longitudinal = gains_from(g.at("longitudinal"), c.pid.longitudinal);
    }
    if (j.contains("alphas")) {
      const auto& a = j.at("alphas");
      if (!a.is_array() || a.size() != 3) throw ConfigError("alphas must be [a1, a2, a3]");
      c.alpha1 = a[0].get<double>();
      c.alpha2 = a[1].get<double>();
      c.alpha3 = a[2].get<double>();
    }
    c.min_actuation = j.value("min_actuation", c.min_actuation);
    c.pid.speed_gain = j.value("speed_gain", c.pid.speed_gain);
    c.speed_target = j.value("speed_target", c.speed_target);
    c.tick_limit = j.value("tick_limit", c.tick_limit);
    if (j.contains("out")) c.out_dir = resolve(base_dir, j.at("out").get<std::string>());
    c.name = j.value("name", c.name);
    c.save_rasters = j.value("save_rasters", c.save_rasters);
    if (j.contains("camera")) c.camera = parse_intrinsics(j.at("camera").dump());
    if (j.contains("vehicle")) {
      const auto& v = j.at("vehicle");
      c.vehicle.v_max = v.value("v_max", c.vehicle.v_max);
      c.vehicle.yaw_rate_max = v.value("yaw_rate_max", c.vehicle.yaw_rate_max);
      c.vehicle.track_width_m = v.value("track_width_m", c.vehicle.track_width_m);
      c.vehicle.lag_tau_s = v.value("lag_tau_s", c.vehicle.lag_tau_s);
    }
    if (j.contains("intervention")) {
      const auto& i = j.at("intervention");
      c.intervention.horizon_s = i.value("horizon_s", c.intervention.horizon_s);
      c.intervention.off_route_m = i.value("off_route_m", c.intervention.off_route_m);
      c.intervention.release_m = i.value("release_m", c.intervention.release_m);
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed config: {}", e.what()));
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

nlohmann::json to_json(const RunConfig& c) {
  json j;
  j["world"] = std::filesystem::absolute(c.world_path).lexically_normal().string();
  j["route"] = c.route_path ? json(std::filesystem::absolute(*c.route_path).lexically_normal().string()) : json(nullptr);
  j["predictor"] = std::string(to_string(c.predictor));
  j["playback_record"] =
      c.playback_record ? json(std::filesystem::absolute(*c.playback_record).lexically_normal().string()) : json(nullptr);
  j["external_command"] = c.external_command;
  j["seed"] = c.noise.seed;
  j["noise"] = {{"gnss_m", c.noise.gnss_sigma_m},
                {"bearing_deg", c.noise.bearing_sigma_deg},
                {"depth_rel", c.noise.depth_relative_sigma}};
  j["gains"] = {{"lateral", gains_json(c.pid.lateral)}, {"longitudinal", gains_json(c.pid.longitudinal)}};
  j["alphas"] = {c.alpha1, c.alpha2, c.alpha3};
  j["min_actuation"] = c.min_actuation;
  j["speed_gain"] = c.pid.speed_gain;
  j["speed_target"] = c.speed_target;
  j["tick_limit"] = c.tick_limit;
  j["out"] = std::filesystem::absolute(c.out_dir).lexically_normal().string();
  j["name"] = c.name;
  j["save_rasters"] = c.save_rasters;
  j["camera"] = {{"fx", c.camera.fx},
                 {"fy", c.camera.fy},
                 {"cx", c.camera.cx},
                 {"cy", c.camera.cy},
                 {"width", c.camera.width},
                 {"height", c.camera.height},
                 {"cam_height_m", c.camera.cam_height_m},
                 {"cam_pitch_deg", c.camera.cam_pitch_deg}};
  j["vehicle"] = {{"v_max", c.vehicle.v_max},
                  {"yaw_rate_max", c.vehicle.yaw_rate_max},
                  {"track_width_m", c.vehicle.track_width_m},
                  {"lag_tau_s", c.vehicle.lag_tau_s}};
  j["intervention"] = {{"horizon_s", c.intervention.horizon_s},
                       {"off_route_m", c.intervention.off_route_m},
                       {"release_m", c.intervention.release_m}};
  return j;
}

std::optional<std::filesystem::path> default_config_path() {
  const char* v = std::getenv(kConfigEnvVar);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::filesystem::path(v);
}

}  // namespace routepilot
