#include "routepilot/stream_predictor.hpp"

#include <algorithm>
#include <array>
#include <csignal>
#include <istream>
#include <ostream>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include "routepilot/errors.hpp"

namespace routepilot {

using nlohmann::json;

std::vector<std::pair<std::uint8_t, std::uint32_t>> rle_encode(const Raster<std::uint8_t>& r) {
  std::vector<std::pair<std::uint8_t, std::uint32_t>> runs;
  for (std::uint8_t v : r.data()) {
    if (!runs.empty() && runs.back().first == v) {
      ++runs.back().second;
    } else {
      runs.emplace_back(v, 1);
    }
  }
  return runs;
}

Raster<std::uint8_t> rle_decode(std::size_t rows, std::size_t cols,
                                const std::vector<std::pair<std::uint8_t, std::uint32_t>>& runs) {
  Raster<std::uint8_t> r(rows, cols, 0);
  auto data = r.data();
  std::size_t pos = 0;
  for (const auto& [v, n] : runs) {
    if (pos + n > data.size()) throw FormatError("run-length data overflows the raster");
    std::fill_n(data.begin() + static_cast<std::ptrdiff_t>(pos), n, v);
    pos += n;
  }
  if (pos != data.size()) throw FormatError("run-length data does not cover the raster");
  return r;
}

namespace {

json point_json(const LocalPoint& p) { return json::array({p.x_m, p.y_m}); }

LocalPoint point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw FormatError("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

json encode_request(int t, const ObservationBundle& obs, double speed_target) {
  json rle = json::array();
  for (const auto& [v, n] : rle_encode(obs.bev)) rle.push_back({v, n});
  return {{"t", t},
          {"bev", {{"rows", obs.bev.rows()}, {"cols", obs.bev.cols()}, {"rle", rle}}},
          {"route", {{"rp1", point_json(obs.window.rp1)}, {"rp2", point_json(obs.window.rp2)}}},
          {"wheels",
           {{"omega_l", obs.wheels.omega_l}, {"omega_r", obs.wheels.omega_r}, {"radius", obs.wheels.wheel_radius_m}}},
          {"speed_target", speed_target}};
}

ObservationBundle decode_request(const json& j, double& speed_target) {
  try {
    ObservationBundle obs;
    const auto& b = j.at("bev");
    std::vector<std::pair<std::uint8_t, std::uint32_t>> runs;
    for (const auto& run : b.at("rle")) {
      const int v = run.at(0).get<int>();
      if (v < 0 || v >= kClassCount) throw FormatError(fmt::format("bev class {} out of range", v));
      runs.emplace_back(static_cast<std::uint8_t>(v), run.at(1).get<std::uint32_t>());
    }
    obs.bev = rle_decode(b.at("rows").get<std::size_t>(), b.at("cols").get<std::size_t>(), runs);
    obs.window = {point_from(j.at("route").at("rp1")), point_from(j.at("route").at("rp2"))};
    const auto& w = j.at("wheels");
    obs.wheels = {w.at("omega_l").get<double>(), w.at("omega_r").get<double>(),
                  w.value("radius", WheelFeedback::kDefaultWheelRadiusM)};
    speed_target = j.value("speed_target", 1.25);
    return obs;
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("malformed predictor request: {}", e.what()));
  }
}

json encode_response(const PredictionOutput& out) {
  const auto& w = out.waypoints;
  const LocalPoint d1 = w.wp1;
  const LocalPoint d2 = w.wp2 - w.wp1;
  const LocalPoint d3 = w.wp3 - w.wp2;
  return {{"deltas", {point_json(d1), point_json(d2), point_json(d3)}},
          {"control", {{"steering", out.control.steering}, {"throttle", out.control.throttle}}}};
}

PredictionOutput decode_response(const json& j) {
  try {
    const auto& d = j.at("deltas");
    if (!d.is_array() || d.size() != 3) throw FormatError("response needs three deltas");
    std::array<WaypointDelta, 3> deltas;
    for (std::size_t i = 0; i < 3; ++i) {
      const LocalPoint p = point_from(d[i]);
      deltas[i] = {p.x_m, p.y_m};
      deltas[i].validate();
    }
    PredictionOutput out;
    out.waypoints = waypoints_from_deltas(deltas);
    out.control = Control{j.at("control").at("steering").get<double>(), j.at("control").at("throttle").get<double>()}
                      .clamped();
    return out;
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("malformed predictor response: {}", e.what()));
  } catch (const InvalidArgument& e) {
    throw FormatError(fmt::format("invalid predictor response: {}", e.what()));
  }
}

std::size_t serve_predictions(std::istream& in, std::ostream& out, const PursuitConfig& config) {
  std::size_t served = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json req;
    try {
      req = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(fmt::format("request {} is not valid JSON: {}", served, e.what()));
    }
    double speed = 0.0;
    const ObservationBundle obs = decode_request(req, speed);
    out << encode_response(pure_pursuit_predict(obs, speed, config)).dump() << '\n' << std::flush;
    ++served;
  }
  return served;
}

ExternalPredictor::ExternalPredictor(const std::string& command) {
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0) throw Error("pipe() failed");
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error("pipe() failed");
  }
  std::signal(SIGPIPE, SIG_IGN);
  pid_ = ::fork();
  if (pid_ < 0) throw Error("fork() failed");
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
  to_child_ = ::fdopen(in_pipe[1], "w");
  from_child_ = ::fdopen(out_pipe[0], "r");
  if (to_child_ == nullptr || from_child_ == nullptr) throw Error("fdopen() failed");
}

ExternalPredictor::~ExternalPredictor() {
  if (to_child_ != nullptr) std::fclose(to_child_);
  if (from_child_ != nullptr) std::fclose(from_child_);
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
}

PredictionOutput ExternalPredictor::predict(int t, const ObservationBundle& obs, double speed_target) {
  const std::string req = encode_request(t, obs, speed_target).dump() + "\n";
  if (std::fwrite(req.data(), 1, req.size(), to_child_) != req.size() || std::fflush(to_child_) != 0) {
    throw Error(fmt::format("external predictor stopped reading at tick {}", t));
  }
  std::string line;
  int c;
  while ((c = std::fgetc(from_child_)) != EOF && c != '\n') line.push_back(static_cast<char>(c));
  if (line.empty() && c == EOF) throw Error(fmt::format("external predictor closed its output at tick {}", t));
  json resp;
  try {
    resp = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(fmt::format("external predictor reply at tick {} is not JSON: {}", t, e.what()));
  }
  return decode_response(resp);
}

}  // namespace routepilot
