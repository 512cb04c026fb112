#include "routepilot/harness.hpp"

#include <algorithm>
#include <future>
#include <fstream>
#include <memory>

#include <fmt/format.h>

#include "routepilot/bev.hpp"
#include "routepilot/errors.hpp"
#include "routepilot/predictor.hpp"
#include "routepilot/raster_io.hpp"
#include "routepilot/stream_predictor.hpp"

namespace routepilot {

using nlohmann::json;

namespace {

class WaypointSource {
 public:
  virtual ~WaypointSource() = default;
  virtual PredictionOutput predict(int t, const ObservationBundle& obs) = 0;
};

class OracleSource : public WaypointSource {
 public:
  OracleSource(double speed, const VehicleParams& vp) : speed_(speed) {
    config_.v_max = vp.v_max;
    config_.yaw_rate_max = vp.yaw_rate_max;
  }
  PredictionOutput predict(int, const ObservationBundle& obs) override {
    return pure_pursuit_predict(obs, speed_, config_);
  }

 private:
  double speed_;
  PursuitConfig config_;
};

class PlaybackSource : public WaypointSource {
 public:
  explicit PlaybackSource(const std::filesystem::path& path) : ticks_(load_record(path).ticks) {}
  PredictionOutput predict(int t, const ObservationBundle&) override {
    PredictionOutput out;
    const auto i = static_cast<std::size_t>(t);
    if (i + kGroundTruthHorizonTicks < ticks_.size()) out.waypoints = playback_predict(ticks_, i);
    if (i < ticks_.size()) out.control = ticks_[i].mlp_control;
    return out;
  }

 private:
  std::vector<RecordTick> ticks_;
};

class ExternalSource : public WaypointSource {
 public:
  ExternalSource(const std::string& command, double speed) : client_(command), speed_(speed) {}
  PredictionOutput predict(int t, const ObservationBundle& obs) override { return client_.predict(t, obs, speed_); }

 private:
  ExternalPredictor client_;
  double speed_;
};

std::unique_ptr<WaypointSource> make_source(const RunConfig& c) {
  switch (c.predictor) {
    case PredictorKind::Playback:
      return std::make_unique<PlaybackSource>(*c.playback_record);
    case PredictorKind::External:
      return std::make_unique<ExternalSource>(c.external_command, c.speed_target);
    case PredictorKind::Oracle:
      break;
  }
  return std::make_unique<OracleSource>(c.speed_target, c.vehicle);
}

Route episode_route(const RunConfig& c, const World& world) {
  try {
    if (c.route_path) return load_route(*c.route_path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!world.route) throw ConfigError("no route: set one in the config or the world file");
  return *world.route;
}

json event_json(const InterventionEvent& e, double dt) {
  return {{"start_tick", e.start_tick},
          {"end_tick", e.end_tick},
          {"cause", std::string(to_string(e.cause))},
          {"duration_s", e.duration_s(dt)}};
}

}  // namespace

Episode simulate_episode(const RunConfig& config, const World& world,
                         const std::optional<std::filesystem::path>& raster_dir) {
  config.validate();
  const Route route = episode_route(config, world);
  const auto polyline = route_polyline(world, route);
  const ControlWeights beta = weights_from_alphas(config.alpha1, config.alpha2, config.alpha3);
  const VehicleParams& vp = config.vehicle;
  const bool save_rasters = config.save_rasters && raster_dir.has_value();
  if (save_rasters) std::filesystem::create_directories(*raster_dir / "rasters");

  Episode ep;
  json route_pts = json::array();
  for (const auto& p : route.points()) route_pts.push_back({p.lat_deg, p.lon_deg});
  ep.record.header = {{"format", "routepilot-record"},
                      {"version", 1},
                      {"dt", vp.dt},
                      {"config", to_json(config)},
                      {"beta",
                       {{"beta00", beta.beta00}, {"beta10", beta.beta10}, {"beta01", beta.beta01},
                        {"beta11", beta.beta11}}},
                      {"route", route_pts}};

  auto source = make_source(config);
  PidAgent pid(config.pid);
  Supervisor supervisor(world, polyline, vp, config.intervention);
  NoiseStream noise(config.noise);
  RouteTracker tracker(route);
  VehicleState state;
  state.pose = world.start;

  EpisodeResult& res = ep.result;
  int t = 0;
  for (; t < config.tick_limit; ++t) {
    res.max_cross_track_m = std::max(res.max_cross_track_m, distance_to_polyline(world.to_local(state.pose.position), polyline));
    if (footprint_collides(world, state, vp)) res.collided = true;

    ObservationSet obs = sense(world, state, vp, config.camera, noise);
    const Pose measured{obs.gnss, obs.bearing_deg};
    const AdvanceResult adv = advance(tracker, measured);
    tracker = adv.tracker;
    if (adv.finished) {
      res.finished = true;
      break;
    }
    const RouteWindow win = window(tracker, measured);
    ObservationBundle bundle{project_to_bev(depth_to_points(obs.depth, config.camera), obs.seg), win, obs.wheels};

    const PredictionOutput pred = source->predict(t, bundle);
    const Control pid_ctl = pid.control(pred.waypoints, obs.wheels, vp.dt);
    const Control fused = fuse(pred.control, pid_ctl, beta, config.min_actuation);
    const Control applied = supervisor.update(t, state, fused);

    RecordTick tick;
    tick.t = t;
    tick.time_s = state.time_s;
    tick.gnss = obs.gnss;
    tick.bearing_deg = obs.bearing_deg;
    tick.omega_l = obs.wheels.omega_l;
    tick.omega_r = obs.wheels.omega_r;
    tick.steering = applied.steering;
    tick.throttle = applied.throttle;
    tick.control_pred = fused;
    tick.mlp_control = pred.control;
    tick.pid_control = pid_ctl;
    tick.route_index = static_cast<int>(tracker.current_index);
    tick.rp_window = win;
    tick.command = command(win);
    tick.waypoints_pred = pred.waypoints;
    tick.intervention_flag = supervisor.active();
    if (save_rasters) {
      const std::string depth_rel = fmt::format("rasters/depth_{:05d}.dpf", t);
      const std::string seg_rel = fmt::format("rasters/seg_{:05d}.pgm", t);
      save_depth(obs.depth, *raster_dir / depth_rel);
      save_pgm(obs.seg, *raster_dir / seg_rel);
      tick.depth_path = depth_rel;
      tick.seg_path = seg_rel;
    }
    ep.record.ticks.push_back(std::move(tick));

    state = step(state, applied, vp);
  }
  supervisor.finish(std::max(0, t - 1));
  fill_ground_truth_waypoints(ep.record.ticks);
  res.ticks = static_cast<int>(ep.record.ticks.size());
  res.interventions = supervisor.events();
  return ep;
}

EpisodeResult run_episode(const RunConfig& config) {
  config.validate();
  World world = [&] {
    try {
      return load_world(config.world_path);
    } catch (const FormatError& e) {
      throw ConfigError(e.what());
    }
  }();
  const std::filesystem::path run_dir = config.out_dir / config.name;
  std::filesystem::create_directories(run_dir);
  {
    std::ofstream out(run_dir / "config.json");
    out << to_json(config).dump(2) << '\n';
  }
  Episode ep = simulate_episode(config, world, run_dir);
  ep.result.run_dir = run_dir;
  ep.result.record_path = run_dir / "record.jsonl";
  save_record(ep.record, ep.result.record_path);
  std::ofstream out(run_dir / "result.json");
  out << to_json(ep.result).dump(2) << '\n';
  if (!out) throw Error(fmt::format("cannot write {}", (run_dir / "result.json").string()));
  return ep.result;
}

std::vector<EpisodeResult> run_seeds(const RunConfig& config, const std::vector<std::uint64_t>& seeds) {
  std::vector<std::future<EpisodeResult>> jobs;
  jobs.reserve(seeds.size());
  for (std::uint64_t seed : seeds) {
    RunConfig c = config;
    c.noise.seed = seed;
    c.name = fmt::format("{}-seed{}", config.name, seed);
    jobs.push_back(std::async(std::launch::async, [c] { return run_episode(c); }));
  }
  std::vector<EpisodeResult> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

json to_json(const EpisodeResult& r) {
  json events = json::array();
  double secs = 0.0;
  for (const auto& e : r.interventions) {
    events.push_back(event_json(e, kRecordDtS));
    secs += e.duration_s(kRecordDtS);
  }
  return {{"run_dir", r.run_dir.string()},
          {"record", r.record_path.string()},
          {"finished", r.finished},
          {"ticks", r.ticks},
          {"intervention_count", r.interventions.size()},
          {"intervention_s", secs},
          {"interventions", events},
          {"max_cross_track_m", r.max_cross_track_m},
          {"collided", r.collided}};
}

std::vector<InterventionEvent> events_from_flags(const std::vector<RecordTick>& ticks) {
  std::vector<InterventionEvent> events;
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    if (!ticks[i].intervention_flag) continue;
    if (i > 0 && ticks[i - 1].intervention_flag) {
      events.back().end_tick = ticks[i].t;
    } else {
      events.push_back({ticks[i].t, ticks[i].t, InterventionCause::PredictedCollision});
    }
  }
  return events;
}

namespace {

std::vector<double> flatten(const Waypoints& w) {
  return {w.wp1.x_m, w.wp1.y_m, w.wp2.x_m, w.wp2.y_m, w.wp3.x_m, w.wp3.y_m};
}

std::optional<double> record_iou(const DrivingRecord& pred, const std::filesystem::path& pred_dir,
                                 const DrivingRecord& truth, const std::filesystem::path& truth_dir, std::size_t n) {
  std::vector<double> scores;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = pred.ticks[i].seg_path;
    const auto& t = truth.ticks[i].seg_path;
    if (!p || !t) return std::nullopt;
    scores.push_back(iou(load_pgm(pred_dir / *p), load_pgm(truth_dir / *t)));
  }
  if (scores.empty()) return std::nullopt;
  return pairwise_sum(scores) / static_cast<double>(scores.size());
}

std::optional<MeanStd> optional_stats(const std::vector<RunScore>& runs, std::optional<double> RunScore::*field) {
  std::vector<double> v;
  for (const auto& r : runs) {
    if (r.*field) v.push_back(*(r.*field));
  }
  if (v.empty()) return std::nullopt;
  return mean_std(v);
}

}  // namespace

ScoreReport evaluate_records(const std::vector<std::filesystem::path>& records,
                             const std::vector<std::filesystem::path>& truths) {
  if (records.empty()) throw InvalidArgument("no records to evaluate");
  if (!truths.empty() && truths.size() != records.size()) {
    throw InvalidArgument(fmt::format("{} records but {} truth records", records.size(), truths.size()));
  }
  ScoreReport report;
  std::vector<std::vector<InterventionEvent>> all_events;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const DrivingRecord pred = load_record(records[r]);
    const bool separate = !truths.empty();
    const DrivingRecord truth = separate ? load_record(truths[r]) : pred;
    const std::size_t n = std::min(pred.ticks.size(), truth.ticks.size());
    if (n == 0) throw FormatError(fmt::format("{} has no ticks to score", records[r].string()));

    RunScore run;
    run.name = records[r].parent_path().filename().string();
    if (run.name.empty()) run.name = records[r].stem().string();
    std::vector<double> wp_pred, wp_true, st_pred, st_true, th_pred, th_true;
    for (std::size_t i = 0; i < n; ++i) {
      const RecordTick& p = pred.ticks[i];
      const RecordTick& t = truth.ticks[i];
      st_pred.push_back(p.control_pred.steering);
      st_true.push_back(t.steering);
      th_pred.push_back(p.control_pred.throttle);
      th_true.push_back(t.throttle);
      if (t.waypoints_gt) {
        const auto a = flatten(p.waypoints_pred);
        const auto b = flatten(*t.waypoints_gt);
        wp_pred.insert(wp_pred.end(), a.begin(), a.end());
        wp_true.insert(wp_true.end(), b.begin(), b.end());
        ++run.ticks_scored;
      }
    }
    run.mae_st = mae(st_pred, st_true);
    run.mae_th = mae(th_pred, th_true);
    if (!wp_pred.empty()) run.mae_wp = mae(wp_pred, wp_true);
    if (separate) {
      run.iou_seg = record_iou(pred, records[r].parent_path(), truth, truths[r].parent_path(), n);
      if (run.iou_seg) run.total = total_metric(*run.iou_seg, run.mae_st, run.mae_th);
    }
    const auto events = events_from_flags(pred.ticks);
    run.intervention_count = static_cast<double>(events.size());
    for (const auto& e : events) run.intervention_s += e.duration_s(kRecordDtS);
    all_events.push_back(events);
    report.runs.push_back(std::move(run));
  }

  std::vector<double> st, th;
  for (const auto& r : report.runs) {
    st.push_back(r.mae_st);
    th.push_back(r.mae_th);
  }
  report.mae_st = mean_std(st);
  report.mae_th = mean_std(th);
  report.mae_wp = optional_stats(report.runs, &RunScore::mae_wp);
  report.iou_seg = optional_stats(report.runs, &RunScore::iou_seg);
  report.total = optional_stats(report.runs, &RunScore::total);
  report.drivability = drivability(all_events, kRecordDtS);
  return report;
}

}  // namespace routepilot
