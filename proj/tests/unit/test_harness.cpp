#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "routepilot/config.hpp"
#include "routepilot/harness.hpp"
#include "routepilot/raster_io.hpp"

using namespace routepilot;

namespace {

RunConfig smoke_config(const char* scratch) {
  auto c = load_run_config(fixtures::data_dir() / "smoke" / "config.json");
  c.out_dir = fixtures::scratch_dir(scratch);
  return c;
}

std::string serialize(const DrivingRecord& r) {
  std::ostringstream os;
  write_record(os, r);
  return os.str();
}

}  // namespace

TEST(Config, ParsesAndResolvesPaths) {
  const auto c = parse_run_config(R"({"world": "w.json", "seed": 4, "noise": {"gnss_m": 0.5},
                                      "alphas": [1, 2, 3], "out": "runs"})",
                                  "/base");
  EXPECT_EQ(c.world_path, std::filesystem::path("/base/w.json"));
  EXPECT_EQ(c.out_dir, std::filesystem::path("/base/runs"));
  EXPECT_EQ(c.noise.seed, 4u);
  EXPECT_DOUBLE_EQ(c.noise.gnss_sigma_m, 0.5);
  EXPECT_DOUBLE_EQ(c.alpha3, 3.0);
  EXPECT_EQ(c.predictor, PredictorKind::Oracle);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_run_config(R"({"world": "w.json"})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"world": "w.json", "seed": 1, "predictor": "neural"})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"world": "w.json", "seed": 1, "alphas": [1, 2]})"), ConfigError);
  EXPECT_THROW(parse_run_config("not json"), ConfigError);
  auto c = parse_run_config(R"({"world": "/nonexistent/w.json", "seed": 1})");
  EXPECT_THROW(c.validate(), ConfigError);
  c = smoke_config("cfg_errors");
  c.predictor = PredictorKind::Playback;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, EnvironmentDefault) {
  ::setenv(kConfigEnvVar, "/tmp/x.json", 1);
  EXPECT_EQ(default_config_path(), std::filesystem::path("/tmp/x.json"));
  ::setenv(kConfigEnvVar, "", 1);
  EXPECT_FALSE(default_config_path().has_value());
  ::unsetenv(kConfigEnvVar);
}

TEST(Record, RoundTrip) {
  const auto c = smoke_config("record_rt");
  auto cfg = c;
  cfg.tick_limit = 30;
  const auto world = load_world(cfg.world_path);
  const auto ep = simulate_episode(cfg, world);
  const auto text = serialize(ep.record);
  std::istringstream in(text);
  const auto back = read_record(in);
  EXPECT_EQ(serialize(back), text);
  ASSERT_EQ(back.ticks.size(), 30u);
  EXPECT_EQ(back.ticks[5].t, 5);
  std::istringstream bad("{\"header\": {}}\n{\"t\": \"x\"}\n");
  EXPECT_THROW(read_record(bad), FormatError);
}

TEST(Harness, ZeroNoiseStraightRouteNoObstacles) {
  auto cfg = smoke_config("clear_route");
  auto world = load_world(cfg.world_path);
  World clear(world.origin(), world.x_min(), world.y_min(), world.x_max(), world.y_max(), world.cell_m(), 1);
  clear.start = world.start;
  clear.route = world.route;
  const auto ep = simulate_episode(cfg, clear);
  EXPECT_TRUE(ep.result.finished);
  EXPECT_TRUE(ep.result.interventions.empty());
  EXPECT_LT(ep.result.max_cross_track_m, 0.5);
  EXPECT_FALSE(ep.result.collided);
  for (const auto& t : ep.record.ticks) {
    EXPECT_GE(t.bearing_deg, 0.0);
    EXPECT_LT(t.bearing_deg, 360.0);
  }
}

TEST(Harness, BlockedRouteHitsTickLimitWithIntervention) {
  auto cfg = load_run_config(fixtures::data_dir() / "blocked" / "config.json");
  cfg.out_dir = fixtures::scratch_dir("blocked");
  const auto res = run_episode(cfg);
  EXPECT_FALSE(res.finished);
  EXPECT_EQ(res.ticks, cfg.tick_limit);
  EXPECT_GE(res.interventions.size(), 1u);
  EXPECT_FALSE(res.collided);
  double total = 0.0;
  for (const auto& e : res.interventions) total += e.duration_s(kRecordDtS);
  EXPECT_LE(total, res.ticks * kRecordDtS);
  EXPECT_TRUE(std::filesystem::exists(res.run_dir / "config.json"));
  EXPECT_TRUE(std::filesystem::exists(res.run_dir / "result.json"));
}

TEST(Harness, DeterministicRecords) {
  auto cfg = smoke_config("determinism");
  cfg.noise.gnss_sigma_m = 1.0;
  cfg.noise.bearing_sigma_deg = 2.0;
  cfg.noise.depth_relative_sigma = 0.01;
  cfg.tick_limit = 60;
  const auto world = load_world(cfg.world_path);
  const auto a = serialize(simulate_episode(cfg, world).record);
  const auto b = serialize(simulate_episode(cfg, world).record);
  EXPECT_EQ(a, b);
  cfg.noise.seed += 1;
  EXPECT_NE(serialize(simulate_episode(cfg, world).record), a);
}

TEST(Harness, RunDirectoryReproducesRecord) {
  auto cfg = smoke_config("reproduce");
  cfg.tick_limit = 40;
  cfg.noise.gnss_sigma_m = 0.5;
  const auto res = run_episode(cfg);
  std::stringstream first;
  first << std::ifstream(res.record_path).rdbuf();
  const auto again = load_run_config(res.run_dir / "config.json");
  const auto res2 = run_episode(again);
  EXPECT_EQ(res2.record_path, res.record_path);
  std::stringstream second;
  second << std::ifstream(res2.record_path).rdbuf();
  EXPECT_EQ(first.str(), second.str());
}

TEST(Harness, ExternalPredictorDrivesLikeOracle) {
  auto cfg = smoke_config("external");
  cfg.tick_limit = 20;
  const auto world = load_world(cfg.world_path);
  const auto oracle_run = simulate_episode(cfg, world);
  cfg.predictor = PredictorKind::External;
  cfg.external_command = ROUTEPILOT_CLI_PATH " predict-serve";
  const auto ext_run = simulate_episode(cfg, world);
  ASSERT_EQ(ext_run.record.ticks.size(), oracle_run.record.ticks.size());
  for (std::size_t i = 0; i < ext_run.record.ticks.size(); ++i) {
    EXPECT_NEAR(ext_run.record.ticks[i].steering, oracle_run.record.ticks[i].steering, 1e-9);
    EXPECT_NEAR(ext_run.record.ticks[i].throttle, oracle_run.record.ticks[i].throttle, 1e-9);
  }
}

TEST(Harness, PlaybackReplaysRecordedWaypoints) {
  auto cfg = smoke_config("playback");
  cfg.tick_limit = 40;
  const auto res = run_episode(cfg);
  cfg.predictor = PredictorKind::Playback;
  cfg.playback_record = res.record_path;
  cfg.name = "replay";
  cfg.tick_limit = 20;
  const auto world = load_world(cfg.world_path);
  const auto ep = simulate_episode(cfg, world);
  EXPECT_EQ(ep.record.ticks.size(), 20u);
  EXPECT_GT(ep.record.ticks[10].waypoints_pred.wp3.y_m, 2.0);
}

TEST(Harness, RastersWritten) {
  auto cfg = smoke_config("rasters");
  cfg.tick_limit = 3;
  cfg.save_rasters = true;
  const auto res = run_episode(cfg);
  const auto rec = load_record(res.record_path);
  ASSERT_TRUE(rec.ticks[0].seg_path.has_value());
  const auto seg = load_pgm(res.run_dir / *rec.ticks[0].seg_path);
  EXPECT_EQ(seg.rows(), 256u);
  EXPECT_EQ(load_depth(res.run_dir / *rec.ticks[0].depth_path).cols(), 512u);
}

TEST(Evaluate, SelfTruthAndErrors) {
  auto cfg = smoke_config("evaluate");
  cfg.tick_limit = 60;
  std::vector<std::filesystem::path> recs;
  for (std::uint64_t seed : {1, 2, 3}) {
    cfg.noise.seed = seed;
    cfg.noise.gnss_sigma_m = 0.5;
    cfg.name = "run" + std::to_string(seed);
    recs.push_back(run_episode(cfg).record_path);
  }
  const auto rep = evaluate_records(recs);
  ASSERT_EQ(rep.runs.size(), 3u);
  EXPECT_EQ(rep.runs[0].ticks_scored, 60u - 12u);
  EXPECT_FALSE(rep.iou_seg.has_value());
  ASSERT_TRUE(rep.mae_wp.has_value());
  // Scored against itself the control error comes only from the policy-vs-applied split.
  for (const auto& r : rep.runs) EXPECT_GE(r.mae_st, 0.0);
  const auto single = evaluate_records({recs[0]});
  EXPECT_EQ(single.mae_st.std, 0.0);
  EXPECT_THROW(evaluate_records({}), InvalidArgument);
  EXPECT_THROW(evaluate_records(recs, {recs[0]}), InvalidArgument);
}

namespace {

// Writes a 14-tick record with a 2x2 segmentation raster per tick.
std::filesystem::path write_fixture(const std::filesystem::path& dir, double st_offset, double th_scale,
                                    std::uint8_t seg_class, bool flags) {
  std::filesystem::create_directories(dir);
  DrivingRecord rec;
  for (int i = 0; i < 14; ++i) {
    RecordTick t;
    t.t = i;
    t.time_s = i * 0.25;
    t.gnss = fixtures::at(0.0, 0.3 * i);
    t.steering = 0.1 * (i % 3) + st_offset;
    t.throttle = 0.05 * i * th_scale;
    t.control_pred = {0.1 * (i % 3), 0.05 * i};
    t.waypoints_pred = {{0.1, 1.2}, {0.1, 2.4}, {0.2, 3.6}};
    t.intervention_flag = flags && (i == 3 || i == 4 || i == 9);
    SegMap seg(2, 2, 1);
    seg(0, 0) = seg_class;
    const std::string name = "seg_" + std::to_string(i) + ".pgm";
    save_pgm(seg, dir / name);
    t.seg_path = name;
    rec.ticks.push_back(t);
  }
  fill_ground_truth_waypoints(rec.ticks);
  save_record(rec, dir / "record.jsonl");
  return dir / "record.jsonl";
}

}  // namespace

TEST(Evaluate, FixtureRunsMatchHandComputedReport) {
  const auto root = fixtures::scratch_dir("eval_fixture");
  std::vector<std::filesystem::path> preds, truths;
  const double offsets[3] = {0.0, 0.05, 0.1};
  for (int r = 0; r < 3; ++r) {
    preds.push_back(write_fixture(root / ("pred" + std::to_string(r)), 0.0, 1.0, 1, r == 2));
    truths.push_back(write_fixture(root / ("truth" + std::to_string(r)), offsets[r], 0.5, 3, false));
  }
  const auto rep = evaluate_records(preds, truths);
  ASSERT_EQ(rep.runs.size(), 3u);

  std::vector<double> st_pred, th_pred, th_true;
  for (int i = 0; i < 14; ++i) {
    st_pred.push_back(0.1 * (i % 3));
    th_pred.push_back(0.05 * i);
    th_true.push_back(0.025 * i);
  }
  SegMap a(2, 2, 1), b(2, 2, 1);
  b(0, 0) = 3;
  const double iou_ref = oracle::iou(a, b, 20);
  EXPECT_NEAR(iou_ref, (3.0 / 4.0 + 0.0) / 2.0, 1e-12);
  const double th_ref = oracle::mae(th_pred, th_true);
  for (int r = 0; r < 3; ++r) {
    std::vector<double> st_true;
    for (double v : st_pred) st_true.push_back(v + offsets[r]);
    const auto& run = rep.runs[r];
    EXPECT_NEAR(run.mae_st, oracle::mae(st_pred, st_true), 1e-12);
    EXPECT_NEAR(run.mae_th, th_ref, 1e-12);
    ASSERT_TRUE(run.iou_seg.has_value());
    EXPECT_NEAR(*run.iou_seg, iou_ref, 1e-12);
    ASSERT_TRUE(run.total.has_value());
    EXPECT_NEAR(*run.total, (1.0 - iou_ref) + run.mae_st + th_ref, 1e-12);
    EXPECT_EQ(run.ticks_scored, 2u);
    ASSERT_TRUE(run.mae_wp.has_value());
  }
  EXPECT_NEAR(rep.mae_st.mean, 0.05, 1e-12);
  EXPECT_NEAR(rep.mae_st.std, 0.05, 1e-12);
  EXPECT_NEAR(rep.mae_th.std, 0.0, 1e-12);
  EXPECT_EQ(rep.runs[2].intervention_count, 2.0);
  EXPECT_DOUBLE_EQ(rep.runs[2].intervention_s, 0.75);
  EXPECT_NEAR(rep.drivability.count.mean, 2.0 / 3.0, 1e-12);
}
