#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "routepilot/errors.hpp"
#include "routepilot/predictor.hpp"
#include "routepilot/record.hpp"
#include "routepilot/stream_predictor.hpp"

using namespace routepilot;

namespace {

constexpr std::uint8_t kCar = 14;

// Paints every BEV cell whose center lies in the rectangle.
void paint(BevGrid& g, double x0, double y0, double x1, double y1, std::uint8_t cls) {
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      double x = 0, y = 0;
      bev_cell_center({r, c}, x, y);
      if (x >= x0 && x <= x1 && y >= y0 && y <= y1) g(r, c) = cls;
    }
  }
}

ObservationBundle ahead(BevGrid bev) {
  ObservationBundle o;
  o.bev = std::move(bev);
  o.window = {{0.0, 12.0}, {0.0, 24.0}};
  return o;
}

std::vector<RecordTick> straight_ticks(int n, double step_m) {
  std::vector<RecordTick> ticks(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    ticks[i].t = i;
    ticks[i].gnss = fixtures::at(0.0, step_m * i);
    ticks[i].bearing_deg = 0.0;
  }
  return ticks;
}

}  // namespace

TEST(Accumulate, Rules) {
  EXPECT_EQ(accumulate({0, 0}, {0.5, 1.0}), (LocalPoint{0.5, 1.0}));
  EXPECT_EQ(accumulate({0.3, -2.0}, {0, 0}), (LocalPoint{0.3, -2.0}));
  EXPECT_THROW(accumulate({0, 0}, {8.5, 0}), InvalidArgument);
  EXPECT_THROW(accumulate({0, 0}, {0, NAN}), InvalidArgument);
  const std::array<WaypointDelta, 3> d{WaypointDelta{0.25, 1.0}, WaypointDelta{-0.5, 1.5}, WaypointDelta{0.125, 2.0}};
  const auto w = waypoints_from_deltas(d);
  EXPECT_NEAR(w.wp3.x_m, 0.25 - 0.5 + 0.125, 1e-12);
  EXPECT_NEAR(w.wp3.y_m, 4.5, 1e-12);
}

TEST(PurePursuit, EmptyGridStraight) {
  const auto out = pure_pursuit_predict(ahead(empty_bev()), 1.25);
  EXPECT_NEAR(out.waypoints.wp1.x_m, 0.0, 1e-12);
  EXPECT_NEAR(out.waypoints.wp1.y_m, 1.25, 1e-12);
  EXPECT_NEAR(out.waypoints.wp2.y_m, 2.5, 1e-12);
  EXPECT_NEAR(out.waypoints.wp3.y_m, 3.75, 1e-12);
  EXPECT_NEAR(out.control.steering, 0.0, 1e-12);
  EXPECT_GT(out.control.throttle, 0.0);
}

TEST(PurePursuit, ShiftMatchesBruteForceSearch) {
  BevGrid g = empty_bev();
  paint(g, -0.9, 2.2, 2.0, 2.8, kCar);
  const auto out = pure_pursuit_predict(ahead(g), 1.25);
  const auto free = oracle::free_shifts(g, default_obstacle_classes(), 1.25, 0.375, 3.0);
  ASSERT_FALSE(free.empty());
  double best = 1e9;
  for (double s : free) best = std::min(best, std::abs(s));
  const double shift = out.waypoints.wp1.x_m;
  EXPECT_NEAR(std::abs(shift), best, 1e-12);
  EXPECT_TRUE(std::any_of(free.begin(), free.end(), [&](double s) { return std::abs(s - shift) < 1e-12; }));
  EXPECT_NEAR(out.waypoints.wp2.x_m, shift, 1e-12);
  EXPECT_NEAR(out.waypoints.wp3.x_m, shift, 1e-12);
  EXPECT_LT(shift, 0.0);
}

TEST(PurePursuit, TiesGoAwayFromNearerObstacle) {
  BevGrid g = empty_bev();
  paint(g, 0.0, 2.3, 0.1, 2.7, kCar);
  const auto out = pure_pursuit_predict(ahead(g), 1.25);
  EXPECT_LT(out.waypoints.wp1.x_m, 0.0);
  BevGrid h = empty_bev();
  paint(h, -0.15, 2.3, -0.05, 2.7, kCar);
  EXPECT_GT(pure_pursuit_predict(ahead(h), 1.25).waypoints.wp1.x_m, 0.0);
}

TEST(PurePursuit, BlockedCorridorStops) {
  BevGrid g = empty_bev();
  paint(g, -6.0, 2.0, 6.0, 3.0, kCar);
  const auto out = pure_pursuit_predict(ahead(g), 1.25);
  EXPECT_EQ(out.control, (Control{0, 0}));
  EXPECT_EQ(out.waypoints.wp3, (LocalPoint{0, 0}));
}

TEST(PurePursuit, NonObstacleClassesIgnored) {
  BevGrid g = empty_bev();
  paint(g, -6.0, 0.0, 6.0, 24.0, 1);
  EXPECT_NEAR(pure_pursuit_predict(ahead(g), 1.25).waypoints.wp1.x_m, 0.0, 1e-12);
}

TEST(PurePursuit, RandomGridsProperties) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> x(-3.0, 3.0), y(0.5, 6.0), rp(-10.0, 10.0);
  const auto classes = default_obstacle_classes();
  for (int trial = 0; trial < 60; ++trial) {
    BevGrid g = empty_bev();
    for (int k = 0; k < 3; ++k) {
      const double x0 = x(rng), y0 = y(rng);
      paint(g, x0, y0, x0 + 0.4, y0 + 0.4, kCar);
    }
    ObservationBundle o;
    o.bev = g;
    o.window = {{rp(rng), 12.0}, {0.0, 24.0}};
    const auto out = pure_pursuit_predict(o, 1.25);
    const auto& w = out.waypoints;
    EXPECT_LE(norm(w.wp1), norm(w.wp2) + 1e-12);
    EXPECT_LE(norm(w.wp2), norm(w.wp3) + 1e-12);
    if (out.control.throttle > 0.0) {
      for (const auto& p : {w.wp1, w.wp2, w.wp3}) EXPECT_FALSE(near_obstacle(g, p, classes));
    }
  }
}

TEST(Playback, StraightConstantSpeed) {
  const auto ticks = straight_ticks(40, 1.25 / 4.0);
  const auto w = playback_predict(ticks, 3);
  EXPECT_NEAR(w.wp1.x_m, 0.0, 1e-6);
  EXPECT_NEAR(w.wp1.y_m, 1.25, 1e-6);
  EXPECT_NEAR(w.wp2.y_m, 2.5, 1e-6);
  EXPECT_NEAR(w.wp3.y_m, 3.75, 1e-6);
}

TEST(Playback, StationaryIsOrigin) {
  const auto w = playback_predict(straight_ticks(20, 0.0), 0);
  EXPECT_EQ(w.wp1, (LocalPoint{0, 0}));
  EXPECT_EQ(w.wp3, (LocalPoint{0, 0}));
}

TEST(Playback, TailRaisesEndOfRecord) {
  const auto ticks = straight_ticks(20, 0.3);
  EXPECT_NO_THROW(playback_predict(ticks, 7));
  for (std::size_t i = 8; i < 20; ++i) EXPECT_THROW(playback_predict(ticks, i), EndOfRecordError);
}

TEST(Playback, GroundTruthRuleIsIdentity) {
  auto ticks = straight_ticks(30, 0.31);
  for (std::size_t i = 0; i < ticks.size(); ++i) ticks[i].bearing_deg = 10.0 * std::sin(0.3 * i) + 5.0;
  fill_ground_truth_waypoints(ticks);
  for (std::size_t i = 0; i + 12 < ticks.size(); ++i) {
    ASSERT_TRUE(ticks[i].waypoints_gt.has_value());
    const auto w = playback_predict(ticks, i);
    EXPECT_NEAR(w.wp2.x_m, ticks[i].waypoints_gt->wp2.x_m, 1e-6);
    EXPECT_NEAR(w.wp3.y_m, ticks[i].waypoints_gt->wp3.y_m, 1e-6);
  }
  for (std::size_t i = ticks.size() - 12; i < ticks.size(); ++i) EXPECT_FALSE(ticks[i].waypoints_gt.has_value());
}

TEST(Stream, RleRoundTrip) {
  BevGrid g = empty_bev();
  paint(g, -1.0, 3.0, 1.0, 4.0, kCar);
  const auto runs = rle_encode(g);
  EXPECT_EQ(rle_decode(g.rows(), g.cols(), runs), g);
  EXPECT_THROW(rle_decode(2, 2, {{1, 3}}), FormatError);
  EXPECT_THROW(rle_decode(2, 2, {{1, 5}}), FormatError);
}

TEST(Stream, RequestAndResponseRoundTrip) {
  BevGrid g = empty_bev();
  paint(g, -1.0, 3.0, 1.0, 4.0, kCar);
  ObservationBundle o = ahead(g);
  o.wheels = {5.0, 6.0, 0.15};
  double speed = 0.0;
  const auto back = decode_request(encode_request(4, o, 1.1), speed);
  EXPECT_EQ(back.bev, o.bev);
  EXPECT_EQ(back.window.rp1, o.window.rp1);
  EXPECT_DOUBLE_EQ(back.wheels.omega_r, 6.0);
  EXPECT_DOUBLE_EQ(speed, 1.1);

  const auto pred = pure_pursuit_predict(o, 1.25);
  const auto round = decode_response(encode_response(pred));
  EXPECT_NEAR(round.waypoints.wp3.x_m, pred.waypoints.wp3.x_m, 1e-12);
  EXPECT_NEAR(round.waypoints.wp3.y_m, pred.waypoints.wp3.y_m, 1e-12);
  EXPECT_EQ(round.control, pred.control);
  EXPECT_THROW(decode_response(nlohmann::json::parse(R"({"deltas": [[0, 1]]})")), FormatError);
  EXPECT_THROW(decode_response(nlohmann::json::parse(R"({"deltas": [[0, 9], [0, 1], [0, 1]],
                                                         "control": {"steering": 0, "throttle": 0}})")),
               FormatError);
}

TEST(Stream, ServeAnswersEveryRequest) {
  std::stringstream in, out;
  const auto o = ahead(empty_bev());
  in << encode_request(0, o, 1.25).dump() << "\n\n" << encode_request(1, o, 1.25).dump() << "\n";
  EXPECT_EQ(serve_predictions(in, out), 2u);
  std::string line;
  std::getline(out, line);
  const auto resp = decode_response(nlohmann::json::parse(line));
  EXPECT_NEAR(resp.waypoints.wp1.y_m, 1.25, 1e-12);
}

TEST(Stream, ExternalChildProcess) {
  ExternalPredictor p(
      "while read line; do echo '{\"deltas\": [[0, 1], [0, 1], [0.5, 1]], "
      "\"control\": {\"steering\": 0.2, \"throttle\": 2}}'; done");
  const auto out = p.predict(0, ahead(empty_bev()), 1.25);
  EXPECT_NEAR(out.waypoints.wp3.x_m, 0.5, 1e-12);
  EXPECT_NEAR(out.waypoints.wp3.y_m, 3.0, 1e-12);
  EXPECT_EQ(out.control, (Control{0.2, 1.0}));
  ExternalPredictor dead("exit 0");
  EXPECT_THROW(dead.predict(0, ahead(empty_bev()), 1.25), Error);
}
