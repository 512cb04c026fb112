#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "routepilot/errors.hpp"
#include "routepilot/route.hpp"

using namespace routepilot;

TEST(Route, NeedsTwoPoints) {
  EXPECT_THROW(Route({fixtures::kOrigin}), InvalidArgument);
  EXPECT_NO_THROW(fixtures::straight_route(2));
}

TEST(Route, SpacingWarnings) {
  const Route r({fixtures::at(0, 0), fixtures::at(0, 12), fixtures::at(0, 15), fixtures::at(0, 40)});
  EXPECT_EQ(r.spacing_warnings(), (std::vector<std::size_t>{1, 2}));
  EXPECT_TRUE(fixtures::straight_route(5).spacing_warnings().empty());
}

TEST(Route, ParsesBareArrayAndObject) {
  const auto a = parse_route(R"([{"lat_deg": 1.0, "lon_deg": 2.0}, {"lat_deg": 1.0001, "lon_deg": 2.0}])");
  const auto b = parse_route(R"({"points": [{"lat_deg": 1.0, "lon_deg": 2.0}, {"lat_deg": 1.0001, "lon_deg": 2.0}]})");
  EXPECT_EQ(a.points(), b.points());
  EXPECT_THROW(parse_route("[1, 2]"), FormatError);
  EXPECT_THROW(parse_route("{"), FormatError);
  EXPECT_THROW(parse_route(R"({"pts": []})"), FormatError);
}

TEST(Route, SaveLoadRoundTrip) {
  const auto dir = fixtures::scratch_dir("route_io");
  const auto r = fixtures::straight_route(4);
  save_route(r, dir / "r.json");
  const auto back = load_route(dir / "r.json");
  ASSERT_EQ(back.size(), r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_NEAR(back[i].lat_deg, r[i].lat_deg, 1e-9);
    EXPECT_NEAR(back[i].lon_deg, r[i].lon_deg, 1e-9);
  }
}

TEST(Advance, FarPointKeepsIndex) {
  RouteTracker t(fixtures::straight_route(3));
  const auto res = advance(t, {fixtures::at(0.0, 2.0), 0.0});
  EXPECT_EQ(res.tracker.current_index, 0u);
  EXPECT_FALSE(res.finished);
}

TEST(Advance, WithinFourMetersSwitches) {
  RouteTracker t(fixtures::straight_route(3));
  const auto res = advance(t, {fixtures::at(0.0, 12.0 - 3.9), 0.0});
  EXPECT_EQ(res.tracker.current_index, 1u);
  EXPECT_FALSE(res.finished);
  const auto edge = advance(t, {fixtures::at(0.0, 12.0 - 4.01), 0.0});
  EXPECT_EQ(edge.tracker.current_index, 0u);
}

TEST(Advance, SkipsSeveralPointsAndFinishes) {
  const Route r({fixtures::at(0, 1), fixtures::at(0, 2), fixtures::at(0, 3)});
  RouteTracker t(r);
  const auto res = advance(t, {fixtures::at(0.0, 2.0), 0.0});
  EXPECT_EQ(res.tracker.current_index, 2u);
  EXPECT_TRUE(res.finished);
}

TEST(Advance, IndexIsMonotone) {
  RouteTracker t(fixtures::straight_route(6));
  std::size_t prev = 0;
  for (double y = 0.0; y < 80.0; y += 1.3) {
    t = advance(t, {fixtures::at(0.0, 80.0 - y), 0.0}).tracker;
    EXPECT_GE(t.current_index, prev);
    prev = t.current_index;
  }
}

TEST(Window, StraightAlignedRoute) {
  RouteTracker t(fixtures::straight_route(4));
  const auto w = window(t, {fixtures::kOrigin, 0.0});
  EXPECT_NEAR(w.rp1.x_m, 0.0, 1e-6);
  EXPECT_NEAR(w.rp1.y_m, 12.0, 1e-6);
  EXPECT_NEAR(w.rp2.x_m, 0.0, 1e-6);
  EXPECT_GT(w.rp2.y_m, w.rp1.y_m);
}

TEST(Window, DuplicatesLastPointAtEnd) {
  RouteTracker t(fixtures::straight_route(3));
  t.current_index = 2;
  const auto w = window(t, {fixtures::kOrigin, 0.0});
  EXPECT_EQ(w.rp1, w.rp2);
}

TEST(Window, FacingEastRouteIsToTheLeft) {
  RouteTracker t(fixtures::straight_route(3));
  const auto w = window(t, {fixtures::kOrigin, 90.0});
  EXPECT_NEAR(w.rp1.x_m, -12.0, 1e-6);
  EXPECT_NEAR(w.rp1.y_m, 0.0, 1e-6);
}

TEST(Command, PublishedCases) {
  auto cmd = [](double x1, double x2) { return command({{x1, 10.0}, {x2, 20.0}}); };
  EXPECT_EQ(cmd(-5.0, 0.0), NavCommand::TurnLeft);
  EXPECT_EQ(cmd(0.0, 9.0), NavCommand::TurnRight);
  EXPECT_EQ(cmd(3.9, 7.9), NavCommand::GoStraight);
  EXPECT_EQ(cmd(-5.0, 9.0), NavCommand::TurnLeft);
  EXPECT_EQ(cmd(-4.0, 0.0), NavCommand::TurnLeft);
  EXPECT_EQ(cmd(0.0, 8.0), NavCommand::TurnRight);
}

TEST(Command, ExhaustiveIntegerGridMatchesBruteForce) {
  for (int a = -10; a <= 10; ++a) {
    for (int b = -10; b <= 10; ++b) {
      const auto got = command({{double(a), 5.0}, {double(b), 15.0}});
      const auto ref = oracle::route_command(a, b);
      const auto want = ref == oracle::Cmd::Left    ? NavCommand::TurnLeft
                        : ref == oracle::Cmd::Right ? NavCommand::TurnRight
                                                    : NavCommand::GoStraight;
      EXPECT_EQ(got, want) << a << "," << b;
    }
  }
}
