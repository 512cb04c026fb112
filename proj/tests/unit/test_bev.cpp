#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "routepilot/bev.hpp"
#include "routepilot/raster_io.hpp"
#include "fixtures.hpp"

using namespace routepilot;

namespace {

CloudPoint pt(double x, double y, double z, std::uint32_t row = 0, std::uint32_t col = 0) {
  CloudPoint p;
  p.x = x;
  p.y = y;
  p.z = z;
  p.row = row;
  p.col = col;
  return p;
}

}  // namespace

TEST(Intrinsics, Validation) {
  CameraIntrinsics c;
  EXPECT_NO_THROW(c.validate());
  c.fx = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.cx = 512.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  EXPECT_THROW(parse_intrinsics("{\"fy\": -1}"), InvalidArgument);
  EXPECT_THROW(parse_intrinsics("[1]"), FormatError);
  EXPECT_DOUBLE_EQ(parse_intrinsics("{\"cam_height_m\": 1.2}").cam_height_m, 1.2);
}

TEST(DepthToPoints, PrincipalRay) {
  CameraIntrinsics c;
  DepthMap d(c.height, c.width, std::numeric_limits<float>::quiet_NaN());
  d(128, 256) = 7.0f;
  const auto pts = depth_to_points(d, c);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_NEAR(pts[0].x, 0.0, 1e-12);
  EXPECT_NEAR(pts[0].y, 7.0, 1e-12);
  EXPECT_NEAR(pts[0].z, c.cam_height_m, 1e-12);
  EXPECT_EQ(pts[0].row, 128u);
  EXPECT_EQ(pts[0].col, 256u);
}

TEST(DepthToPoints, InvalidPixelsSkipped) {
  CameraIntrinsics c;
  DepthMap d(c.height, c.width, 0.0f);
  d(0, 0) = -1.0f;
  d(0, 1) = std::numeric_limits<float>::infinity();
  EXPECT_TRUE(depth_to_points(d, c).empty());
}

TEST(DepthToPoints, FlatGroundRenderIsOnThePlane) {
  for (double pitch : {0.0, 5.0, 12.0}) {
    CameraIntrinsics c;
    c.cam_pitch_deg = pitch;
    // Analytic ground depth for a pitched camera: the ray for row v meets z = 0.
    const double p = pitch * M_PI / 180.0;
    DepthMap d(c.height, c.width, std::numeric_limits<float>::infinity());
    for (std::size_t v = 0; v < c.height; ++v) {
      const double k = (static_cast<double>(v) - c.cy) / c.fy;
      const double drop = std::sin(p) + k * std::cos(p);
      if (drop <= 1e-3) continue;
      for (std::size_t u = 0; u < c.width; ++u) d(v, u) = static_cast<float>(c.cam_height_m / drop);
    }
    const auto pts = depth_to_points(d, c);
    EXPECT_FALSE(pts.empty());
    for (const auto& q : pts) EXPECT_LT(std::abs(q.z), 1e-6);
  }
}

TEST(BevCell, GeometryAnchors) {
  BevCell c;
  ASSERT_TRUE(bev_cell_of(0.0, 0.0, c));
  EXPECT_EQ(c.row, 127u);
  EXPECT_EQ(c.col, 128u);
  ASSERT_TRUE(bev_cell_of(0.0, 12.0, c));
  EXPECT_EQ(c.row, 63u);
  EXPECT_EQ(c.col, 128u);
  ASSERT_TRUE(bev_cell_of(-24.0, 23.99, c));
  EXPECT_EQ(c.row, 0u);
  EXPECT_EQ(c.col, 0u);
  EXPECT_FALSE(bev_cell_of(0.0, -0.01, c));
  EXPECT_FALSE(bev_cell_of(24.0, 1.0, c));
  EXPECT_FALSE(bev_cell_of(0.0, 24.0, c));
  EXPECT_DOUBLE_EQ(BevGeometry::kRows * BevGeometry::kCellM, 24.0);
  EXPECT_DOUBLE_EQ(BevGeometry::kCols * BevGeometry::kCellM / 2.0, 24.0);
}

TEST(ProjectToBev, SingleRoadPoint) {
  SegMap seg(1, 1, 1);
  const auto g = project_to_bev({pt(0.0, 12.0, 0.0)}, seg);
  EXPECT_EQ(g(63, 128), 1);
  int touched = 0;
  for (auto v : g.data()) touched += v != 0;
  EXPECT_EQ(touched, 1);
}

TEST(ProjectToBev, RangeAndHeightClip) {
  SegMap seg(1, 1, 1);
  const auto g = project_to_bev({pt(0.0, 30.0, 0.0), pt(0.0, 5.0, 3.5), pt(0.0, 5.0, -0.6), pt(0, -1, 0)}, seg);
  for (auto v : g.data()) EXPECT_EQ(v, 0);
}

TEST(ProjectToBev, HighestPointWinsAndTiesGoToSmallerClass) {
  SegMap seg(1, 3);
  seg(0, 0) = 1;
  seg(0, 1) = 14;
  seg(0, 2) = 12;
  const auto g = project_to_bev({pt(0.05, 5.0, 0.0, 0, 0), pt(0.1, 5.05, 0.8, 0, 1)}, seg);
  BevCell c;
  ASSERT_TRUE(bev_cell_of(0.05, 5.0, c));
  EXPECT_EQ(g(c.row, c.col), 14);
  const auto tie = project_to_bev({pt(0.1, 5.0, 0.8, 0, 1), pt(0.1, 5.0, 0.8, 0, 2)}, seg);
  EXPECT_EQ(tie(c.row, c.col), 12);
  const auto rev = project_to_bev({pt(0.1, 5.0, 0.8, 0, 2), pt(0.1, 5.0, 0.8, 0, 1)}, seg);
  EXPECT_EQ(rev, tie);
}

TEST(ProjectToBev, MatchesBruteForceOnRandomScenes) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> depth(0.3, 40.0), pitch(-3.0, 10.0), unit(0.0, 1.0);
  std::uniform_int_distribution<int> cls(0, 19);
  for (int scene = 0; scene < 5; ++scene) {
    CameraIntrinsics c;
    c.width = 128;
    c.height = 64;
    c.fx = c.fy = 64.0;
    c.cx = 64.0;
    c.cy = 32.0;
    c.cam_pitch_deg = pitch(rng);
    DepthMap d(c.height, c.width);
    SegMap s(c.height, c.width);
    for (std::size_t i = 0; i < d.size(); ++i) {
      d.data()[i] = unit(rng) < 0.1 ? std::numeric_limits<float>::quiet_NaN() : static_cast<float>(depth(rng));
      s.data()[i] = static_cast<std::uint8_t>(cls(rng));
    }
    const auto got = project_to_bev(depth_to_points(d, c), s);
    EXPECT_EQ(got, oracle::brute_force_bev(d, s, c)) << "scene " << scene;
    for (auto v : got.data()) EXPECT_LT(v, 20);
  }
}

TEST(ProjectToBev, RejectsBadPixelTags) {
  SegMap seg(2, 2, 1);
  EXPECT_THROW(project_to_bev({pt(0, 1, 0, 5, 0)}, seg), InvalidArgument);
  seg(0, 0) = 40;
  EXPECT_THROW(project_to_bev({pt(0, 1, 0, 0, 0)}, seg), InvalidArgument);
}

TEST(RasterIo, DepthRoundTrip) {
  DepthMap d(3, 4);
  for (std::size_t i = 0; i < d.size(); ++i) d.data()[i] = static_cast<float>(i) * 0.5f;
  d(1, 1) = std::numeric_limits<float>::infinity();
  std::stringstream ss;
  write_depth(ss, d);
  EXPECT_EQ(ss.str().size(), 16u + 12u * 4u);
  EXPECT_EQ(ss.str().substr(0, 4), "DPF1");
  EXPECT_EQ(read_depth(ss), d);
}

TEST(RasterIo, PgmRoundTripAndErrors) {
  Raster<std::uint8_t> r(2, 3, std::vector<std::uint8_t>{0, 1, 2, 3, 4, 19});
  std::stringstream ss;
  write_pgm(ss, r);
  EXPECT_EQ(read_pgm(ss), r);
  std::stringstream bad("P2\n1 1\n255\n0");
  EXPECT_THROW(read_pgm(bad), FormatError);
  std::stringstream trunc("DPF1\x02");
  EXPECT_THROW(read_depth(trunc), FormatError);
}

TEST(BevGolden, CliGoldenMatchesBruteForce) {
  const auto dir = fixtures::data_dir();
  const auto intr = load_intrinsics(dir / "cli" / "intrinsics.json");
  const auto want = oracle::brute_force_bev(load_depth(dir / "cli" / "depth.dpf"), load_pgm(dir / "cli" / "seg.pgm"), intr);
  const auto golden = load_pgm(dir / "golden" / "bev.pgm");
  ASSERT_EQ(golden.rows(), want.rows());
  ASSERT_EQ(golden.cols(), want.cols());
  std::size_t painted = 0;
  for (std::size_t i = 0; i < golden.size(); ++i) {
    EXPECT_EQ(golden.data()[i], want.data()[i]) << "cell " << i;
    painted += golden.data()[i] != 0 ? 1 : 0;
  }
  EXPECT_GT(painted, 100u);
}
