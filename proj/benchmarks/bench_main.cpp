#include <random>

#include <benchmark/benchmark.h>

#include "routepilot/bev.hpp"
#include "routepilot/controller.hpp"
#include "routepilot/geodesy.hpp"
#include "routepilot/vehicle_sim.hpp"
#include "routepilot/world.hpp"

namespace rp = routepilot;

namespace {

const rp::World& smoke_world() {
  static const rp::World world = rp::load_world(std::filesystem::path(ROUTEPILOT_BENCH_DATA_DIR) / "smoke" / "world.json");
  return world;
}

rp::VehicleState start_state(const rp::World& world) {
  rp::VehicleState s;
  s.pose = {world.to_geo({0.0, 30.0}), 0.0};
  return s;
}

void BM_RenderCamera(benchmark::State& state) {
  const auto& world = smoke_world();
  const rp::CameraIntrinsics intr;
  const auto vehicle = start_state(world);
  rp::DepthMap depth;
  rp::SegMap seg;
  for (auto _ : state) {
    rp::render_camera(world, vehicle, intr, depth, seg);
    benchmark::DoNotOptimize(depth.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(intr.width * intr.height));
}
BENCHMARK(BM_RenderCamera)->Unit(benchmark::kMillisecond);

void BM_DepthToPoints(benchmark::State& state) {
  const auto& world = smoke_world();
  const rp::CameraIntrinsics intr;
  rp::DepthMap depth;
  rp::SegMap seg;
  rp::render_camera(world, start_state(world), intr, depth, seg);
  for (auto _ : state) {
    auto points = rp::depth_to_points(depth, intr);
    benchmark::DoNotOptimize(points.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(intr.width * intr.height));
}
BENCHMARK(BM_DepthToPoints)->Unit(benchmark::kMillisecond);

void BM_ProjectToBev(benchmark::State& state) {
  const auto& world = smoke_world();
  const rp::CameraIntrinsics intr;
  rp::DepthMap depth;
  rp::SegMap seg;
  rp::render_camera(world, start_state(world), intr, depth, seg);
  const auto points = rp::depth_to_points(depth, intr);
  for (auto _ : state) {
    auto grid = rp::project_to_bev(points, seg);
    benchmark::DoNotOptimize(grid.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(points.size()));
}
BENCHMARK(BM_ProjectToBev)->Unit(benchmark::kMillisecond);

void BM_Fuse(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> st(-1.0, 1.0), th(0.0, 1.0);
  std::vector<rp::Control> mlp(1024), pid(1024);
  for (std::size_t i = 0; i < mlp.size(); ++i) {
    mlp[i] = {st(rng), th(rng)};
    pid[i] = {st(rng), th(rng)};
  }
  const auto beta = rp::weights_from_alphas(1.0, 1.0, 1.0);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rp::fuse(mlp[i], pid[i], beta));
    i = (i + 1) & 1023;
  }
}
BENCHMARK(BM_Fuse);

void BM_GeoToVehicleFrame(benchmark::State& state) {
  const rp::Pose pose{{34.7, 137.41}, 33.0};
  const rp::GeoPoint target{34.7011, 137.4104};
  for (auto _ : state) benchmark::DoNotOptimize(rp::route_point_to_local(pose, target));
}
BENCHMARK(BM_GeoToVehicleFrame);

void BM_VehicleStep(benchmark::State& state) {
  const rp::VehicleParams params;
  rp::VehicleState s;
  s.pose = {{34.7, 137.41}, 0.0};
  const rp::Control c{0.3, 0.6};
  for (auto _ : state) {
    s = rp::step(s, c, params);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_VehicleStep);

}  // namespace

BENCHMARK_MAIN();
