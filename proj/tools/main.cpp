#include <cmath>
#include <cstdio>
#include <functional>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "plot.hpp"
#include "routepilot/bev.hpp"
#include "routepilot/config.hpp"
#include "routepilot/controller.hpp"
#include "routepilot/errors.hpp"
#include "routepilot/geodesy.hpp"
#include "routepilot/harness.hpp"
#include "routepilot/raster_io.hpp"
#include "routepilot/stream_predictor.hpp"

namespace rp = routepilot;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

rp::GeoPoint parse_latlon(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw rp::ConfigError(fmt::format("expected LAT,LON but got '{}'", text));
  try {
    std::size_t used = 0;
    const double lat = std::stod(text.substr(0, comma), &used);
    const double lon = std::stod(text.substr(comma + 1));
    return {lat, lon};
  } catch (const std::exception&) {
    throw rp::ConfigError(fmt::format("cannot parse coordinates '{}'", text));
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw rp::Error(fmt::format("cannot write {}", path.string()));
}

json episode_summary(const rp::EpisodeResult& r) {
  double secs = 0.0;
  for (const auto& e : r.interventions) secs += e.duration_s(rp::kRecordDtS);
  return {{"name", r.run_dir.filename().string()},
          {"finished", r.finished},
          {"ticks", r.ticks},
          {"interventions", r.interventions.size()},
          {"intervention_s", secs},
          {"max_cross_track_m", std::round(r.max_cross_track_m * 1e4) / 1e4},
          {"collided", r.collided}};
}

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::optional<double> gnss_m;
  std::optional<double> bearing_deg;
  std::optional<std::string> predictor;
  std::optional<std::string> out;
  std::optional<std::string> name;
};

int run_simulate(const SimulateArgs& a) {
  std::filesystem::path path = a.config;
  if (path.empty()) {
    const auto env = rp::default_config_path();
    if (!env) throw rp::ConfigError(fmt::format("no config given and {} is not set", rp::kConfigEnvVar));
    path = *env;
  }
  rp::RunConfig c = rp::load_run_config(path);
  if (a.seed) c.noise.seed = *a.seed;
  if (a.gnss_m) c.noise.gnss_sigma_m = *a.gnss_m;
  if (a.bearing_deg) c.noise.bearing_sigma_deg = *a.bearing_deg;
  if (a.predictor) c.predictor = rp::predictor_from_string(*a.predictor);
  if (a.out) c.out_dir = *a.out;
  if (a.name) c.name = *a.name;
  c.validate();
  if (a.seeds.empty()) {
    std::cout << episode_summary(rp::run_episode(c)).dump() << '\n';
  } else {
    for (const auto& r : rp::run_seeds(c, a.seeds)) std::cout << episode_summary(r).dump() << '\n';
  }
  return 0;
}

int run_evaluate(const std::vector<std::string>& records, const std::vector<std::string>& truths,
                 const std::optional<std::string>& out) {
  std::vector<std::filesystem::path> rec(records.begin(), records.end());
  std::vector<std::filesystem::path> tru(truths.begin(), truths.end());
  rp::ScoreReport report;
  try {
    report = rp::evaluate_records(rec, tru);
  } catch (const rp::InvalidArgument& e) {
    throw rp::ConfigError(e.what());
  }
  const std::string text = rp::to_json(report).dump(2) + "\n";
  if (out) {
    std::filesystem::create_directories(*out);
    write_text(std::filesystem::path(*out) / "report.json", text);
    write_text(std::filesystem::path(*out) / "report.csv", rp::to_csv(report));
  }
  std::cout << text;
  return 0;
}

int run_geodesy(const std::string& origin, const std::string& target, double bearing) {
  const rp::GeoPoint o = parse_latlon(origin);
  const rp::GeoPoint t = parse_latlon(target);
  const rp::LocalOffset off = rp::geo_to_offset(o, t);
  const rp::LocalPoint p = rp::offset_to_vehicle_frame(off, bearing);
  std::cout << fmt::format("{{\"dx_m\": {:.4f}, \"dy_m\": {:.4f}, \"x_m\": {:.4f}, \"y_m\": {:.4f}}}\n", off.dx_m,
                           off.dy_m, p.x_m, p.y_m);
  return 0;
}

int run_bev(const std::string& depth_path, const std::string& seg_path, const std::string& intr_path,
            const std::optional<std::string>& out) {
  const rp::CameraIntrinsics intr = rp::load_intrinsics(intr_path);
  const rp::DepthMap depth = rp::load_depth(depth_path);
  const rp::SegMap seg = rp::load_pgm(seg_path);
  if (depth.rows() != intr.height || depth.cols() != intr.width || seg.rows() != intr.height ||
      seg.cols() != intr.width) {
    throw rp::ConfigError(fmt::format("raster sizes do not match the {}x{} camera", intr.height, intr.width));
  }
  const rp::BevGrid grid = rp::project_to_bev(rp::depth_to_points(depth, intr), seg);
  if (out) {
    const auto parent = std::filesystem::path(*out).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    rp::save_pgm(grid, *out);
  } else {
    rp::write_pgm(std::cout, grid);
  }
  return 0;
}

std::vector<double> split_numbers(const std::string& line) {
  std::vector<double> v;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    v.push_back(std::stod(cell, &used));
  }
  return v;
}

int run_policy_trace(const std::string& csv, const std::vector<double>& alphas, double min_actuation) {
  const rp::ControlWeights beta = rp::weights_from_alphas(alphas.at(0), alphas.at(1), alphas.at(2));
  std::ifstream in(csv);
  if (!in) throw rp::ConfigError(fmt::format("cannot open {}", csv));
  std::cout << "mlp_steering,mlp_throttle,pid_steering,pid_throttle,steering,throttle\n";
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> v;
    try {
      v = split_numbers(line);
    } catch (const std::exception&) {
      if (lineno == 1) continue;  // header
      throw rp::FormatError(fmt::format("{}:{}: expected four numbers", csv, lineno));
    }
    if (v.size() != 4) throw rp::FormatError(fmt::format("{}:{}: expected four numbers", csv, lineno));
    const rp::Control mlp = rp::Control{v[0], v[1]}.clamped();
    const rp::Control pid = rp::Control{v[2], v[3]}.clamped();
    const rp::Control f = rp::fuse(mlp, pid, beta, min_actuation);
    std::cout << fmt::format("{:.4f},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f}\n", mlp.steering, mlp.throttle, pid.steering,
                             pid.throttle, f.steering, f.throttle);
  }
  return 0;
}

int run_plot(const std::string& record_path, const std::string& out_dir) {
  const rp::DrivingRecord rec = rp::load_record(record_path);
  std::filesystem::create_directories(out_dir);
  const auto svg = std::filesystem::path(out_dir) / "trajectory.svg";
  const auto csv = std::filesystem::path(out_dir) / "ticks.csv";
  write_text(svg, rp::tools::trajectory_svg(rec));
  write_text(csv, rp::tools::tick_csv(rec));
  std::cout << svg.string() << '\n' << csv.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Route-following navigation stack and closed-loop simulator", "routepilot"};
  app.set_version_flag("--version", "routepilot 0.3.0");
  app.require_subcommand(1);
  std::function<int()> action;

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a closed-loop episode from a run configuration");
  simulate->add_option("config", sim.config, "Run configuration JSON (default: $ROUTEPILOT_CONFIG)");
  simulate->add_option("--seed", sim.seed, "Noise seed");
  simulate->add_option("--seeds", sim.seeds, "Run one episode per seed in parallel")->delimiter(',');
  simulate->add_option("--noise-gnss-m", sim.gnss_m, "GNSS noise sigma in meters")->check(CLI::NonNegativeNumber);
  simulate->add_option("--noise-bearing-deg", sim.bearing_deg, "Bearing noise sigma in degrees")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--predictor", sim.predictor, "oracle, playback or external")
      ->check(CLI::IsMember({"oracle", "playback", "external"}));
  simulate->add_option("--out", sim.out, "Output directory for run folders");
  simulate->add_option("--name", sim.name, "Run folder name");
  simulate->callback([&] { action = [&] { return run_simulate(sim); }; });

  std::vector<std::string> records, truths;
  std::optional<std::string> eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "Score driving records");
  evaluate->add_option("records", records, "Driving records (JSON Lines)")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--truth", truths, "Ground-truth records, one per record")->check(CLI::ExistingFile);
  evaluate->add_option("--out", eval_out, "Directory for report.json and report.csv");
  evaluate->callback([&] { action = [&] { return run_evaluate(records, truths, eval_out); }; });

  std::string origin, target;
  double bearing = 0.0;
  auto* geodesy = app.add_subcommand("geodesy", "Offset of TARGET from ORIGIN and its vehicle-frame position");
  geodesy->add_option("origin", origin, "LAT,LON")->required();
  geodesy->add_option("target", target, "LAT,LON")->required();
  geodesy->add_option("--bearing", bearing, "Vehicle bearing in degrees clockwise from north");
  geodesy->callback([&] { action = [&] { return run_geodesy(origin, target, bearing); }; });

  std::string depth_path, seg_path, intr_path;
  std::optional<std::string> bev_out;
  auto* bev = app.add_subcommand("bev", "Project a depth and segmentation pair into a BEV grid (PGM)");
  bev->add_option("depth", depth_path, "Depth raster (DPF1)")->required()->check(CLI::ExistingFile);
  bev->add_option("seg", seg_path, "Segmentation raster (PGM)")->required()->check(CLI::ExistingFile);
  bev->add_option("intrinsics", intr_path, "Camera intrinsics JSON")->required()->check(CLI::ExistingFile);
  bev->add_option("--out", bev_out, "Output PGM path (default: stdout)");
  bev->callback([&] { action = [&] { return run_bev(depth_path, seg_path, intr_path, bev_out); }; });

  std::string trace_csv;
  std::vector<double> alphas{1.0, 1.0, 1.0};
  double min_actuation = rp::kDefaultMinActuation;
  auto* trace = app.add_subcommand("policy-trace", "Fuse per-row agent controls from a CSV");
  trace->add_option("csv", trace_csv, "Rows of mlp_steering,mlp_throttle,pid_steering,pid_throttle")
      ->required()
      ->check(CLI::ExistingFile);
  trace->add_option("--alphas", alphas, "a1,a2,a3")->delimiter(',')->expected(3);
  trace->add_option("--min-actuation", min_actuation, "Minimum steering/throttle level");
  trace->callback([&] { action = [&] { return run_policy_trace(trace_csv, alphas, min_actuation); }; });

  std::string plot_record, plot_out = ".";
  auto* plot = app.add_subcommand("plot", "Write a trajectory SVG and per-tick CSV for a record");
  plot->add_option("record", plot_record, "Driving record")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "Output directory");
  plot->callback([&] { action = [&] { return run_plot(plot_record, plot_out); }; });

  auto* serve = app.add_subcommand("predict-serve", "Answer predictor requests on stdin with the geometric oracle");
  serve->group("");
  serve->callback([&] {
    action = [] {
      std::ios::sync_with_stdio(false);
      rp::serve_predictions(std::cin, std::cout);
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    return action();
  } catch (const rp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const rp::FormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const rp::NonPositiveAlphaError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const rp::PolarRegionError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const rp::AntimeridianError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const rp::InvalidArgument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
