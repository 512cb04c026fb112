#pragma once

// Episode runner and record scoring.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "routepilot/config.hpp"
#include "routepilot/metrics.hpp"
#include "routepilot/record.hpp"
#include "routepilot/world.hpp"

namespace routepilot {

struct EpisodeResult {
  std::filesystem::path run_dir;
  std::filesystem::path record_path;
  bool finished = false;
  int ticks = 0;
  std::vector<InterventionEvent> interventions;
  // Largest distance of the true position from the route polyline.
  double max_cross_track_m = 0.0;
  // True if the footprint ever overlapped a solid cell.
  bool collided = false;
};

struct Episode {
  DrivingRecord record;
  EpisodeResult result;
};

// Simulates one episode in memory. Rasters are written under `raster_dir`
// only when config.save_rasters is set and a directory is given.
// Throws ConfigError for setup problems and Error for runtime failures.
Episode simulate_episode(const RunConfig& config, const World& world,
                         const std::optional<std::filesystem::path>& raster_dir = std::nullopt);

// Loads the world, simulates, and writes config.json, record.jsonl and
// result.json into out_dir/name.
EpisodeResult run_episode(const RunConfig& config);

// One episode per seed, run concurrently; names get a "-seed<N>" suffix.
std::vector<EpisodeResult> run_seeds(const RunConfig& config, const std::vector<std::uint64_t>& seeds);

nlohmann::json to_json(const EpisodeResult& result);

// Intervention events recovered from contiguous runs of intervention_flag.
std::vector<InterventionEvent> events_from_flags(const std::vector<RecordTick>& ticks);

// Scores each record against its truth record (or itself when `truths` is
// empty) and aggregates across runs. Segmentation IoU is only computed when
// both records carry segmentation rasters and a separate truth is given.
// Throws InvalidArgument for no input or mismatched lists.
ScoreReport evaluate_records(const std::vector<std::filesystem::path>& records,
                             const std::vector<std::filesystem::path>& truths = {});

}  // namespace routepilot
