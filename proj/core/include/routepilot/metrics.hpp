#pragma once

// Offline losses and scores, plus the online drivability statistics.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "routepilot/raster.hpp"
#include "routepilot/vehicle_sim.hpp"

namespace routepilot {

inline constexpr double kProbabilityClamp = 1e-7;

// Sum with pairwise reduction; the order depends only on the length.
double pairwise_sum(std::span<const double> values);

// Mean binary cross-entropy plus soft dice loss over flattened per-class
// probability and one-hot rasters of equal length. Probabilities are clamped
// to [1e-7, 1 - 1e-7]. Throws InvalidArgument on a length mismatch or empty input.
double seg_loss(std::span<const double> pred, std::span<const double> truth);

// Mean absolute error. Throws InvalidArgument on mismatch or empty input.
double mae(std::span<const double> pred, std::span<const double> truth);

// Per-class intersection over union, macro-averaged over the classes present
// in either raster. Two empty rasters score 1.
double iou(const SegMap& pred, const SegMap& truth, int class_count = kClassCount);

// (1 - iou) + mae_steering + mae_throttle.
double total_metric(double iou_seg, double mae_st, double mae_th);

struct TaskLosses {
  double l_seg = 0.0;
  double l_wp = 0.0;
  double l_st = 0.0;
  double l_th = 0.0;
  double alpha0 = 1.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double alpha3 = 1.0;
};

double mtl_loss(const TaskLosses& losses);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

struct DrivabilityStats {
  std::vector<double> counts;   // per run
  std::vector<double> seconds;  // per run, event durations summed
  MeanStd count;
  MeanStd time_s;
};

DrivabilityStats drivability(const std::vector<std::vector<InterventionEvent>>& runs, double dt);

struct RunScore {
  std::string name;
  std::size_t ticks_scored = 0;
  std::optional<double> iou_seg;
  std::optional<double> mae_wp;  // absent when no tick has ground-truth waypoints
  double mae_st = 0.0;
  double mae_th = 0.0;
  std::optional<double> total;
  double intervention_count = 0.0;
  double intervention_s = 0.0;
};

struct ScoreReport {
  std::vector<RunScore> runs;
  std::optional<MeanStd> iou_seg;
  std::optional<MeanStd> mae_wp;
  MeanStd mae_st;
  MeanStd mae_th;
  std::optional<MeanStd> total;
  DrivabilityStats drivability;
};

nlohmann::json to_json(const ScoreReport& report);
// Header line plus one row per run.
std::string to_csv(const ScoreReport& report);

}  // namespace routepilot
