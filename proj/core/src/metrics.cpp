#include "routepilot/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "routepilot/errors.hpp"

namespace routepilot {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.empty()) throw InvalidArgument(fmt::format("{}: empty input", what));
  if (a.size() != b.size()) {
    throw InvalidArgument(fmt::format("{}: size mismatch {} vs {}", what, a.size(), b.size()));
  }
}

}  // namespace

double seg_loss(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth, "seg_loss");
  const std::size_t n = pred.size();
  std::vector<double> ce(n), inter(n), clamped(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::clamp(pred[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    const double y = truth[i];
    clamped[i] = p;
    ce[i] = -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    inter[i] = p * y;
  }
  const double cross_entropy = pairwise_sum(ce) / static_cast<double>(n);
  const double denom = pairwise_sum(clamped) + pairwise_sum(truth);
  const double dice = denom > 0.0 ? 1.0 - 2.0 * pairwise_sum(inter) / denom : 0.0;
  return cross_entropy + dice;
}

double mae(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth, "mae");
  std::vector<double> diff(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) diff[i] = std::abs(pred[i] - truth[i]);
  return pairwise_sum(diff) / static_cast<double>(diff.size());
}

double iou(const SegMap& pred, const SegMap& truth, int class_count) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) throw InvalidArgument("iou: shape mismatch");
  if (class_count <= 0 || class_count > 256) throw InvalidArgument("iou: class_count out of range");
  std::vector<std::size_t> inter(static_cast<std::size_t>(class_count), 0);
  std::vector<std::size_t> uni(static_cast<std::size_t>(class_count), 0);
  const auto p = pred.data();
  const auto t = truth.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] >= class_count || t[i] >= class_count) throw InvalidArgument("iou: class id out of range");
    if (p[i] == t[i]) {
      ++inter[p[i]];
      ++uni[p[i]];
    } else {
      ++uni[p[i]];
      ++uni[t[i]];
    }
  }
  std::vector<double> ratios;
  for (int c = 0; c < class_count; ++c) {
    if (uni[c] == 0) continue;
    ratios.push_back(static_cast<double>(inter[c]) / static_cast<double>(uni[c]));
  }
  if (ratios.empty()) return 1.0;
  return pairwise_sum(ratios) / static_cast<double>(ratios.size());
}

double total_metric(double iou_seg, double mae_st, double mae_th) { return (1.0 - iou_seg) + mae_st + mae_th; }

double mtl_loss(const TaskLosses& l) {
  return l.alpha0 * l.l_seg + l.alpha1 * l.l_wp + l.alpha2 * l.l_st + l.alpha3 * l.l_th;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  const double mean = pairwise_sum(values) / n;
  if (values.size() == 1) return {mean, 0.0};
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
  return {mean, std::sqrt(pairwise_sum(sq) / (n - 1.0))};
}

DrivabilityStats drivability(const std::vector<std::vector<InterventionEvent>>& runs, double dt) {
  DrivabilityStats s;
  for (const auto& events : runs) {
    double secs = 0.0;
    for (const auto& e : events) secs += e.duration_s(dt);
    s.counts.push_back(static_cast<double>(events.size()));
    s.seconds.push_back(secs);
  }
  s.count = mean_std(s.counts);
  s.time_s = mean_std(s.seconds);
  return s;
}

namespace {

using nlohmann::json;

json ms_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_num(double v) { return fmt::format("{:.6f}", v); }

std::string csv_opt(const std::optional<double>& v) { return v ? csv_num(*v) : std::string{}; }

}  // namespace

json to_json(const ScoreReport& r) {
  json runs = json::array();
  for (const auto& run : r.runs) {
    runs.push_back({{"name", run.name},
                    {"ticks_scored", run.ticks_scored},
                    {"iou_seg", opt_json(run.iou_seg)},
                    {"mae_wp", opt_json(run.mae_wp)},
                    {"mae_st", run.mae_st},
                    {"mae_th", run.mae_th},
                    {"total_metric", opt_json(run.total)},
                    {"interventions", run.intervention_count},
                    {"intervention_s", run.intervention_s}});
  }
  return {{"iou_averaging", "macro over classes present in prediction or truth"},
          {"runs", runs},
          {"iou_seg", r.iou_seg ? ms_json(*r.iou_seg) : json(nullptr)},
          {"mae_wp", r.mae_wp ? ms_json(*r.mae_wp) : json(nullptr)},
          {"mae_st", ms_json(r.mae_st)},
          {"mae_th", ms_json(r.mae_th)},
          {"total_metric", r.total ? ms_json(*r.total) : json(nullptr)},
          {"interventions", ms_json(r.drivability.count)},
          {"intervention_s", ms_json(r.drivability.time_s)}};
}

std::string to_csv(const ScoreReport& r) {
  std::string out = "run,ticks_scored,iou_seg,mae_wp,mae_st,mae_th,total_metric,interventions,intervention_s\n";
  for (const auto& run : r.runs) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", run.name, run.ticks_scored, csv_opt(run.iou_seg),
                       csv_opt(run.mae_wp), csv_num(run.mae_st), csv_num(run.mae_th), csv_opt(run.total),
                       run.intervention_count, csv_num(run.intervention_s));
  }
  return out;
}

}  // namespace routepilot
