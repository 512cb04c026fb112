#pragma once

// Line protocol for plugging an external predictor into the simulator. One
// JSON object per line in each direction.
//
// Request:
//   {"t": 12,
//    "bev": {"rows": 128, "cols": 256, "rle": [[class, count], ...]},
//    "route": {"rp1": [x, y], "rp2": [x, y]},
//    "wheels": {"omega_l": .., "omega_r": .., "radius": ..},
//    "speed_target": 1.25}
// Response:
//   {"deltas": [[dx, dy], [dx, dy], [dx, dy]],
//    "control": {"steering": .., "throttle": ..}}

#include <cstdio>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "routepilot/predictor.hpp"

namespace routepilot {

// Run-length encoding of a raster in row-major order.
std::vector<std::pair<std::uint8_t, std::uint32_t>> rle_encode(const Raster<std::uint8_t>& r);
Raster<std::uint8_t> rle_decode(std::size_t rows, std::size_t cols,
                                const std::vector<std::pair<std::uint8_t, std::uint32_t>>& runs);

nlohmann::json encode_request(int t, const ObservationBundle& obs, double speed_target);
// Throws FormatError on malformed requests.
ObservationBundle decode_request(const nlohmann::json& j, double& speed_target);

nlohmann::json encode_response(const PredictionOutput& out);
// Throws FormatError on malformed responses or out-of-bound deltas.
PredictionOutput decode_response(const nlohmann::json& j);

// Answers requests from `in` with the geometric oracle until end of input.
// Returns the number of requests served.
std::size_t serve_predictions(std::istream& in, std::ostream& out, const PursuitConfig& config = {});

// Child process speaking the protocol on its stdin/stdout, started through
// /bin/sh -c. Not copyable; the child is reaped on destruction.
class ExternalPredictor {
 public:
  explicit ExternalPredictor(const std::string& command);
  ~ExternalPredictor();
  ExternalPredictor(const ExternalPredictor&) = delete;
  ExternalPredictor& operator=(const ExternalPredictor&) = delete;

  // Throws Error when the child exits or answers malformed output.
  PredictionOutput predict(int t, const ObservationBundle& obs, double speed_target);

 private:
  int pid_ = -1;
  std::FILE* to_child_ = nullptr;
  std::FILE* from_child_ = nullptr;
};

}  // namespace routepilot
