#pragma once

#include <filesystem>
#include <vector>

#include "routepilot/geodesy.hpp"
#include "routepilot/route.hpp"

namespace fixtures {

inline const routepilot::GeoPoint kOrigin{34.70, 137.41};

inline routepilot::GeoPoint at(double east, double north) {
  return routepilot::offset_to_geo(kOrigin, {east, north});
}

// Points every `spacing` meters due north of the origin.
inline routepilot::Route straight_route(int n, double spacing = 12.0) {
  std::vector<routepilot::GeoPoint> pts;
  for (int i = 0; i < n; ++i) pts.push_back(at(0.0, spacing * (i + 1)));
  return routepilot::Route(pts);
}

inline std::filesystem::path data_dir() { return ROUTEPILOT_TEST_DATA_DIR; }

inline std::filesystem::path scratch_dir(const char* name) {
  auto p = std::filesystem::path(ROUTEPILOT_TEST_SCRATCH_DIR) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace fixtures
