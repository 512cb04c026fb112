#pragma once

#include <string>

#include "routepilot/record.hpp"

namespace routepilot::tools {

// Trajectory in meters east/north of the first fix, route points, and
// intervention ticks highlighted.
std::string trajectory_svg(const DrivingRecord& record);

// t,time_s,x_m,y_m,bearing_deg,steering,throttle,route_index,command,intervention
std::string tick_csv(const DrivingRecord& record);

}  // namespace routepilot::tools
