// Copyright 2026 The scenesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef SCENESIM__TEST_SUPPORT_HPP_
#define SCENESIM__TEST_SUPPORT_HPP_

#include "scenesim/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace scenesim::testing
{

inline std::filesystem::path data_path(const std::string & rel)
{
  return std::filesystem::path(SCENESIM_DATA_DIR) / rel;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string & name)
{
  const auto dir = std::filesystem::temp_directory_path() / ("scenesim_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Constant-velocity states along a straight line.
inline std::vector<VehicleState> straight_states(
  double x0, double y0, double theta, double v, std::size_t n, double dt = 0.1)
{
  std::vector<VehicleState> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double d = v * dt * static_cast<double>(k);
    out[k].pose = {x0 + d * std::cos(theta), y0 + d * std::sin(theta), theta};
    out[k].vel_lon = v;
  }
  return out;
}

inline std::vector<Vec2> line_points(double y, double x0, double x1, double step)
{
  std::vector<Vec2> pts;
  for (double x = x0; x <= x1 + 1e-9; x += step) pts.push_back({x, y});
  return pts;
}

/// Two forward lanes along +x (centerlines y = 0 and y = 3.5), route on lane 0 and
/// an ego driving the route at `speed`.
inline Scenario straight_road(int t_history = 20, int t_horizon = 40, double speed = 10.0)
{
  Scenario s;
  s.id = "straight_test";
  s.dt = 0.1;
  s.t_history = t_history;
  s.t_horizon = t_horizon;
  s.map.lanes.push_back({Polyline(line_points(0.0, -50.0, 400.0, 5.0)), 3.5, LaneDirection::forward});
  s.map.lanes.push_back({Polyline(line_points(3.5, -50.0, 400.0, 5.0)), 3.5, LaneDirection::forward});
  s.map.drivable_area.push_back(Polygon({{-50.0, -2.0}, {400.0, -2.0}, {400.0, 5.5}, {-50.0, 5.5}}));
  s.map.route = Polyline(line_points(0.0, -50.0, 400.0, 5.0));
  s.ego_log.dt = s.dt;
  s.ego_log.states = straight_states(0.0, 0.0, 0.0, speed, static_cast<std::size_t>(t_history + 2 * t_horizon));
  return s;
}

inline AgentTrack agent_track(
  const std::string & id, double x0, double y0, double v, std::size_t n, AgentKind kind = AgentKind::vehicle)
{
  AgentTrack a;
  a.id = id;
  a.length = 4.8;
  a.width = 2.0;
  a.kind = kind;
  a.states = straight_states(x0, y0, 0.0, v, n);
  return a;
}

}  // namespace scenesim::testing

#endif  // SCENESIM__TEST_SUPPORT_HPP_
