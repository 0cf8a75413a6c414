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

#ifndef SCENESIM__SCENARIO_HPP_
#define SCENESIM__SCENARIO_HPP_

#include "scenesim/geometry.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace scenesim
{

/// Ego vehicle geometry and actuation limits.
struct VehicleParams
{
  double length{4.8};
  double width{2.0};
  double wheelbase{2.7};
  double a_cmd_max{3.0};
  double steer_max{0.55};
  double steer_rate_max{0.5};
  // Allowed mismatch (m/s) between finite-difference speed and stored speed.
  double kinematic_tolerance{0.05};
};

struct VehicleState
{
  Pose2D pose;
  double vel_lon{0.0};
  double vel_lat{0.0};
  double accel{0.0};
  double steering{0.0};

  double speed() const { return std::hypot(vel_lon, vel_lat); }
  Vec2 velocity() const { return rotate(Vec2{vel_lon, vel_lat}, pose.theta); }
  bool operator==(const VehicleState &) const = default;
};

enum class TrajectoryFrame { global, ego_local };

struct Trajectory
{
  double dt{0.1};
  std::vector<VehicleState> states;
  TrajectoryFrame frame{TrajectoryFrame::global};

  std::size_t size() const { return states.size(); }
  const VehicleState & front() const { return states.front(); }
  const VehicleState & back() const { return states.back(); }
  bool operator==(const Trajectory &) const = default;
};

/// Rigidly moves an ego-local trajectory so its origin sits at `anchor`.
Trajectory place_at(const Trajectory & local, const Pose2D & anchor);
/// Re-expresses a global trajectory in the frame of its own first state.
Trajectory to_ego_local(const Trajectory & global);

/// Index of the first transition violating kinematic consistency, if any.
std::optional<std::size_t> kinematic_violation(const Trajectory & traj, double tolerance);

enum class AgentKind { vehicle, static_object };

struct AgentTrack
{
  std::string id;
  double length{4.8};
  double width{2.0};
  AgentKind kind{AgentKind::vehicle};
  std::vector<VehicleState> states;

  bool is_static() const { return kind == AgentKind::static_object; }
  bool operator==(const AgentTrack &) const = default;
};

enum class LaneDirection { forward, backward };

struct Lane
{
  Polyline centerline;
  double width{3.5};
  LaneDirection direction{LaneDirection::forward};

  /// Travel direction at arclength s.
  double travel_heading(double s) const;
};

enum class LightState { red, green };

struct LightPhase
{
  double t0{0.0};
  double t1{0.0};
  LightState state{LightState::green};
  bool operator==(const LightPhase &) const = default;
};

struct TrafficLight
{
  Segment stop_line;
  std::vector<LightPhase> phases;

  /// State at scenario time t; uncovered times count as green.
  LightState state_at(double t) const;
};

struct LaneAssignment
{
  std::size_t lane{0};
  PolylineProjection projection;
};

struct MapModel
{
  std::vector<Lane> lanes;
  std::vector<Polygon> drivable_area;
  Polyline route;
  std::vector<TrafficLight> traffic_lights;

  bool in_drivable_area(const Vec2 & p) const;
  /// Lane containing p that best matches `heading`; nearest lane when none contains p.
  std::optional<LaneAssignment> assign_lane(const Vec2 & p, double heading) const;
};

struct Scenario
{
  std::string id;
  double dt{0.1};
  int t_history{20};
  int t_horizon{40};
  MapModel map;
  Trajectory ego_log;
  std::vector<AgentTrack> agents;

  std::size_t frame_count() const { return ego_log.size(); }
};

OrientedBox footprint(const VehicleState & s, double length, double width);

struct Diagnostic
{
  std::string invariant;
  std::string location;
  std::string message;
};

std::vector<Diagnostic> validate_scenario(const Scenario & s, const VehicleParams & vehicle = {});

nlohmann::json state_to_json(const VehicleState & s);
VehicleState state_from_json(const nlohmann::json & j, const std::string & where);
nlohmann::json trajectory_to_json(const Trajectory & t);
Trajectory trajectory_from_json(const nlohmann::json & j, const std::string & where = "trajectory");
nlohmann::json scenario_to_json(const Scenario & s);
/// Parses without validating; throws schema errors naming the offending field.
Scenario scenario_from_json(const nlohmann::json & j);

/// Reads, parses and validates a scenario file.
Scenario load_scenario(const std::filesystem::path & path, const VehicleParams & vehicle = {});
void write_scenario(const Scenario & s, const std::filesystem::path & path);

Trajectory load_trajectory(const std::filesystem::path & path);
void write_trajectory(const Trajectory & t, const std::filesystem::path & path);

/// Serializes JSON with a trailing newline; identical values give identical bytes.
void write_json_file(const nlohmann::json & j, const std::filesystem::path & path, int indent = -1);
nlohmann::json read_json_file(const std::filesystem::path & path);

bool operator==(const Scenario & a, const Scenario & b);

}  // namespace scenesim

#endif  // SCENESIM__SCENARIO_HPP_
