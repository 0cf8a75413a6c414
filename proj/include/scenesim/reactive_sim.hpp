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

#ifndef SCENESIM__REACTIVE_SIM_HPP_
#define SCENESIM__REACTIVE_SIM_HPP_

#include "scenesim/kinematics.hpp"
#include "scenesim/scenario.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scenesim
{

struct IdmParams
{
  double v_desired{13.0};
  double headway{1.5};
  double s0{2.0};
  double a_max{1.5};
  double b_comf{2.0};
  double delta{4.0};
  // hard braking bound applied to the IDM output
  double b_hard{4.0};
};

struct Leader
{
  double v_lead{0.0};
  double gap{0.0};
  std::string id;
};

/// Intelligent Driver Model acceleration, clamped to [-b_hard, a_max].
double idm_accel(double v, const std::optional<Leader> & leader, const IdmParams & p);

/// Everything a simulation step needs besides the scenario itself.
struct SimParams
{
  VehicleParams vehicle;
  LqrParams lqr;
  IdmParams idm;
  double pure_pursuit_lookahead{8.0};
  double leader_lookahead{100.0};
  // agent actuation: steering rate limit for lane following
  double agent_steer_rate_max{1.0};
};

/// Instantaneous view of one traffic participant.
struct Entity
{
  std::string id;
  VehicleState state;
  double length{4.8};
  double width{2.0};
};

/// Nearest entity ahead of `scene[subject]` along the given lane within half a lane
/// width laterally and `lookahead` meters; gap is bumper to bumper.
std::optional<Leader> leader_on_lane(
  std::size_t subject, std::span<const Entity> scene, const Lane & lane, double lookahead);

/// Leader selection with instantaneous lane assignment of the subject.
std::optional<Leader> select_leader(
  std::size_t subject, std::span<const Entity> scene, const MapModel & map, double lookahead = 100.0);

/// A red stop line ahead on `lane` that the vehicle can still stop for, as a standing leader.
std::optional<Leader> red_light_leader(
  const VehicleState & state, double length, const Lane & lane, const MapModel & map, double time,
  const IdmParams & idm);

/// Arclength along `lane` where a stop line crosses its centerline.
std::optional<double> stop_line_arclength(const Lane & lane, const Segment & stop_line);

/// Steering rate that drives the steering toward the pure-pursuit command for a
/// target point `lookahead` meters ahead on the lane centerline shifted by `offset`.
double pure_pursuit_steer_rate(
  const VehicleState & state, const Lane & lane, double offset, double lookahead,
  const VehicleParams & vehicle, double dt);

struct AgentStates
{
  std::string id;
  double length{4.8};
  double width{2.0};
  bool is_static{false};
  std::vector<VehicleState> states;
};

struct SceneSnapshot
{
  VehicleState ego;
  std::vector<VehicleState> agents;  // scenario agent order
};

/// Ego and agent states over frames [t_start, t_start + size()).
struct SceneStates
{
  double dt{0.1};
  std::size_t t_start{0};
  std::vector<VehicleState> ego;
  std::vector<AgentStates> agents;

  std::size_t size() const { return ego.size(); }
  SceneSnapshot snapshot(std::size_t k) const;
  Trajectory ego_trajectory() const;
  bool operator==(const SceneStates & o) const;
};

enum class RolloutMode { reactive, nonreactive, log_replay_ego };

const char * to_string(RolloutMode mode);

/// Simulates frames [t_start, t_start + horizon). The ego executes `ego_plan` through
/// LQR tracking (or replays the log); agents follow IDM along their lanes in reactive
/// modes and replay their tracks otherwise. `init` overrides the logged start states.
SceneStates rollout(
  const Scenario & scenario, const Trajectory & ego_plan, std::size_t t_start, std::size_t horizon,
  RolloutMode mode, const SimParams & params, const SceneSnapshot * init = nullptr);

/// One synchronous reactive update of all agents from frame states `agents` given the ego state.
std::vector<VehicleState> step_agents(
  const Scenario & scenario, const VehicleState & ego, std::span<const VehicleState> agents,
  double time, const SimParams & params);

}  // namespace scenesim

#endif  // SCENESIM__REACTIVE_SIM_HPP_
