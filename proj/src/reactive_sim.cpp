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

#include "scenesim/reactive_sim.hpp"

#include "scenesim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scenesim
{

double idm_accel(double v, const std::optional<Leader> & leader, const IdmParams & p)
{
  double a = 1.0 - std::pow(std::max(v, 0.0) / p.v_desired, p.delta);
  if (leader) {
    const double gap = std::max(leader->gap, 1e-3);
    const double dyn = v * p.headway + v * (v - leader->v_lead) / (2.0 * std::sqrt(p.a_max * p.b_comf));
    const double s_star = p.s0 + std::max(0.0, dyn);
    a -= (s_star / gap) * (s_star / gap);
  }
  return std::clamp(p.a_max * a, -p.b_hard, p.a_max);
}

namespace
{
double lane_sign(const Lane & lane) { return lane.direction == LaneDirection::forward ? 1.0 : -1.0; }
}  // namespace

std::optional<Leader> leader_on_lane(
  std::size_t subject, std::span<const Entity> scene, const Lane & lane, double lookahead)
{
  const Entity & me = scene[subject];
  const double dir = lane_sign(lane);
  const double s_me = lane.centerline.project(me.state.pose.position()).s;
  std::optional<Leader> best;
  double best_ds = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < scene.size(); ++j) {
    if (j == subject) continue;
    const PolylineProjection pj = lane.centerline.project(scene[j].state.pose.position());
    if (std::abs(pj.lateral) > 0.5 * lane.width) continue;
    const double ds = (pj.s - s_me) * dir;
    if (ds <= 0.0 || ds > lookahead) continue;
    if (ds < best_ds) {
      best_ds = ds;
      best = Leader{scene[j].state.vel_lon, ds - 0.5 * (me.length + scene[j].length), scene[j].id};
    }
  }
  return best;
}

std::optional<Leader> select_leader(
  std::size_t subject, std::span<const Entity> scene, const MapModel & map, double lookahead)
{
  const VehicleState & st = scene[subject].state;
  const auto assignment = map.assign_lane(st.pose.position(), st.pose.theta);
  if (!assignment) return std::nullopt;
  return leader_on_lane(subject, scene, map.lanes[assignment->lane], lookahead);
}

std::optional<double> stop_line_arclength(const Lane & lane, const Segment & stop_line)
{
  const auto & pts = lane.centerline.points();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (auto hit = segment_intersection({pts[i], pts[i + 1]}, stop_line)) {
      return lane.centerline.arclength_at(i) + (*hit - pts[i]).norm();
    }
  }
  return std::nullopt;
}

std::optional<Leader> red_light_leader(
  const VehicleState & state, double length, const Lane & lane, const MapModel & map, double time,
  const IdmParams & idm)
{
  std::optional<Leader> best;
  if (map.traffic_lights.empty()) return best;
  const double dir = lane_sign(lane);
  const double s_me = lane.centerline.project(state.pose.position()).s;
  for (const TrafficLight & tl : map.traffic_lights) {
    if (tl.state_at(time) != LightState::red) continue;
    const auto s_line = stop_line_arclength(lane, tl.stop_line);
    if (!s_line) continue;
    const double gap = (*s_line - s_me) * dir - 0.5 * length;
    if (gap <= 0.0) continue;
    const double v = state.vel_lon;
    if (v * v / (2.0 * gap) > idm.b_hard) continue;
    if (!best || gap < best->gap) best = Leader{0.0, gap, "stop_line"};
  }
  return best;
}

double pure_pursuit_steer_rate(
  const VehicleState & state, const Lane & lane, double offset, double lookahead,
  const VehicleParams & vehicle, double dt)
{
  const double dir = lane_sign(lane);
  const Vec2 pos = state.pose.position();
  const PolylineProjection proj = lane.centerline.project(pos);
  const Pose2D on_line = lane.centerline.pose_at(proj.s + dir * lookahead);
  const double travel = dir > 0.0 ? on_line.theta : normalize_angle(on_line.theta + kPi);
  const Vec2 target = on_line.position() + Vec2{-std::sin(travel), std::cos(travel)} * offset;
  const Vec2 rel = target - pos;
  const double ld = std::max(rel.norm(), 1e-3);
  const double alpha = angle_diff(std::atan2(rel.y, rel.x), state.pose.theta);
  const double cmd = std::clamp(
    std::atan(2.0 * vehicle.wheelbase * std::sin(alpha) / ld), -vehicle.steer_max, vehicle.steer_max);
  return (cmd - state.steering) / dt;
}

SceneSnapshot SceneStates::snapshot(std::size_t k) const
{
  SceneSnapshot snap;
  snap.ego = ego.at(k);
  snap.agents.reserve(agents.size());
  for (const AgentStates & a : agents) snap.agents.push_back(a.states.at(k));
  return snap;
}

Trajectory SceneStates::ego_trajectory() const
{
  return Trajectory{dt, ego, TrajectoryFrame::global};
}

bool SceneStates::operator==(const SceneStates & o) const
{
  if (dt != o.dt || t_start != o.t_start || ego != o.ego || agents.size() != o.agents.size()) return false;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentStates & a = agents[i];
    const AgentStates & b = o.agents[i];
    if (a.id != b.id || a.length != b.length || a.width != b.width || a.is_static != b.is_static ||
        a.states != b.states) {
      return false;
    }
  }
  return true;
}

const char * to_string(RolloutMode mode)
{
  switch (mode) {
    case RolloutMode::reactive:
      return "reactive";
    case RolloutMode::nonreactive:
      return "nonreactive";
    case RolloutMode::log_replay_ego:
      return "log_replay_ego";
  }
  return "unknown";
}

std::vector<VehicleState> step_agents(
  const Scenario & scenario, const VehicleState & ego, std::span<const VehicleState> agents,
  double time, const SimParams & params)
{
  const double dt = scenario.dt;
  std::vector<Entity> scene;
  scene.reserve(agents.size() + 1);
  scene.push_back({"ego", ego, params.vehicle.length, params.vehicle.width});
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentTrack & track = scenario.agents[i];
    scene.push_back({track.id, agents[i], track.length, track.width});
  }

  VehicleParams agent_vehicle = params.vehicle;
  agent_vehicle.a_cmd_max = std::max(params.idm.a_max, params.idm.b_hard);
  agent_vehicle.steer_rate_max = params.agent_steer_rate_max;

  std::vector<VehicleState> next(agents.begin(), agents.end());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (scenario.agents[i].is_static()) continue;
    const VehicleState & st = agents[i];
    const auto assignment = scenario.map.assign_lane(st.pose.position(), st.pose.theta);
    std::optional<Leader> leader;
    double steer_rate = 0.0;
    if (assignment) {
      const Lane & lane = scenario.map.lanes[assignment->lane];
      leader = leader_on_lane(i + 1, scene, lane, params.leader_lookahead);
      const auto light = red_light_leader(st, scenario.agents[i].length, lane, scenario.map, time, params.idm);
      if (light && (!leader || light->gap < leader->gap)) leader = light;
      steer_rate = pure_pursuit_steer_rate(st, lane, 0.0, params.pure_pursuit_lookahead, agent_vehicle, dt);
    }
    const double a = idm_accel(st.vel_lon, leader, params.idm);
    next[i] = bicycle_step(st, {a, steer_rate}, dt, agent_vehicle);
  }
  return next;
}

SceneStates rollout(
  const Scenario & scenario, const Trajectory & ego_plan, std::size_t t_start, std::size_t horizon,
  RolloutMode mode, const SimParams & params, const SceneSnapshot * init)
{
  if (horizon == 0) throw Error(ErrorKind::invalid_argument, "rollout: horizon must be positive");
  if (t_start + horizon > scenario.frame_count()) {
    throw Error(
      ErrorKind::invalid_argument, "rollout: frames [" + std::to_string(t_start) + ", " +
                                     std::to_string(t_start + horizon) + ") exceed the scenario's " +
                                     std::to_string(scenario.frame_count()) + " frames");
  }
  if (mode != RolloutMode::log_replay_ego) {
    if (std::abs(ego_plan.dt - scenario.dt) > 1e-9) {
      throw Error(ErrorKind::invalid_argument, "rollout: plan dt differs from scenario dt");
    }
    if (ego_plan.size() < horizon) {
      throw Error(ErrorKind::invalid_argument, "rollout: plan shorter than the horizon");
    }
  }
  if (init && init->agents.size() != scenario.agents.size()) {
    throw Error(ErrorKind::invalid_argument, "rollout: initial snapshot agent count mismatch");
  }

  SceneStates out;
  out.dt = scenario.dt;
  out.t_start = t_start;

  if (mode == RolloutMode::log_replay_ego) {
    out.ego.assign(
      scenario.ego_log.states.begin() + static_cast<std::ptrdiff_t>(t_start),
      scenario.ego_log.states.begin() + static_cast<std::ptrdiff_t>(t_start + horizon));
  } else {
    const VehicleState start = init ? init->ego : scenario.ego_log.states[t_start];
    if (horizon == 1) {
      out.ego = {start};
    } else {
      Trajectory ref = ego_plan;
      ref.states.resize(horizon);
      out.ego = lqr_track(ref, start, params.lqr, params.vehicle).states;
    }
  }

  out.agents.reserve(scenario.agents.size());
  for (const AgentTrack & a : scenario.agents) {
    AgentStates as;
    as.id = a.id;
    as.length = a.length;
    as.width = a.width;
    as.is_static = a.is_static();
    as.states.reserve(horizon);
    out.agents.push_back(std::move(as));
  }

  if (mode == RolloutMode::nonreactive) {
    for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
      const auto & src = scenario.agents[i].states;
      out.agents[i].states.assign(
        src.begin() + static_cast<std::ptrdiff_t>(t_start),
        src.begin() + static_cast<std::ptrdiff_t>(t_start + horizon));
    }
    return out;
  }

  std::vector<VehicleState> current;
  current.reserve(scenario.agents.size());
  for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
    current.push_back(init ? init->agents[i] : scenario.agents[i].states[t_start]);
  }
  for (std::size_t k = 0; k < horizon; ++k) {
    for (std::size_t i = 0; i < current.size(); ++i) out.agents[i].states.push_back(current[i]);
    if (k + 1 == horizon) break;
    const double time = static_cast<double>(t_start + k) * scenario.dt;
    current = step_agents(scenario, out.ego[k], current, time, params);
  }
  return out;
}

}  // namespace scenesim
