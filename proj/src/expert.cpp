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

#include "scenesim/expert.hpp"

#include "scenesim/error.hpp"
#include "scenesim/kinematics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace scenesim
{

MatchingVector build_matching_vector(const Trajectory & traj, std::size_t horizon)
{
  if (traj.size() < 2) throw Error(ErrorKind::invalid_argument, "build_matching_vector: trajectory too short");
  if (horizon > 0 && traj.size() != horizon) {
    throw Error(
      ErrorKind::invalid_argument, "build_matching_vector: trajectory has " + std::to_string(traj.size()) +
                                     " states, expected " + std::to_string(horizon));
  }
  const VehicleState & first = traj.front();
  const Pose2D end = to_local(first.pose, traj.back().pose);
  return {first.vel_lon, first.vel_lat, 0.0, end.x, end.y, normalize_angle(end.theta)};
}

MatchingVector recovery_target(const VehicleState & start, const Pose2D & goal)
{
  const Pose2D end = to_local(start.pose, goal);
  return {start.vel_lon, start.vel_lat, 0.0, end.x, end.y, normalize_angle(end.theta)};
}

double matching_distance(const MatchingVector & a, const MatchingVector & b, const MatchingScale & scale)
{
  return scale[0] * std::abs(a.v_x - b.v_x) + scale[1] * std::abs(a.v_y - b.v_y) +
         scale[2] * std::abs(angle_diff(a.theta0, b.theta0)) + scale[3] * std::abs(a.x_end - b.x_end) +
         scale[4] * std::abs(a.y_end - b.y_end) + scale[5] * std::abs(angle_diff(a.theta_end, b.theta_end));
}

MatchingIndex::MatchingIndex(const Vocabulary & vocab)
{
  vectors_.reserve(vocab.size());
  for (const Trajectory & t : vocab.entries) vectors_.push_back(build_matching_vector(t));
}

std::size_t MatchingIndex::nearest(const MatchingVector & target, const MatchingScale & scale) const
{
  if (vectors_.empty()) throw Error(ErrorKind::invalid_argument, "recovery_retrieve: empty vocabulary");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    const double d = matching_distance(vectors_[i], target, scale);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::size_t recovery_retrieve_index(const MatchingVector & target, const Vocabulary & vocab, const MatchingScale & scale)
{
  if (vocab.empty()) throw Error(ErrorKind::invalid_argument, "recovery_retrieve: empty vocabulary");
  return MatchingIndex(vocab).nearest(target, scale);
}

Trajectory recovery_retrieve(const MatchingVector & target, const Vocabulary & vocab, const MatchingScale & scale)
{
  return vocab.entries[recovery_retrieve_index(target, vocab, scale)];
}

void validate_planner_params(const PlannerParams & p)
{
  if (p.speed_fractions.empty() || p.lateral_offsets.empty()) {
    throw Error(ErrorKind::invalid_argument, "planner: proposal lists must be nonempty");
  }
  for (double f : p.speed_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorKind::invalid_argument, "planner: speed fraction outside [0, 1]");
  }
  for (double o : p.lateral_offsets) {
    if (!(std::abs(o) <= 0.5 * p.lane_width + 1.0)) {
      throw Error(ErrorKind::invalid_argument, "planner: lateral offset beyond half a lane width + 1 m");
    }
  }
  if (p.horizon < 0) throw Error(ErrorKind::invalid_argument, "planner: negative horizon");
  if (!(p.v_desired > 0.0) || !(p.jerk_max > 0.0) || !(p.lane_width > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "planner: v_desired, jerk_max and lane_width must be positive");
  }
}

namespace
{

std::size_t planner_horizon(const Scenario & scenario, std::size_t t, const PlannerParams & p)
{
  const std::size_t h = p.horizon > 0 ? static_cast<std::size_t>(p.horizon) : static_cast<std::size_t>(scenario.t_horizon);
  if (t + h > scenario.frame_count()) {
    throw Error(ErrorKind::invalid_argument, "privileged_plan: frames beyond the scenario end");
  }
  return h;
}

Lane guide_lane(const Scenario & scenario, const VehicleState & ego, double offset, double width)
{
  if (scenario.map.route.size() >= 2) return Lane{scenario.map.route.offset(offset), width, LaneDirection::forward};
  const auto assignment = scenario.map.assign_lane(ego.pose.position(), ego.pose.theta);
  if (!assignment) throw Error(ErrorKind::runtime, "privileged_plan: no route and no lane to follow");
  const Lane & lane = scenario.map.lanes[assignment->lane];
  const double side = lane.direction == LaneDirection::forward ? 1.0 : -1.0;
  return Lane{lane.centerline.offset(side * offset), lane.width, lane.direction};
}

}  // namespace

std::vector<Trajectory> planner_proposals(
  const Scenario & scenario, std::size_t t, const PlannerParams & p, const SimParams & sim, const SceneSnapshot * init)
{
  validate_planner_params(p);
  const std::size_t h = planner_horizon(scenario, t, p);
  const double dt = scenario.dt;
  const VehicleParams & veh = sim.vehicle;
  const VehicleState start = init ? init->ego : scenario.ego_log.states[t];
  std::vector<VehicleState> agents0;
  for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
    agents0.push_back(init ? init->agents.at(i) : scenario.agents[i].states[t]);
  }

  std::vector<Lane> lanes;
  for (double o : p.lateral_offsets) lanes.push_back(guide_lane(scenario, start, o, p.lane_width));

  std::vector<Trajectory> out;
  out.reserve(p.speed_fractions.size() * p.lateral_offsets.size());
  for (double f : p.speed_fractions) {
    IdmParams idm = sim.idm;
    idm.v_desired = std::max(f * p.v_desired, 0.5);
    for (const Lane & lane : lanes) {
      Trajectory traj;
      traj.dt = dt;
      traj.frame = TrajectoryFrame::global;
      traj.states.reserve(h);
      VehicleState ego = start;
      std::vector<VehicleState> agents = agents0;
      traj.states.push_back(ego);
      std::vector<Entity> scene;
      for (std::size_t k = 0; k + 1 < h; ++k) {
        const double time = static_cast<double>(t + k) * dt;
        scene.clear();
        scene.push_back({"ego", ego, veh.length, veh.width});
        for (std::size_t i = 0; i < agents.size(); ++i) {
          scene.push_back({scenario.agents[i].id, agents[i], scenario.agents[i].length, scenario.agents[i].width});
        }
        auto leader = leader_on_lane(0, scene, lane, sim.leader_lookahead);
        const auto light = red_light_leader(ego, veh.length, lane, scenario.map, time, idm);
        if (light && (!leader || light->gap < leader->gap)) leader = light;
        const double a_idm = idm_accel(ego.vel_lon, leader, idm);
        const double a = ego.accel + std::clamp(a_idm - ego.accel, -p.jerk_max * dt, p.jerk_max * dt);
        const double v = std::max(ego.vel_lon, 0.1);
        const double rate_cap = std::min(veh.steer_rate_max, 1.5 * veh.wheelbase / v);
        const double rate =
          std::clamp(pure_pursuit_steer_rate(ego, lane, 0.0, std::max(6.0, 0.9 * v), veh, dt), -rate_cap, rate_cap);
        std::vector<VehicleState> next = step_agents(scenario, ego, agents, time, sim);
        ego = bicycle_step(ego, {a, rate}, dt, veh);
        agents = std::move(next);
        traj.states.push_back(ego);
      }
      out.push_back(std::move(traj));
    }
  }
  return out;
}

PlanResult privileged_plan(
  const Scenario & scenario, std::size_t t, const PlannerParams & p, const SimParams & sim,
  const MetricParams & metric, const PlanContext & ctx)
{
  const std::size_t h = planner_horizon(scenario, t, p);
  const std::vector<Trajectory> proposals = planner_proposals(scenario, t, p, sim, ctx.init);
  PlanResult best;
  best.scores.assign(proposals.size(), std::nullopt);
  bool found = false;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    SceneStates states;
    try {
      states = rollout(scenario, proposals[i], t, h, RolloutMode::reactive, sim, ctx.init);
    } catch (const Error &) {
      continue;
    }
    const SubMetricVector m = compute_submetrics(states, scenario, {ctx.history, ctx.stage1}, metric, sim.vehicle);
    const double score = aggregate_epdms(m, p.weights);
    best.scores[i] = score;
    if (!found || score > best.score) {
      found = true;
      best.score = score;
      best.index = i;
      best.plan = proposals[i];
      best.states = std::move(states);
    }
  }
  if (!found) throw Error(ErrorKind::runtime, "privileged_plan: no proposal could be simulated");
  return best;
}

std::string submetric_label(std::string_view name)
{
  std::string s(name);
  for (char & c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::optional<std::string> kinematic_limit_violation(const Trajectory & traj, const VehicleParams & vehicle)
{
  const double kappa_max = std::tan(vehicle.steer_max) / vehicle.wheelbase;
  constexpr double kTol = 1e-9;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const VehicleState & a = traj.states[k];
    const VehicleState & b = traj.states[k + 1];
    const double ds = (b.pose.position() - a.pose.position()).norm();
    if (ds > 1e-3) {
      const double kappa = std::abs(angle_diff(b.pose.theta, a.pose.theta)) / ds;
      if (kappa > kappa_max * (1.0 + 1e-6) + kTol) {
        return "curvature " + std::to_string(kappa) + " exceeds " + std::to_string(kappa_max) + " at state " +
               std::to_string(k);
      }
    }
    const double accel = (b.speed() - a.speed()) / traj.dt;
    if (std::abs(accel) > vehicle.a_cmd_max + 1e-6) {
      return "acceleration " + std::to_string(accel) + " exceeds " + std::to_string(vehicle.a_cmd_max) + " at state " +
             std::to_string(k);
    }
  }
  return std::nullopt;
}

FilterDecision expert_filter(
  const SceneStates & states, const Scenario & scenario, const Trajectory & traj, const ExpertFilterSpec & spec,
  const MetricContext & ctx, const MetricParams & metric, const VehicleParams & vehicle)
{
  FilterDecision d;
  d.submetrics = compute_submetrics(states, scenario, ctx, metric, vehicle);
  d.epdms = aggregate_epdms(d.submetrics, metric.weights);
  if (kinematic_limit_violation(traj, vehicle)) {
    d.reason = "kinematics";
    return d;
  }
  for (const char * name : kSubMetricNames) {
    const bool required = std::find(spec.required_ones.begin(), spec.required_ones.end(), name) != spec.required_ones.end();
    if (required && submetric_value(d.submetrics, name) < 1.0) {
      d.reason = submetric_label(name);
      return d;
    }
  }
  if (!(d.submetrics.ep > spec.ep_min)) {
    d.reason = "EP";
    return d;
  }
  d.accept = true;
  return d;
}

}  // namespace scenesim
