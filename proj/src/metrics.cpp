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

#include "scenesim/metrics.hpp"

#include "scenesim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scenesim
{

using nlohmann::json;

double submetric_value(const SubMetricVector & s, std::string_view name)
{
  if (name == "nc") return s.nc;
  if (name == "dac") return s.dac;
  if (name == "ddc") return s.ddc;
  if (name == "tlc") return s.tlc;
  if (name == "ep") return s.ep;
  if (name == "ttc") return s.ttc;
  if (name == "lk") return s.lk;
  if (name == "hc") return s.hc;
  if (name == "ec") return s.ec;
  throw Error(ErrorKind::invalid_argument, "unknown sub-metric '" + std::string(name) + "'");
}

bool is_submetric_name(std::string_view name)
{
  return std::find(kSubMetricNames.begin(), kSubMetricNames.end(), name) != kSubMetricNames.end();
}

double aggregate_epdms(const SubMetricVector & s, const MetricWeights & w)
{
  const double wsum = w.ep + w.ttc + w.lk + w.hc + w.ec;
  if (!(wsum > 0.0)) throw Error(ErrorKind::invalid_argument, "aggregate_epdms: weights sum to zero");
  const double penalties = s.nc * s.dac * s.ddc * s.tlc;
  const double avg = (w.ep * s.ep + w.ttc * s.ttc + w.lk * s.lk + w.hc * s.hc + w.ec * s.ec) / wsum;
  return std::clamp(penalties * avg, 0.0, 1.0);
}

double aggregate_two_stage(double s1, double s2, TwoStageAggregation mode)
{
  return mode == TwoStageAggregation::product ? s1 * s2 : 0.5 * (s1 + s2);
}

Vec2 contact_point(const OrientedBox & a, const OrientedBox & b)
{
  const auto ca = a.corners();
  const auto cb = b.corners();
  const Polygon pa({ca.begin(), ca.end()});
  const Polygon pb({cb.begin(), cb.end()});
  Vec2 sum;
  int count = 0;
  for (const Vec2 & c : ca) {
    if (pb.contains(c)) {
      sum = sum + c;
      ++count;
    }
  }
  for (const Vec2 & c : cb) {
    if (pa.contains(c)) {
      sum = sum + c;
      ++count;
    }
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (auto p = segment_intersection({ca[i], ca[(i + 1) % 4]}, {cb[j], cb[(j + 1) % 4]})) {
        sum = sum + *p;
        ++count;
      }
    }
  }
  if (count == 0) return (a.center.position() + b.center.position()) * 0.5;
  return sum * (1.0 / count);
}

std::vector<CollisionEvent> find_collisions(
  std::span<const EgoFootprint> ego, std::span<const AgentFootprints> agents, double moving_speed)
{
  std::vector<CollisionEvent> events;
  for (const AgentFootprints & agent : agents) {
    if (agent.boxes.size() != ego.size()) {
      throw Error(ErrorKind::invalid_argument, "find_collisions: frame count mismatch for agent " + agent.id);
    }
    for (std::size_t k = 0; k < ego.size(); ++k) {
      if (!boxes_overlap(ego[k].box, agent.boxes[k])) continue;
      const Vec2 contact = to_local(ego[k].box.center, contact_point(ego[k].box, agent.boxes[k]));
      const bool at_fault = agent.is_static || (ego[k].speed > moving_speed && contact.x >= 0.0);
      events.push_back({k, agent.id, at_fault});
      break;
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const CollisionEvent & a, const CollisionEvent & b) {
    return a.frame < b.frame;
  });
  return events;
}

std::optional<CollisionEvent> check_collision(
  std::span<const EgoFootprint> ego, std::span<const AgentFootprints> agents, double moving_speed)
{
  auto events = find_collisions(ego, agents, moving_speed);
  if (events.empty()) return std::nullopt;
  return events.front();
}

std::vector<CollisionEvent> scene_collisions(
  const SceneStates & states, const VehicleParams & vehicle, double moving_speed)
{
  std::vector<EgoFootprint> ego;
  ego.reserve(states.size());
  for (const VehicleState & e : states.ego) {
    ego.push_back({footprint(e, vehicle.length, vehicle.width), e.speed()});
  }
  std::vector<AgentFootprints> agents;
  agents.reserve(states.agents.size());
  for (const AgentStates & a : states.agents) {
    AgentFootprints fp{a.id, a.is_static, {}};
    fp.boxes.reserve(a.states.size());
    for (const VehicleState & s : a.states) fp.boxes.push_back(footprint(s, a.length, a.width));
    agents.push_back(std::move(fp));
  }
  return find_collisions(ego, agents, moving_speed);
}

double time_to_collision(
  const SceneStates & states, double ego_length, double ego_width, double horizon, double min_ego_speed)
{
  double best = std::numeric_limits<double>::infinity();
  const double dt = states.dt;
  const int steps = static_cast<int>(std::floor(horizon / dt + 1e-9));
  const double r_ego = 0.5 * std::hypot(ego_length, ego_width);
  for (std::size_t k = 0; k < states.size(); ++k) {
    const VehicleState & e = states.ego[k];
    if (e.speed() < min_ego_speed) continue;
    const Vec2 ve = e.velocity();
    for (const AgentStates & agent : states.agents) {
      const VehicleState & a = agent.states[k];
      const Vec2 va = a.velocity();
      const Vec2 d = a.pose.position() - e.pose.position();
      const Vec2 w = va - ve;
      // closest center approach over [0, horizon]
      const double ww = w.dot(w);
      const double t_star = ww > 0.0 ? std::clamp(-d.dot(w) / ww, 0.0, horizon) : 0.0;
      const double reach = r_ego + 0.5 * std::hypot(agent.length, agent.width);
      if ((d + w * t_star).norm() > reach + 1e-9) continue;
      for (int i = 0; i <= steps; ++i) {
        const double tau = i * dt;
        if (tau >= best) break;
        const OrientedBox be{
          {e.pose.x + ve.x * tau, e.pose.y + ve.y * tau, e.pose.theta}, ego_length, ego_width};
        const OrientedBox ba{
          {a.pose.x + va.x * tau, a.pose.y + va.y * tau, a.pose.theta}, agent.length, agent.width};
        if (boxes_overlap(be, ba)) {
          best = tau;
          break;
        }
      }
    }
  }
  return best;
}

namespace
{

struct ComfortSignals
{
  std::vector<double> accel;
  std::vector<double> jerk;
  std::vector<double> yaw_rate;
  std::vector<double> yaw_accel;
};

ComfortSignals comfort_signals(std::span<const VehicleState> s, double dt)
{
  ComfortSignals c;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    c.accel.push_back((s[k + 1].vel_lon - s[k].vel_lon) / dt);
    c.yaw_rate.push_back(angle_diff(s[k + 1].pose.theta, s[k].pose.theta) / dt);
  }
  for (std::size_t k = 0; k + 1 < c.accel.size(); ++k) {
    c.jerk.push_back((c.accel[k + 1] - c.accel[k]) / dt);
    c.yaw_accel.push_back((c.yaw_rate[k + 1] - c.yaw_rate[k]) / dt);
  }
  return c;
}

double max_abs(const std::vector<double> & v)
{
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

ComfortFeatures comfort_features(std::span<const VehicleState> states, double dt)
{
  const ComfortSignals c = comfort_signals(states, dt);
  return {max_abs(c.accel), max_abs(c.jerk), max_abs(c.yaw_rate)};
}

bool comfortable(std::span<const VehicleState> states, double dt, const MetricParams & p)
{
  const ComfortSignals c = comfort_signals(states, dt);
  return max_abs(c.accel) <= p.hc_max_accel && max_abs(c.jerk) <= p.hc_max_jerk &&
         max_abs(c.yaw_rate) <= p.hc_max_yaw_rate && max_abs(c.yaw_accel) <= p.hc_max_yaw_accel;
}

SubMetricVector compute_submetrics(
  const SceneStates & states, const Scenario & scenario, const MetricContext & ctx,
  const MetricParams & params, const VehicleParams & vehicle)
{
  const std::size_t n = states.size();
  if (n == 0) throw Error(ErrorKind::invalid_argument, "compute_submetrics: empty window");
  for (const AgentStates & a : states.agents) {
    if (a.states.size() != n) {
      throw Error(ErrorKind::invalid_argument, "compute_submetrics: agent " + a.id + " misaligned with ego");
    }
  }
  if (states.t_start + n > scenario.frame_count()) {
    throw Error(ErrorKind::invalid_argument, "compute_submetrics: window exceeds the scenario");
  }
  if (std::abs(states.dt - scenario.dt) > 1e-9) {
    throw Error(ErrorKind::invalid_argument, "compute_submetrics: dt mismatch");
  }
  const double dt = states.dt;
  const MapModel & map = scenario.map;
  SubMetricVector out;

  // NC
  std::vector<EgoFootprint> ego_fp;
  ego_fp.reserve(n);
  for (const VehicleState & e : states.ego) {
    ego_fp.push_back({footprint(e, vehicle.length, vehicle.width), e.speed()});
  }
  for (const CollisionEvent & ev : scene_collisions(states, vehicle, params.at_fault_min_speed)) {
    if (ev.at_fault) out.nc = 0.0;
  }

  // DAC
  for (const EgoFootprint & fp : ego_fp) {
    const auto corners = fp.box.corners();
    if (!std::all_of(corners.begin(), corners.end(), [&](const Vec2 & c) { return map.in_drivable_area(c); })) {
      out.dac = 0.0;
      break;
    }
  }

  // DDC and LK share the lane assignment
  const std::size_t max_wrong_way = static_cast<std::size_t>(std::floor(params.ddc_max_seconds / dt + 1e-9));
  std::size_t run = 0;
  std::size_t in_lane = 0;
  for (const VehicleState & e : states.ego) {
    const auto lane = map.assign_lane(e.pose.position(), e.pose.theta);
    if (!lane) {
      run = 0;
      continue;
    }
    const Lane & l = map.lanes[lane->lane];
    const double travel = l.direction == LaneDirection::forward ? lane->projection.heading
                                                                : normalize_angle(lane->projection.heading + kPi);
    if (std::abs(angle_diff(e.pose.theta, travel)) > params.ddc_max_angle) {
      if (++run > max_wrong_way) out.ddc = 0.0;
    } else {
      run = 0;
    }
    if (std::abs(lane->projection.lateral) <= 0.5 * l.width + params.lk_margin) ++in_lane;
  }
  if (map.lanes.empty()) in_lane = n;
  out.lk = static_cast<double>(in_lane) >= params.lk_min_fraction * static_cast<double>(n) ? 1.0 : 0.0;

  // TLC: the front bumper must not cross a stop line while it is red
  for (std::size_t k = 0; k + 1 < n && out.tlc > 0.0; ++k) {
    const auto bumper = [&](const VehicleState & s) {
      return to_global(s.pose, Vec2{0.5 * vehicle.length, 0.0});
    };
    const Segment motion{bumper(states.ego[k]), bumper(states.ego[k + 1])};
    if ((motion.b - motion.a).norm() <= 0.0) continue;
    const double t_cross = static_cast<double>(states.t_start + k + 1) * dt;
    for (const TrafficLight & tl : map.traffic_lights) {
      if (tl.state_at(t_cross) == LightState::red && segments_intersect(motion, tl.stop_line)) {
        out.tlc = 0.0;
        break;
      }
    }
  }

  // EP against the logged progress over the same frames
  if (map.route.size() >= 2) {
    const auto progress = [&](const VehicleState & a, const VehicleState & b) {
      return map.route.project(b.pose.position()).s - map.route.project(a.pose.position()).s;
    };
    const auto & log = scenario.ego_log.states;
    const double ref = progress(log[states.t_start], log[states.t_start + n - 1]);
    const double ego = progress(states.ego.front(), states.ego.back());
    out.ep = ref < params.ep_min_reference ? 1.0 : std::clamp(ego / ref, 0.0, 1.0);
  }

  // TTC
  const double ttc =
    time_to_collision(states, vehicle.length, vehicle.width, params.ttc_horizon, params.ttc_min_speed);
  out.ttc = ttc >= params.ttc_threshold ? 1.0 : 0.0;

  // HC over history + window
  std::vector<VehicleState> combined(ctx.history.begin(), ctx.history.end());
  combined.insert(combined.end(), states.ego.begin(), states.ego.end());
  out.hc = comfortable(combined, dt, params) ? 1.0 : 0.0;

  // EC
  if (ctx.stage1) {
    const ComfortFeatures f2 = comfort_features(states.ego, dt);
    const std::array<double, 3> a{ctx.stage1->max_accel, ctx.stage1->max_jerk, ctx.stage1->max_yaw_rate};
    const std::array<double, 3> b{f2.max_accel, f2.max_jerk, f2.max_yaw_rate};
    for (std::size_t i = 0; i < 3; ++i) {
      if (std::abs(b[i] - a[i]) > params.ec_max_relative * std::max(a[i], params.ec_floor[i])) out.ec = 0.0;
    }
  }
  return out;
}

json submetrics_to_json(const SubMetricVector & s)
{
  return json{{"nc", s.nc}, {"dac", s.dac}, {"ddc", s.ddc}, {"tlc", s.tlc}, {"ep", s.ep},
              {"ttc", s.ttc}, {"lk", s.lk},   {"hc", s.hc},   {"ec", s.ec}};
}

SubMetricVector submetrics_from_json(const json & j)
{
  SubMetricVector s;
  s.nc = j.at("nc").get<double>();
  s.dac = j.at("dac").get<double>();
  s.ddc = j.at("ddc").get<double>();
  s.tlc = j.at("tlc").get<double>();
  s.ep = j.at("ep").get<double>();
  s.ttc = j.at("ttc").get<double>();
  s.lk = j.at("lk").get<double>();
  s.hc = j.at("hc").get<double>();
  s.ec = j.at("ec").get<double>();
  return s;
}

json metric_report(const std::string & scenario_id, const RewardRecord & r)
{
  json out{{"scenario_id", scenario_id}, {"submetrics", submetrics_to_json(r.submetrics)}, {"epdms", r.epdms}};
  out["stage_scores"] = r.stage_scores ? json::array({(*r.stage_scores)[0], (*r.stage_scores)[1]}) : json(nullptr);
  return out;
}

}  // namespace scenesim
