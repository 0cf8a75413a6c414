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

#include "scenesim/synthetic.hpp"

#include "scenesim/error.hpp"
#include "scenesim/metrics.hpp"
#include "scenesim/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace scenesim
{

using nlohmann::json;

const char * to_string(ScenarioTemplate t)
{
  switch (t) {
    case ScenarioTemplate::straight:
      return "straight";
    case ScenarioTemplate::curve:
      return "curve";
    case ScenarioTemplate::intersection:
      return "intersection";
    case ScenarioTemplate::lead_vehicle:
      return "lead_vehicle";
    case ScenarioTemplate::cut_in:
      return "cut_in";
  }
  return "unknown";
}

std::optional<ScenarioTemplate> parse_template(std::string_view name)
{
  for (ScenarioTemplate t : kScenarioTemplates) {
    if (name == to_string(t)) return t;
  }
  return std::nullopt;
}

CorpusConfig CorpusConfig::with_total(int total)
{
  if (total < 0) throw Error(ErrorKind::invalid_argument, "corpus count must be nonnegative");
  CorpusConfig c;
  for (std::size_t i = 0; i < c.counts.size(); ++i) {
    c.counts[i] = total / 5 + (static_cast<int>(i) < total % 5 ? 1 : 0);
  }
  return c;
}

int CorpusConfig::total() const
{
  int n = 0;
  for (int c : counts) n += c;
  return n;
}

json corpus_config_to_json(const CorpusConfig & c)
{
  json counts = json::object();
  for (std::size_t i = 0; i < c.counts.size(); ++i) counts[to_string(kScenarioTemplates[i])] = c.counts[i];
  return json{
    {"counts", counts},         {"t_history", c.t_history},   {"t_horizon", c.t_horizon},
    {"dt", c.dt},               {"lane_width", c.lane_width}, {"road_buffer", c.road_buffer}};
}

CorpusConfig corpus_config_from_json(const json & j)
{
  if (!j.is_object()) throw Error(ErrorKind::schema, "corpus config must be an object");
  CorpusConfig c;
  try {
    for (const auto & [key, value] : j.items()) {
      if (key == "counts") {
        if (!value.is_object()) throw Error(ErrorKind::schema, "corpus config: counts must be an object");
        for (const auto & [name, n] : value.items()) {
          const auto t = parse_template(name);
          if (!t) throw Error(ErrorKind::schema, "corpus config: unknown template '" + name + "'");
          c.counts[static_cast<std::size_t>(*t)] = n.get<int>();
        }
      } else if (key == "t_history") {
        c.t_history = value.get<int>();
      } else if (key == "t_horizon") {
        c.t_horizon = value.get<int>();
      } else if (key == "dt") {
        c.dt = value.get<double>();
      } else if (key == "lane_width") {
        c.lane_width = value.get<double>();
      } else if (key == "road_buffer") {
        c.road_buffer = value.get<double>();
      } else {
        throw Error(ErrorKind::schema, "corpus config: unknown field '" + key + "'");
      }
    }
  } catch (const json::exception & e) {
    throw Error(ErrorKind::schema, std::string("corpus config: ") + e.what());
  }
  return c;
}

namespace
{

constexpr double kRoadLength = 320.0;
constexpr double kRoadStep = 2.0;
constexpr double kEgoJerk = 4.0;
constexpr int kMaxAttempts = 64;

struct CutIn
{
  std::size_t agent{0};
  double t0{0.0};
  double duration{3.0};
};

struct Blueprint
{
  Scenario scenario;
  VehicleState ego;
  double ego_v_desired{12.0};
  std::vector<VehicleState> agents;
  std::optional<CutIn> cut_in;
};

// Reference line in local coordinates: straight run, optional constant-curvature
// arc, straight again.
std::vector<Vec2> reference_line(double kappa, double s_curve, double arc)
{
  std::vector<Vec2> pts{{0.0, 0.0}};
  Vec2 p;
  double h = 0.0;
  for (double s = 0.0; s < kRoadLength - 1e-9; s += kRoadStep) {
    const bool on_arc = s >= s_curve - 1e-9 && s < s_curve + arc - 1e-9;
    const double k = on_arc ? kappa : 0.0;
    const double h_mid = h + 0.5 * k * kRoadStep;
    p = p + Vec2{std::cos(h_mid), std::sin(h_mid)} * kRoadStep;
    h += k * kRoadStep;
    pts.push_back(p);
  }
  return pts;
}

Polygon corridor(const Polyline & right, const Polyline & left)
{
  std::vector<Vec2> ring = right.points();
  const auto & l = left.points();
  ring.insert(ring.end(), l.rbegin(), l.rend());
  return Polygon(simplify_collinear(ring, 1e-6));
}

VehicleState state_on(const Polyline & line, double s, double v)
{
  VehicleState st;
  st.pose = line.pose_at(s);
  st.vel_lon = v;
  return st;
}

AgentTrack make_agent(std::size_t n, Rng & rng, AgentKind kind = AgentKind::vehicle)
{
  char id[16];
  std::snprintf(id, sizeof(id), "agent_%02zu", n);
  AgentTrack a;
  a.id = id;
  a.kind = kind;
  a.length = rng.uniform(4.2, 5.2);
  a.width = rng.uniform(1.8, 2.05);
  return a;
}

VehicleState ego_step(
  const Blueprint & bp, const VehicleState & ego, std::span<const VehicleState> agents, double time,
  const SimParams & params)
{
  const Scenario & sc = bp.scenario;
  const Lane & lane = sc.map.lanes[0];
  const double dt = sc.dt;
  std::vector<Entity> scene;
  scene.reserve(agents.size() + 1);
  scene.push_back({"ego", ego, params.vehicle.length, params.vehicle.width});
  for (std::size_t i = 0; i < agents.size(); ++i) {
    scene.push_back({sc.agents[i].id, agents[i], sc.agents[i].length, sc.agents[i].width});
  }
  IdmParams idm = params.idm;
  idm.v_desired = bp.ego_v_desired;
  auto leader = leader_on_lane(0, scene, lane, params.leader_lookahead);
  const auto light = red_light_leader(ego, params.vehicle.length, lane, sc.map, time, idm);
  if (light && (!leader || light->gap < leader->gap)) leader = light;
  const double a_idm = idm_accel(ego.vel_lon, leader, idm);
  const double a = ego.accel + std::clamp(a_idm - ego.accel, -kEgoJerk * dt, kEgoJerk * dt);

  const double v = std::max(ego.vel_lon, 0.1);
  const double lookahead = std::max(6.0, 0.9 * v);
  const double rate_cap = std::min(params.vehicle.steer_rate_max, 1.5 * params.vehicle.wheelbase / v);
  const double rate = std::clamp(
    pure_pursuit_steer_rate(ego, lane, 0.0, lookahead, params.vehicle, dt), -rate_cap, rate_cap);
  return bicycle_step(ego, {a, rate}, dt, params.vehicle);
}

VehicleState cut_in_step(
  const Blueprint & bp, const VehicleState & ego, std::span<const VehicleState> agents, double time,
  const SimParams & params)
{
  const Scenario & sc = bp.scenario;
  const std::size_t i = bp.cut_in->agent;
  const VehicleState & st = agents[i];
  std::vector<Entity> scene;
  scene.push_back({"ego", ego, params.vehicle.length, params.vehicle.width});
  for (std::size_t j = 0; j < agents.size(); ++j) {
    scene.push_back({sc.agents[j].id, agents[j], sc.agents[j].length, sc.agents[j].width});
  }
  VehicleParams agent_vehicle = params.vehicle;
  agent_vehicle.a_cmd_max = std::max(params.idm.a_max, params.idm.b_hard);
  agent_vehicle.steer_rate_max = params.agent_steer_rate_max;

  const auto leader = select_leader(i + 1, scene, sc.map, params.leader_lookahead);
  const double u = std::clamp((time - bp.cut_in->t0) / bp.cut_in->duration, 0.0, 1.0);
  const double offset = -sc.map.lanes[0].width * 0.5 * (1.0 - std::cos(kPi * u));
  const double rate = pure_pursuit_steer_rate(
    st, sc.map.lanes[1], offset, params.pure_pursuit_lookahead, agent_vehicle, sc.dt);
  return bicycle_step(st, {idm_accel(st.vel_lon, leader, params.idm), rate}, sc.dt, agent_vehicle);
}

void simulate(Blueprint & bp, const SimParams & params)
{
  Scenario & sc = bp.scenario;
  const std::size_t frames = static_cast<std::size_t>(sc.t_history + 2 * sc.t_horizon);
  sc.ego_log.dt = sc.dt;
  sc.ego_log.frame = TrajectoryFrame::global;
  sc.ego_log.states.assign(1, bp.ego);
  for (std::size_t i = 0; i < sc.agents.size(); ++i) sc.agents[i].states.assign(1, bp.agents[i]);

  VehicleState ego = bp.ego;
  std::vector<VehicleState> agents = bp.agents;
  for (std::size_t k = 0; k + 1 < frames; ++k) {
    const double time = static_cast<double>(k) * sc.dt;
    VehicleState ego_next = ego_step(bp, ego, agents, time, params);
    std::vector<VehicleState> next = step_agents(sc, ego, agents, time, params);
    if (bp.cut_in) next[bp.cut_in->agent] = cut_in_step(bp, ego, agents, time, params);
    ego = ego_next;
    agents = std::move(next);
    sc.ego_log.states.push_back(ego);
    for (std::size_t i = 0; i < agents.size(); ++i) sc.agents[i].states.push_back(agents[i]);
  }
}

// Frame time at which the ego front bumper first crosses the stop line.
std::optional<double> stop_line_crossing(const Scenario & sc, const Segment & line, double length)
{
  const auto & s = sc.ego_log.states;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const Segment motion{
      to_global(s[k].pose, Vec2{0.5 * length, 0.0}), to_global(s[k + 1].pose, Vec2{0.5 * length, 0.0})};
    if (segments_intersect(motion, line)) return static_cast<double>(k + 1) * sc.dt;
  }
  return std::nullopt;
}

bool log_is_clean(const Scenario & sc, const SimParams & params)
{
  const VehicleParams & veh = params.vehicle;
  const std::size_t n = sc.frame_count();
  for (std::size_t k = 0; k < n; ++k) {
    const OrientedBox e = footprint(sc.ego_log.states[k], veh.length, veh.width);
    for (std::size_t i = 0; i < sc.agents.size(); ++i) {
      const AgentTrack & a = sc.agents[i];
      const OrientedBox ba = footprint(a.states[k], a.length, a.width);
      if (boxes_overlap(e, ba)) return false;
      for (std::size_t j = i + 1; j < sc.agents.size(); ++j) {
        const AgentTrack & b = sc.agents[j];
        if (boxes_overlap(ba, footprint(b.states[k], b.length, b.width))) return false;
      }
    }
  }
  MetricParams mp;
  if (!comfortable(sc.ego_log.states, sc.dt, mp)) return false;
  // the logged future should itself be a passing demonstration
  SceneStates window;
  window.dt = sc.dt;
  window.t_start = static_cast<std::size_t>(sc.t_history);
  const auto first = sc.ego_log.states.begin() + sc.t_history;
  window.ego.assign(first, sc.ego_log.states.end());
  for (const AgentTrack & a : sc.agents) {
    window.agents.push_back(
      {a.id, a.length, a.width, a.is_static(), {a.states.begin() + sc.t_history, a.states.end()}});
  }
  const std::span<const VehicleState> history(sc.ego_log.states.data(), static_cast<std::size_t>(sc.t_history));
  const SubMetricVector m = compute_submetrics(window, sc, {history, std::nullopt}, mp, veh);
  return m.nc == 1.0 && m.dac == 1.0 && m.ddc == 1.0 && m.tlc == 1.0 && m.lk == 1.0;
}

std::optional<Scenario> try_build(ScenarioTemplate kind, Rng & rng, const CorpusConfig & cfg, const SimParams & params)
{
  const double w = cfg.lane_width;
  const Pose2D frame{rng.uniform(-500.0, 500.0), rng.uniform(-500.0, 500.0), rng.uniform(-kPi, kPi)};

  double kappa = 0.0;
  double s_curve = 1e9;
  double arc = 0.0;
  if (kind == ScenarioTemplate::curve) {
    kappa = (rng.chance(0.5) ? 1.0 : -1.0) * rng.uniform(1.0 / 160.0, 1.0 / 70.0);
    s_curve = std::round(rng.uniform(70.0, 100.0) / kRoadStep) * kRoadStep;
    arc = std::min(200.0, 0.5 * kPi / std::abs(kappa));
  }
  std::vector<Vec2> ref = reference_line(kappa, s_curve, arc);
  for (Vec2 & p : ref) p = to_global(frame, p);

  Blueprint bp;
  Scenario & sc = bp.scenario;
  sc.dt = cfg.dt;
  sc.t_history = cfg.t_history;
  sc.t_horizon = cfg.t_horizon;
  const Polyline lane0(ref);
  const Polyline lane1 = lane0.offset(w);
  sc.map.lanes.push_back({lane0, w, LaneDirection::forward});
  sc.map.lanes.push_back({lane1, w, LaneDirection::forward});
  sc.map.drivable_area.push_back(
    corridor(lane0.offset(-(0.5 * w + cfg.road_buffer)), lane0.offset(1.5 * w + cfg.road_buffer)));
  sc.map.route = lane0;

  // ego
  double v_des = rng.uniform(10.0, 14.0);
  if (kind == ScenarioTemplate::curve) v_des = std::min(v_des, std::sqrt(1.8 / std::abs(kappa)));
  if (kind == ScenarioTemplate::intersection) v_des = rng.uniform(9.0, 13.0);
  const double v0 = v_des * rng.uniform(0.7, 1.0);
  const double s_ego = rng.uniform(40.0, 60.0);
  bp.ego = state_on(lane0, s_ego, v0);
  bp.ego_v_desired = v_des;

  std::optional<Segment> stop_line;
  if (kind == ScenarioTemplate::intersection) {
    const double s_int = s_ego + v0 * rng.uniform(3.0, 5.5) + w + 7.0;
    const double half = w + cfg.road_buffer;
    auto L = [&](double x, double y) { return to_global(frame, Vec2{x, y}); };
    std::vector<Vec2> up;
    std::vector<Vec2> down;
    for (double y = -60.0; y <= 60.0 + 1e-9; y += kRoadStep) {
      up.push_back(L(s_int + 0.5 * w, 0.5 * w + y));
      down.push_back(L(s_int - 0.5 * w, 0.5 * w - y));
    }
    sc.map.lanes.push_back({Polyline(up), w, LaneDirection::forward});
    sc.map.lanes.push_back({Polyline(down), w, LaneDirection::forward});
    sc.map.drivable_area.push_back(Polygon(
      {L(s_int - half, 0.5 * w - 60.0), L(s_int + half, 0.5 * w - 60.0), L(s_int + half, 0.5 * w + 60.0),
       L(s_int - half, 0.5 * w + 60.0)}));
    const double x_line = s_int - half - 2.0;
    stop_line = Segment{L(x_line, -0.5 * w), L(x_line, 1.5 * w)};
  }

  // agents
  auto add = [&](AgentTrack a, const VehicleState & st) {
    sc.agents.push_back(std::move(a));
    bp.agents.push_back(st);
    return sc.agents.size() - 1;
  };
  if (kind == ScenarioTemplate::lead_vehicle) {
    if (rng.chance(0.3)) {
      AgentTrack parked = make_agent(sc.agents.size(), rng, AgentKind::static_object);
      add(parked, state_on(lane0, s_ego + rng.uniform(45.0, 75.0), 0.0));
    } else {
      add(make_agent(sc.agents.size(), rng), state_on(lane0, s_ego + rng.uniform(20.0, 40.0), rng.uniform(3.0, 9.0)));
    }
  }
  if (kind == ScenarioTemplate::cut_in) {
    const std::size_t i =
      add(make_agent(sc.agents.size(), rng), state_on(lane1, s_ego + rng.uniform(6.0, 16.0), std::max(2.0, v0 - rng.uniform(0.0, 3.0))));
    bp.cut_in = CutIn{i, rng.uniform(0.5, 3.0), rng.uniform(2.5, 4.0)};
  }
  if (kind == ScenarioTemplate::curve && rng.chance(0.5)) {
    add(make_agent(sc.agents.size(), rng), state_on(lane0, s_ego + rng.uniform(40.0, 60.0), rng.uniform(8.0, 12.0)));
  }
  if (kind != ScenarioTemplate::cut_in && rng.chance(0.6)) {
    add(make_agent(sc.agents.size(), rng), state_on(lane1, s_ego + rng.uniform(-30.0, 40.0), rng.uniform(7.0, 13.0)));
  }
  if (rng.chance(0.4)) {
    add(make_agent(sc.agents.size(), rng), state_on(lane0, s_ego - rng.uniform(15.0, 30.0), v0 * rng.uniform(0.8, 1.0)));
  }

  simulate(bp, params);
  if (stop_line) {
    const auto t_cross = stop_line_crossing(sc, *stop_line, params.vehicle.length);
    if (!t_cross) return std::nullopt;
    const double t_red = *t_cross + rng.uniform(1.0, 3.0);
    const double t_end = static_cast<double>(sc.frame_count()) * sc.dt + 10.0;
    sc.map.traffic_lights.push_back(
      {*stop_line, {{0.0, t_red, LightState::green}, {t_red, t_end, LightState::red}}});
    simulate(bp, params);
  }
  return sc;
}

}  // namespace

Scenario synthesize_scenario(
  ScenarioTemplate kind, int index, std::uint64_t seed, const CorpusConfig & config, const SimParams & params)
{
  char id[48];
  std::snprintf(id, sizeof(id), "%s_%03d", to_string(kind), index);
  const std::uint64_t base = mix_seed(mix_seed(seed, static_cast<std::uint64_t>(kind)), static_cast<std::uint64_t>(index));
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(mix_seed(base, static_cast<std::uint64_t>(attempt)));
    auto sc = try_build(kind, rng, config, params);
    if (!sc) continue;
    sc->id = id;
    if (!validate_scenario(*sc, params.vehicle).empty()) continue;
    if (!log_is_clean(*sc, params)) continue;
    return std::move(*sc);
  }
  throw Error(ErrorKind::runtime, std::string("could not synthesize a valid scenario ") + id);
}

std::vector<Scenario> generate_synthetic_corpus(
  const CorpusConfig & config, std::uint64_t seed, const SimParams & params)
{
  for (std::size_t i = 0; i < config.counts.size(); ++i) {
    if (config.counts[i] < 0) {
      throw Error(
        ErrorKind::invalid_argument,
        std::string("corpus config: negative count for template ") + to_string(kScenarioTemplates[i]));
    }
  }
  if (!(config.dt > 0.0)) throw Error(ErrorKind::invalid_argument, "corpus config: dt must be positive");
  if (config.t_history < 1 || config.t_horizon < 1) {
    throw Error(ErrorKind::invalid_argument, "corpus config: t_history and t_horizon must be positive");
  }
  if (!(config.lane_width > 0.0) || config.road_buffer < 0.0) {
    throw Error(ErrorKind::invalid_argument, "corpus config: invalid lane geometry");
  }
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(config.total()));
  int index = 0;
  for (std::size_t t = 0; t < kScenarioTemplates.size(); ++t) {
    for (int i = 0; i < config.counts[t]; ++i) {
      out.push_back(synthesize_scenario(kScenarioTemplates[t], index++, seed, config, params));
    }
  }
  return out;
}

}  // namespace scenesim
