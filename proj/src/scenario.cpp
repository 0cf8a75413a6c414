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

#include "scenesim/scenario.hpp"

#include "scenesim/error.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace scenesim
{

using nlohmann::json;

Trajectory place_at(const Trajectory & local, const Pose2D & anchor)
{
  Trajectory out = local;
  out.frame = TrajectoryFrame::global;
  for (VehicleState & s : out.states) {
    s.pose = to_global(anchor, s.pose);
  }
  return out;
}

Trajectory to_ego_local(const Trajectory & global)
{
  Trajectory out = global;
  out.frame = TrajectoryFrame::ego_local;
  if (global.states.empty()) return out;
  const Pose2D origin = global.states.front().pose;
  for (VehicleState & s : out.states) {
    s.pose = to_local(origin, s.pose);
  }
  return out;
}

std::optional<std::size_t> kinematic_violation(const Trajectory & traj, double tolerance)
{
  for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
    const VehicleState & a = traj.states[k];
    const VehicleState & b = traj.states[k + 1];
    const double fd_speed = (b.pose.position() - a.pose.position()).norm() / traj.dt;
    if (std::abs(fd_speed - a.speed()) > tolerance) return k;
  }
  return std::nullopt;
}

double Lane::travel_heading(double s) const
{
  const double h = centerline.pose_at(s).theta;
  return direction == LaneDirection::forward ? h : normalize_angle(h + kPi);
}

LightState TrafficLight::state_at(double t) const
{
  for (const LightPhase & p : phases) {
    if (t >= p.t0 && t < p.t1) return p.state;
  }
  return LightState::green;
}

bool MapModel::in_drivable_area(const Vec2 & p) const
{
  return std::any_of(
    drivable_area.begin(), drivable_area.end(), [&](const Polygon & poly) { return poly.contains(p); });
}

std::optional<LaneAssignment> MapModel::assign_lane(const Vec2 & p, double heading) const
{
  std::optional<LaneAssignment> best_inside;
  double best_inside_dh = 0.0;
  std::optional<LaneAssignment> nearest;
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const Lane & lane = lanes[i];
    const PolylineProjection proj = lane.centerline.project(p);
    if (!nearest || proj.distance < nearest->projection.distance) {
      nearest = LaneAssignment{i, proj};
    }
    const bool inside = std::abs(proj.lateral) <= 0.5 * lane.width && proj.s >= 0.0 &&
                        proj.s <= lane.centerline.length();
    if (!inside) continue;
    const double travel = lane.direction == LaneDirection::forward ? proj.heading
                                                                   : normalize_angle(proj.heading + kPi);
    const double dh = std::abs(angle_diff(heading, travel));
    if (
      !best_inside || dh < best_inside_dh - 1e-12 ||
      (std::abs(dh - best_inside_dh) <= 1e-12 &&
       std::abs(proj.lateral) < std::abs(best_inside->projection.lateral))) {
      best_inside = LaneAssignment{i, proj};
      best_inside_dh = dh;
    }
  }
  return best_inside ? best_inside : nearest;
}

OrientedBox footprint(const VehicleState & s, double length, double width)
{
  return OrientedBox{s.pose, length, width};
}

namespace
{

bool finite_state(const VehicleState & s)
{
  return std::isfinite(s.pose.x) && std::isfinite(s.pose.y) && std::isfinite(s.pose.theta) &&
         std::isfinite(s.vel_lon) && std::isfinite(s.vel_lat) && std::isfinite(s.accel) &&
         std::isfinite(s.steering);
}

std::string frame_loc(const std::string & what, std::size_t k)
{
  return what + "[" + std::to_string(k) + "]";
}

}  // namespace

std::vector<Diagnostic> validate_scenario(const Scenario & s, const VehicleParams & vehicle)
{
  std::vector<Diagnostic> out;
  auto add = [&](std::string inv, std::string loc, std::string msg) {
    out.push_back({std::move(inv), std::move(loc), std::move(msg)});
  };

  if (s.id.empty()) add("id", "id", "scenario id must be non-empty");
  if (!(s.dt > 0.0)) add("dt", "dt", "dt must be positive");
  if (s.t_history < 0) add("t_history", "t_history", "t_history must be nonnegative");
  if (s.t_horizon <= 0) add("t_horizon", "t_horizon", "t_horizon must be positive");

  // map
  const MapModel & m = s.map;
  for (std::size_t i = 0; i < m.lanes.size(); ++i) {
    const Lane & lane = m.lanes[i];
    const std::string loc = frame_loc("map.lanes", i);
    if (lane.centerline.size() < 2) add("lane polyline", loc, "lane polyline needs at least 2 points");
    if (!(lane.width > 0.0)) add("lane width", loc, "lane width must be positive");
  }
  for (std::size_t i = 0; i < m.drivable_area.size(); ++i) {
    if (!m.drivable_area[i].is_simple()) {
      add("drivable polygon simple", frame_loc("map.drivable_area", i), "polygon is not simple");
    }
  }
  if (m.route.size() < 2) {
    add("route", "map.route", "route needs at least 2 points");
  }
  for (std::size_t i = 0; i < m.route.size(); ++i) {
    if (!m.in_drivable_area(m.route.points()[i])) {
      add(
        "route in drivable area", frame_loc("map.route", i),
        "route vertex " + std::to_string(i) + " lies outside the drivable area");
      break;
    }
  }
  for (std::size_t i = 0; i < m.traffic_lights.size(); ++i) {
    const auto & phases = m.traffic_lights[i].phases;
    const std::string loc = frame_loc("map.traffic_lights", i);
    bool bad = false;
    for (std::size_t a = 0; a < phases.size() && !bad; ++a) {
      if (!(phases[a].t1 > phases[a].t0)) {
        add("phase interval", loc, "light " + loc + " has an empty phase interval");
        bad = true;
      }
      for (std::size_t b = a + 1; b < phases.size() && !bad; ++b) {
        if (phases[a].t0 < phases[b].t1 && phases[b].t0 < phases[a].t1) {
          add("phases non-overlapping", loc, "light " + loc + " has overlapping phases");
          bad = true;
        }
      }
    }
  }

  // ego log
  const std::size_t expected = static_cast<std::size_t>(std::max(0, s.t_history + 2 * s.t_horizon));
  if (s.ego_log.size() != expected) {
    add(
      "ego_log length", "ego_log",
      "ego_log length " + std::to_string(s.ego_log.size()) + " != t_history + 2*t_horizon = " +
        std::to_string(expected));
  }
  if (s.ego_log.size() < 2) add("trajectory length", "ego_log", "ego_log needs at least 2 states");
  if (std::abs(s.ego_log.dt - s.dt) > 1e-12) add("ego_log dt", "ego_log", "ego_log dt differs from dt");
  for (std::size_t k = 0; k < s.ego_log.size(); ++k) {
    const VehicleState & st = s.ego_log.states[k];
    if (!finite_state(st)) {
      add("finite state", frame_loc("ego_log", k), "non-finite value at frame " + std::to_string(k));
      continue;
    }
    if (std::abs(normalize_angle(st.pose.theta) - st.pose.theta) > 1e-12) {
      add("theta normalized", frame_loc("ego_log", k), "theta not in (-pi, pi] at frame " + std::to_string(k));
    }
    if (std::abs(st.steering) > vehicle.steer_max + 1e-9) {
      add("steering limit", frame_loc("ego_log", k), "steering exceeds limit at frame " + std::to_string(k));
    }
  }
  if (s.dt > 0.0) {
    if (auto k = kinematic_violation(s.ego_log, vehicle.kinematic_tolerance)) {
      add(
        "kinematic consistency", frame_loc("ego_log", *k),
        "ego_log inconsistent with stored speed at frame " + std::to_string(*k));
    }
  }
  if (!m.drivable_area.empty()) {
    for (std::size_t k = 0; k < s.ego_log.size(); ++k) {
      const auto corners = footprint(s.ego_log.states[k], vehicle.length, vehicle.width).corners();
      const bool inside = std::all_of(
        corners.begin(), corners.end(), [&](const Vec2 & c) { return m.in_drivable_area(c); });
      if (!inside) {
        add(
          "ego footprint in drivable area", frame_loc("ego_log", k),
          "ego footprint leaves the drivable area at frame " + std::to_string(k));
        break;
      }
    }
  } else {
    add("drivable area", "map.drivable_area", "drivable area is empty");
  }

  // agents
  std::set<std::string> ids;
  for (const AgentTrack & a : s.agents) {
    const std::string loc = "agents[" + a.id + "]";
    if (!ids.insert(a.id).second) add("agent id unique", loc, "duplicate agent id " + a.id);
    if (!(a.length > 0.0) || !(a.width > 0.0)) add("agent extent", loc, "agent " + a.id + " extent must be positive");
    if (a.states.size() != s.ego_log.size()) {
      add(
        "agent track length", loc,
        "agent " + a.id + " has " + std::to_string(a.states.size()) + " states, expected " +
          std::to_string(s.ego_log.size()));
    }
    for (std::size_t k = 0; k < a.states.size(); ++k) {
      if (!finite_state(a.states[k])) {
        add("finite state", loc, "agent " + a.id + " non-finite at frame " + std::to_string(k));
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace
{

[[noreturn]] void schema_error(const std::string & msg) { throw Error(ErrorKind::schema, msg); }

void check_keys(const json & j, std::initializer_list<const char *> allowed, const std::string & where)
{
  if (!j.is_object()) schema_error(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char * k : allowed) {
      if (it.key() == k) ok = true;
    }
    if (!ok) schema_error("unknown field '" + where + "." + it.key() + "'");
  }
}

const json & field(const json & j, const char * key, const std::string & where)
{
  auto it = j.find(key);
  if (it == j.end()) schema_error("missing field '" + where + "." + key + "'");
  return *it;
}

double number(const json & j, const char * key, const std::string & where)
{
  const json & v = field(j, key, where);
  if (!v.is_number()) schema_error("field '" + where + "." + key + "' must be a number");
  return v.get<double>();
}

int integer(const json & j, const char * key, const std::string & where)
{
  const json & v = field(j, key, where);
  if (!v.is_number_integer()) schema_error("field '" + where + "." + key + "' must be an integer");
  return v.get<int>();
}

std::string string_field(const json & j, const char * key, const std::string & where)
{
  const json & v = field(j, key, where);
  if (!v.is_string()) schema_error("field '" + where + "." + key + "' must be a string");
  return v.get<std::string>();
}

const json & array_field(const json & j, const char * key, const std::string & where)
{
  const json & v = field(j, key, where);
  if (!v.is_array()) schema_error("field '" + where + "." + key + "' must be an array");
  return v;
}

Vec2 point_from_json(const json & j, const std::string & where)
{
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    schema_error("'" + where + "' must be an [x, y] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Vec2> points_from_json(const json & j, const std::string & where)
{
  if (!j.is_array()) schema_error("'" + where + "' must be an array of points");
  std::vector<Vec2> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(point_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

json points_to_json(const std::vector<Vec2> & pts)
{
  json out = json::array();
  for (const Vec2 & p : pts) out.push_back({p.x, p.y});
  return out;
}

const char * frame_name(TrajectoryFrame f)
{
  return f == TrajectoryFrame::global ? "global" : "ego_local";
}

}  // namespace

json state_to_json(const VehicleState & s)
{
  return json{{"x", s.pose.x},         {"y", s.pose.y},       {"theta", s.pose.theta},
              {"v_lon", s.vel_lon},    {"v_lat", s.vel_lat},  {"accel", s.accel},
              {"steering", s.steering}};
}

VehicleState state_from_json(const json & j, const std::string & where)
{
  check_keys(j, {"x", "y", "theta", "v_lon", "v_lat", "accel", "steering"}, where);
  VehicleState s;
  s.pose.x = number(j, "x", where);
  s.pose.y = number(j, "y", where);
  s.pose.theta = number(j, "theta", where);
  s.vel_lon = number(j, "v_lon", where);
  s.vel_lat = number(j, "v_lat", where);
  s.accel = number(j, "accel", where);
  s.steering = number(j, "steering", where);
  return s;
}

namespace
{
std::vector<VehicleState> states_from_json(const json & arr, const std::string & where)
{
  std::vector<VehicleState> out;
  out.reserve(arr.size());
  for (std::size_t k = 0; k < arr.size(); ++k) {
    out.push_back(state_from_json(arr[k], where + "[" + std::to_string(k) + "]"));
  }
  return out;
}

json states_to_json(const std::vector<VehicleState> & states)
{
  json arr = json::array();
  for (const VehicleState & s : states) arr.push_back(state_to_json(s));
  return arr;
}
}  // namespace

json trajectory_to_json(const Trajectory & t)
{
  return json{{"dt", t.dt}, {"frame", frame_name(t.frame)}, {"states", states_to_json(t.states)}};
}

Trajectory trajectory_from_json(const json & j, const std::string & where)
{
  check_keys(j, {"dt", "frame", "states"}, where);
  Trajectory t;
  t.dt = number(j, "dt", where);
  if (j.contains("frame")) {
    const std::string f = string_field(j, "frame", where);
    if (f == "global") {
      t.frame = TrajectoryFrame::global;
    } else if (f == "ego_local") {
      t.frame = TrajectoryFrame::ego_local;
    } else {
      schema_error("field '" + where + ".frame' must be 'global' or 'ego_local'");
    }
  }
  t.states = states_from_json(array_field(j, "states", where), where + ".states");
  if (t.states.size() < 2) throw Error(ErrorKind::validation, where + ": trajectory length must be >= 2");
  if (!(t.dt > 0.0)) throw Error(ErrorKind::validation, where + ": dt must be positive");
  return t;
}

json scenario_to_json(const Scenario & s)
{
  json lanes = json::array();
  for (const Lane & l : s.map.lanes) {
    lanes.push_back(
      {{"polyline", points_to_json(l.centerline.points())},
       {"width", l.width},
       {"direction", l.direction == LaneDirection::forward ? "forward" : "backward"}});
  }
  json polys = json::array();
  for (const Polygon & p : s.map.drivable_area) polys.push_back(points_to_json(p.ring()));
  json lights = json::array();
  for (const TrafficLight & tl : s.map.traffic_lights) {
    json phases = json::array();
    for (const LightPhase & p : tl.phases) {
      phases.push_back({{"t0", p.t0}, {"t1", p.t1}, {"state", p.state == LightState::red ? "red" : "green"}});
    }
    lights.push_back(
      {{"stop_line", json::array({{tl.stop_line.a.x, tl.stop_line.a.y}, {tl.stop_line.b.x, tl.stop_line.b.y}})},
       {"phases", phases}});
  }
  json agents = json::array();
  for (const AgentTrack & a : s.agents) {
    agents.push_back(
      {{"id", a.id},
       {"length", a.length},
       {"width", a.width},
       {"kind", a.is_static() ? "static" : "vehicle"},
       {"states", states_to_json(a.states)}});
  }
  return json{
    {"id", s.id},
    {"dt", s.dt},
    {"t_history", s.t_history},
    {"t_horizon", s.t_horizon},
    {"map",
     {{"lanes", lanes},
      {"drivable_area", polys},
      {"route", points_to_json(s.map.route.points())},
      {"traffic_lights", lights}}},
    {"ego_log", states_to_json(s.ego_log.states)},
    {"agents", agents},
  };
}

Scenario scenario_from_json(const json & j)
{
  check_keys(j, {"id", "dt", "t_history", "t_horizon", "map", "ego_log", "agents"}, "scenario");
  Scenario s;
  s.id = string_field(j, "id", "scenario");
  s.dt = number(j, "dt", "scenario");
  s.t_history = integer(j, "t_history", "scenario");
  s.t_horizon = integer(j, "t_horizon", "scenario");

  const json & jm = field(j, "map", "scenario");
  check_keys(jm, {"lanes", "drivable_area", "route", "traffic_lights"}, "map");
  const json & jl = array_field(jm, "lanes", "map");
  for (std::size_t i = 0; i < jl.size(); ++i) {
    const std::string w = "map.lanes[" + std::to_string(i) + "]";
    check_keys(jl[i], {"polyline", "width", "direction"}, w);
    Lane lane;
    lane.centerline = Polyline(points_from_json(field(jl[i], "polyline", w), w + ".polyline"));
    lane.width = number(jl[i], "width", w);
    const std::string dir = string_field(jl[i], "direction", w);
    if (dir == "forward") {
      lane.direction = LaneDirection::forward;
    } else if (dir == "backward") {
      lane.direction = LaneDirection::backward;
    } else {
      schema_error("field '" + w + ".direction' must be 'forward' or 'backward'");
    }
    s.map.lanes.push_back(std::move(lane));
  }
  const json & jd = array_field(jm, "drivable_area", "map");
  for (std::size_t i = 0; i < jd.size(); ++i) {
    s.map.drivable_area.emplace_back(points_from_json(jd[i], "map.drivable_area[" + std::to_string(i) + "]"));
  }
  s.map.route = Polyline(points_from_json(field(jm, "route", "map"), "map.route"));
  const json & jt = array_field(jm, "traffic_lights", "map");
  for (std::size_t i = 0; i < jt.size(); ++i) {
    const std::string w = "map.traffic_lights[" + std::to_string(i) + "]";
    check_keys(jt[i], {"stop_line", "phases"}, w);
    TrafficLight tl;
    const auto line = points_from_json(field(jt[i], "stop_line", w), w + ".stop_line");
    if (line.size() != 2) schema_error("field '" + w + ".stop_line' must hold exactly 2 points");
    tl.stop_line = {line[0], line[1]};
    const json & jp = array_field(jt[i], "phases", w);
    for (std::size_t p = 0; p < jp.size(); ++p) {
      const std::string wp = w + ".phases[" + std::to_string(p) + "]";
      check_keys(jp[p], {"t0", "t1", "state"}, wp);
      LightPhase phase;
      phase.t0 = number(jp[p], "t0", wp);
      phase.t1 = number(jp[p], "t1", wp);
      const std::string st = string_field(jp[p], "state", wp);
      if (st == "red") {
        phase.state = LightState::red;
      } else if (st == "green") {
        phase.state = LightState::green;
      } else {
        schema_error("field '" + wp + ".state' must be 'red' or 'green'");
      }
      tl.phases.push_back(phase);
    }
    s.map.traffic_lights.push_back(std::move(tl));
  }

  s.ego_log.dt = s.dt;
  s.ego_log.frame = TrajectoryFrame::global;
  s.ego_log.states = states_from_json(array_field(j, "ego_log", "scenario"), "ego_log");

  const json & ja = array_field(j, "agents", "scenario");
  for (std::size_t i = 0; i < ja.size(); ++i) {
    const std::string w = "agents[" + std::to_string(i) + "]";
    check_keys(ja[i], {"id", "length", "width", "kind", "states"}, w);
    AgentTrack a;
    a.id = string_field(ja[i], "id", w);
    a.length = number(ja[i], "length", w);
    a.width = number(ja[i], "width", w);
    const std::string kind = string_field(ja[i], "kind", w);
    if (kind == "vehicle") {
      a.kind = AgentKind::vehicle;
    } else if (kind == "static") {
      a.kind = AgentKind::static_object;
    } else {
      schema_error("field '" + w + ".kind' must be 'vehicle' or 'static'");
    }
    a.states = states_from_json(array_field(ja[i], "states", w), w + ".states");
    s.agents.push_back(std::move(a));
  }
  std::sort(s.agents.begin(), s.agents.end(), [](const AgentTrack & a, const AgentTrack & b) {
    return a.id < b.id;
  });
  return s;
}

json read_json_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error & e) {
    throw Error(ErrorKind::parse, "malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json_file(const json & j, const std::filesystem::path & path, int indent)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << j.dump(indent) << '\n';
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

Scenario load_scenario(const std::filesystem::path & path, const VehicleParams & vehicle)
{
  Scenario s = scenario_from_json(read_json_file(path));
  const auto diags = validate_scenario(s, vehicle);
  if (!diags.empty()) {
    std::string msg = "invalid scenario '" + path.string() + "':";
    for (const Diagnostic & d : diags) msg += " [" + d.invariant + " @ " + d.location + "] " + d.message + ";";
    throw Error(ErrorKind::validation, msg);
  }
  return s;
}

void write_scenario(const Scenario & s, const std::filesystem::path & path)
{
  write_json_file(scenario_to_json(s), path);
}

Trajectory load_trajectory(const std::filesystem::path & path)
{
  return trajectory_from_json(read_json_file(path));
}

void write_trajectory(const Trajectory & t, const std::filesystem::path & path)
{
  write_json_file(trajectory_to_json(t), path);
}

bool operator==(const Scenario & a, const Scenario & b)
{
  return scenario_to_json(a) == scenario_to_json(b);
}

}  // namespace scenesim
