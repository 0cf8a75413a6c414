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

#include "scenesim/config.hpp"

#include "scenesim/error.hpp"
#include "scenesim/random.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace scenesim
{

using nlohmann::json;

const char * to_string(ExpertKind k) { return k == ExpertKind::recovery ? "recovery" : "planner"; }

std::optional<ExpertKind> parse_expert_kind(std::string_view s)
{
  if (s == "recovery") return ExpertKind::recovery;
  if (s == "planner") return ExpertKind::planner;
  return std::nullopt;
}

std::vector<CameraSpec> default_camera_rig()
{
  CameraSpec front;
  front.id = "cam_front";
  front.extrinsic = {1.5, 0.0, 0.0};
  front.height = 1.6;
  front.intrinsics = {{"fx", 1266.4}, {"fy", 1266.4}, {"cx", 816.3}, {"cy", 491.5}, {"width", 1600}, {"height", 900}};
  return {front};
}

namespace
{

// Strict reader over one JSON object: remembers the keys it knows and
// rejects everything else on finish().
class Reader
{
public:
  Reader(const json & j, std::string path) : j_(j), path_(std::move(path))
  {
    if (!j_.is_object()) throw Error(ErrorKind::schema, where() + " must be an object");
  }

  template <class T>
  Reader & field(const char * key, T & out)
  {
    known_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) {
      try {
        out = it->template get<T>();
      } catch (const json::exception &) {
        throw Error(ErrorKind::schema, "config field " + name(key) + " has the wrong type");
      }
    }
    return *this;
  }

  template <std::size_t N>
  Reader & array(const char * key, std::array<double, N> & out)
  {
    known_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) {
      if (!it->is_array() || it->size() != N) {
        throw Error(ErrorKind::schema, "config field " + name(key) + " must be an array of " + std::to_string(N) + " numbers");
      }
      for (std::size_t i = 0; i < N; ++i) {
        if (!(*it)[i].is_number()) throw Error(ErrorKind::schema, "config field " + name(key) + " must hold numbers");
        out[i] = (*it)[i].template get<double>();
      }
    }
    return *this;
  }

  template <class F>
  Reader & object(const char * key, F && fn)
  {
    known_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) {
      Reader sub(*it, name(key));
      fn(sub);
      sub.finish();
    }
    return *this;
  }

  /// Raw access for fields that need custom parsing.
  const json * raw(const char * key)
  {
    known_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string name(const std::string & key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const
  {
    for (const auto & item : j_.items()) {
      if (!known_.count(item.key())) throw Error(ErrorKind::schema, "unknown config field " + name(item.key()));
    }
  }

private:
  std::string where() const { return path_.empty() ? "config" : "config field " + path_; }

  const json & j_;
  std::string path_;
  std::set<std::string> known_;
};

json camera_to_json(const CameraSpec & c)
{
  return json{{"id", c.id},       {"x", c.extrinsic.x},          {"y", c.extrinsic.y},
              {"yaw", c.extrinsic.theta}, {"height", c.height}, {"intrinsics", c.intrinsics}};
}

CameraSpec camera_from_json(const json & j, const std::string & path)
{
  CameraSpec c;
  c.intrinsics = json::object();
  Reader r(j, path);
  r.field("id", c.id).field("x", c.extrinsic.x).field("y", c.extrinsic.y).field("yaw", c.extrinsic.theta);
  r.field("height", c.height);
  if (const json * in = r.raw("intrinsics")) c.intrinsics = *in;
  r.finish();
  if (!j.contains("id")) throw Error(ErrorKind::schema, "config field " + path + ".id is required");
  return c;
}

}  // namespace

json config_to_json(const PipelineConfig & c)
{
  const auto & v = c.sim.vehicle;
  const auto & q = c.sim.lqr;
  const auto & idm = c.sim.idm;
  const auto & m = c.metrics;
  const auto & mv = c.vocab.maneuvers;
  json cams = json::array();
  for (const CameraSpec & cam : c.cameras) cams.push_back(camera_to_json(cam));
  return json{
    {"master_seed", c.master_seed},
    {"rounds", c.rounds},
    {"per_round", c.per_round},
    {"expert", to_string(c.expert)},
    {"reactive", c.reactive},
    {"workers", c.workers},
    {"thresholds",
     {{"r_lon", c.thresholds.r_lon},
      {"r_lat", c.thresholds.r_lat},
      {"dtheta_max_deg", rad2deg(c.thresholds.dtheta_max)},
      {"epdms_min", c.thresholds.epdms_min},
      {"speed_tolerance", c.thresholds.speed_tolerance}}},
    {"grid", {{"step_lon", c.grid.step_lon}, {"step_lat", c.grid.step_lat}, {"interleave", c.grid.interleave}}},
    {"vehicle",
     {{"length", v.length},
      {"width", v.width},
      {"wheelbase", v.wheelbase},
      {"a_cmd_max", v.a_cmd_max},
      {"steer_max", v.steer_max},
      {"steer_rate_max", v.steer_rate_max},
      {"kinematic_tolerance", v.kinematic_tolerance}}},
    {"lqr", {{"state_weights", q.state_weights}, {"control_weights", q.control_weights}, {"horizon", q.horizon},
             {"jerk_limit", q.jerk_limit}, {"yaw_accel_limit", q.yaw_accel_limit}}},
    {"idm",
     {{"v_desired", idm.v_desired},
      {"headway", idm.headway},
      {"s0", idm.s0},
      {"a_max", idm.a_max},
      {"b_comf", idm.b_comf},
      {"delta", idm.delta},
      {"b_hard", idm.b_hard}}},
    {"sim",
     {{"pure_pursuit_lookahead", c.sim.pure_pursuit_lookahead},
      {"leader_lookahead", c.sim.leader_lookahead},
      {"agent_steer_rate_max", c.sim.agent_steer_rate_max}}},
    {"metrics",
     {{"weights",
       {{"ep", m.weights.ep}, {"ttc", m.weights.ttc}, {"lk", m.weights.lk}, {"hc", m.weights.hc}, {"ec", m.weights.ec}}},
      {"at_fault_min_speed", m.at_fault_min_speed},
      {"ddc_max_seconds", m.ddc_max_seconds},
      {"ddc_max_angle", m.ddc_max_angle},
      {"ep_min_reference", m.ep_min_reference},
      {"ttc_threshold", m.ttc_threshold},
      {"ttc_horizon", m.ttc_horizon},
      {"ttc_min_speed", m.ttc_min_speed},
      {"lk_margin", m.lk_margin},
      {"lk_min_fraction", m.lk_min_fraction},
      {"hc_max_accel", m.hc_max_accel},
      {"hc_max_jerk", m.hc_max_jerk},
      {"hc_max_yaw_rate", m.hc_max_yaw_rate},
      {"hc_max_yaw_accel", m.hc_max_yaw_accel},
      {"ec_max_relative", m.ec_max_relative},
      {"ec_floor", m.ec_floor},
      {"two_stage", m.two_stage == TwoStageAggregation::product ? "product" : "mean"}}},
    {"planner",
     {{"speed_fractions", c.planner.speed_fractions},
      {"lateral_offsets", c.planner.lateral_offsets},
      {"horizon", c.planner.horizon},
      {"weights",
       {{"ep", c.planner.weights.ep},
        {"ttc", c.planner.weights.ttc},
        {"lk", c.planner.weights.lk},
        {"hc", c.planner.weights.hc},
        {"ec", c.planner.weights.ec}}},
      {"v_desired", c.planner.v_desired},
      {"jerk_max", c.planner.jerk_max},
      {"lane_width", c.planner.lane_width}}},
    {"expert_filter", {{"required_ones", c.expert_filter.required_ones}, {"ep_min", c.expert_filter.ep_min}}},
    {"matching_scale", c.matching_scale},
    {"vocab",
     {{"maneuvers",
       {{"count", mv.count},
        {"horizon", mv.horizon},
        {"dt", mv.dt},
        {"v_max", mv.v_max},
        {"accel_min", mv.accel_min},
        {"accel_max", mv.accel_max},
        {"jerk_max", mv.jerk_max},
        {"lat_accel_max", mv.lat_accel_max}}},
      {"k", c.vocab.k},
      {"seed", c.vocab.seed}}},
    {"cameras", cams}};
}

PipelineConfig config_patch(const PipelineConfig & base, const json & patch)
{
  PipelineConfig c = base;
  Reader r(patch, "");
  r.field("master_seed", c.master_seed).field("rounds", c.rounds).field("per_round", c.per_round);
  if (const json * e = r.raw("expert")) {
    const auto kind = e->is_string() ? parse_expert_kind(e->get<std::string>()) : std::nullopt;
    if (!kind) throw Error(ErrorKind::schema, "config field expert must be \"recovery\" or \"planner\"");
    c.expert = *kind;
  }
  r.field("reactive", c.reactive).field("workers", c.workers);
  r.object("thresholds", [&](Reader & s) {
    double deg = rad2deg(c.thresholds.dtheta_max);
    s.field("r_lon", c.thresholds.r_lon).field("r_lat", c.thresholds.r_lat).field("dtheta_max_deg", deg);
    s.field("epdms_min", c.thresholds.epdms_min).field("speed_tolerance", c.thresholds.speed_tolerance);
    c.thresholds.dtheta_max = deg2rad(deg);
  });
  r.object("grid", [&](Reader & s) {
    s.field("step_lon", c.grid.step_lon).field("step_lat", c.grid.step_lat).field("interleave", c.grid.interleave);
  });
  r.object("vehicle", [&](Reader & s) {
    auto & v = c.sim.vehicle;
    s.field("length", v.length).field("width", v.width).field("wheelbase", v.wheelbase);
    s.field("a_cmd_max", v.a_cmd_max).field("steer_max", v.steer_max).field("steer_rate_max", v.steer_rate_max);
    s.field("kinematic_tolerance", v.kinematic_tolerance);
  });
  r.object("lqr", [&](Reader & s) {
    s.array("state_weights", c.sim.lqr.state_weights).array("control_weights", c.sim.lqr.control_weights);
    s.field("horizon", c.sim.lqr.horizon).field("jerk_limit", c.sim.lqr.jerk_limit);
    s.field("yaw_accel_limit", c.sim.lqr.yaw_accel_limit);
  });
  r.object("idm", [&](Reader & s) {
    auto & p = c.sim.idm;
    s.field("v_desired", p.v_desired).field("headway", p.headway).field("s0", p.s0).field("a_max", p.a_max);
    s.field("b_comf", p.b_comf).field("delta", p.delta).field("b_hard", p.b_hard);
  });
  r.object("sim", [&](Reader & s) {
    s.field("pure_pursuit_lookahead", c.sim.pure_pursuit_lookahead).field("leader_lookahead", c.sim.leader_lookahead);
    s.field("agent_steer_rate_max", c.sim.agent_steer_rate_max);
  });
  auto weights = [](MetricWeights & w) {
    return [&w](Reader & s) {
      s.field("ep", w.ep).field("ttc", w.ttc).field("lk", w.lk).field("hc", w.hc).field("ec", w.ec);
    };
  };
  r.object("metrics", [&](Reader & s) {
    auto & m = c.metrics;
    s.object("weights", weights(m.weights));
    s.field("at_fault_min_speed", m.at_fault_min_speed).field("ddc_max_seconds", m.ddc_max_seconds);
    s.field("ddc_max_angle", m.ddc_max_angle).field("ep_min_reference", m.ep_min_reference);
    s.field("ttc_threshold", m.ttc_threshold).field("ttc_horizon", m.ttc_horizon).field("ttc_min_speed", m.ttc_min_speed);
    s.field("lk_margin", m.lk_margin).field("lk_min_fraction", m.lk_min_fraction);
    s.field("hc_max_accel", m.hc_max_accel).field("hc_max_jerk", m.hc_max_jerk);
    s.field("hc_max_yaw_rate", m.hc_max_yaw_rate).field("hc_max_yaw_accel", m.hc_max_yaw_accel);
    s.field("ec_max_relative", m.ec_max_relative).array("ec_floor", m.ec_floor);
    if (const json * t = s.raw("two_stage")) {
      const std::string v = t->is_string() ? t->get<std::string>() : "";
      if (v == "product") {
        m.two_stage = TwoStageAggregation::product;
      } else if (v == "mean") {
        m.two_stage = TwoStageAggregation::mean;
      } else {
        throw Error(ErrorKind::schema, "config field metrics.two_stage must be \"product\" or \"mean\"");
      }
    }
  });
  r.object("planner", [&](Reader & s) {
    auto & p = c.planner;
    s.field("speed_fractions", p.speed_fractions).field("lateral_offsets", p.lateral_offsets);
    s.field("horizon", p.horizon).object("weights", weights(p.weights));
    s.field("v_desired", p.v_desired).field("jerk_max", p.jerk_max).field("lane_width", p.lane_width);
  });
  r.object("expert_filter", [&](Reader & s) {
    s.field("required_ones", c.expert_filter.required_ones).field("ep_min", c.expert_filter.ep_min);
  });
  r.array("matching_scale", c.matching_scale);
  r.object("vocab", [&](Reader & s) {
    s.object("maneuvers", [&](Reader & mm) {
      auto & mv = c.vocab.maneuvers;
      mm.field("count", mv.count).field("horizon", mv.horizon).field("dt", mv.dt).field("v_max", mv.v_max);
      mm.field("accel_min", mv.accel_min).field("accel_max", mv.accel_max).field("jerk_max", mv.jerk_max);
      mm.field("lat_accel_max", mv.lat_accel_max);
    });
    s.field("k", c.vocab.k).field("seed", c.vocab.seed);
  });
  if (const json * cams = r.raw("cameras")) {
    if (!cams->is_array()) throw Error(ErrorKind::schema, "config field cameras must be an array");
    c.cameras.clear();
    for (std::size_t i = 0; i < cams->size(); ++i) {
      c.cameras.push_back(camera_from_json((*cams)[i], "cameras[" + std::to_string(i) + "]"));
    }
  }
  r.finish();
  return c;
}

PipelineConfig config_from_json(const json & j)
{
  PipelineConfig c = config_patch(PipelineConfig{}, j);
  validate_config(c);
  return c;
}

PipelineConfig load_config(const std::filesystem::path & path) { return config_from_json(read_json_file(path)); }

namespace
{

void require(bool ok, const std::string & field, const std::string & what)
{
  if (!ok) throw Error(ErrorKind::validation, "config field " + field + " " + what);
}

}  // namespace

void validate_config(const PipelineConfig & c)
{
  require(c.rounds >= 1, "rounds", "must be at least 1");
  require(c.per_round >= 0, "per_round", "must be nonnegative");
  require(c.workers >= 1, "workers", "must be at least 1");
  const auto & th = c.thresholds;
  require(th.r_lon > 0.0 && th.r_lat > 0.0 && th.dtheta_max > 0.0, "thresholds", "must be positive");
  require(th.epdms_min >= 0.0 && th.epdms_min <= 1.0, "thresholds.epdms_min", "must lie in [0, 1]");
  require(th.speed_tolerance > 0.0, "thresholds.speed_tolerance", "must be positive");
  require(c.grid.step_lon > 0.0 && c.grid.step_lat > 0.0, "grid", "steps must be positive");
  const auto & v = c.sim.vehicle;
  require(
    v.length > 0.0 && v.width > 0.0 && v.wheelbase > 0.0 && v.a_cmd_max > 0.0 && v.steer_max > 0.0 &&
      v.steer_rate_max > 0.0 && v.kinematic_tolerance > 0.0,
    "vehicle", "values must be positive");
  for (double w : c.sim.lqr.state_weights) require(w >= 0.0, "lqr.state_weights", "must be nonnegative");
  for (double w : c.sim.lqr.control_weights) require(w > 0.0, "lqr.control_weights", "must be positive");
  require(c.sim.lqr.horizon >= 1, "lqr.horizon", "must be at least 1");
  const auto & idm = c.sim.idm;
  require(
    idm.v_desired > 0.0 && idm.headway > 0.0 && idm.s0 > 0.0 && idm.a_max > 0.0 && idm.b_comf > 0.0 && idm.b_hard > 0.0,
    "idm", "values must be positive");
  require(idm.delta >= 1.0, "idm.delta", "must be at least 1");
  require(
    c.sim.pure_pursuit_lookahead > 0.0 && c.sim.leader_lookahead > 0.0 && c.sim.agent_steer_rate_max > 0.0, "sim",
    "values must be positive");
  auto check_weights = [](const MetricWeights & w, const std::string & field) {
    require(w.ep >= 0.0 && w.ttc >= 0.0 && w.lk >= 0.0 && w.hc >= 0.0 && w.ec >= 0.0, field, "must be nonnegative");
    require(w.ep + w.ttc + w.lk + w.hc + w.ec > 0.0, field, "must not sum to zero");
  };
  const auto & m = c.metrics;
  check_weights(m.weights, "metrics.weights");
  require(m.lk_min_fraction >= 0.0 && m.lk_min_fraction <= 1.0, "metrics.lk_min_fraction", "must lie in [0, 1]");
  require(
    m.ttc_horizon > 0.0 && m.ttc_threshold >= 0.0 && m.hc_max_accel > 0.0 && m.hc_max_jerk > 0.0 &&
      m.hc_max_yaw_rate > 0.0 && m.hc_max_yaw_accel > 0.0 && m.ec_max_relative >= 0.0 && m.ddc_max_seconds >= 0.0,
    "metrics", "thresholds out of range");
  for (double f : m.ec_floor) require(f >= 0.0, "metrics.ec_floor", "must be nonnegative");
  check_weights(c.planner.weights, "planner.weights");
  try {
    validate_planner_params(c.planner);
  } catch (const Error & e) {
    throw Error(ErrorKind::validation, std::string("config field planner: ") + e.what());
  }
  for (const std::string & name : c.expert_filter.required_ones) {
    require(is_submetric_name(name), "expert_filter.required_ones", "has unknown sub-metric '" + name + "'");
  }
  require(c.expert_filter.ep_min >= 0.0 && c.expert_filter.ep_min <= 1.0, "expert_filter.ep_min", "must lie in [0, 1]");
  for (double s : c.matching_scale) require(s >= 0.0, "matching_scale", "must be nonnegative");
  const auto & mv = c.vocab.maneuvers;
  require(mv.count >= 1, "vocab.maneuvers.count", "must be positive");
  require(mv.horizon >= 2, "vocab.maneuvers.horizon", "must be at least 2");
  require(mv.dt > 0.0 && mv.v_max > 0.0 && mv.jerk_max >= 1.0, "vocab.maneuvers", "values out of range");
  require(mv.accel_min <= mv.accel_max, "vocab.maneuvers.accel_min", "must not exceed accel_max");
  require(c.vocab.k >= 1 && c.vocab.k <= mv.count, "vocab.k", "must lie in [1, maneuvers.count]");
  require(!c.cameras.empty(), "cameras", "must not be empty");
  std::set<std::string> ids;
  for (const CameraSpec & cam : c.cameras) {
    require(!cam.id.empty() && ids.insert(cam.id).second, "cameras", "ids must be nonempty and unique");
  }
}

std::uint64_t config_hash(const PipelineConfig & c)
{
  json j = config_to_json(c);
  j.erase("workers");
  return fnv1a64(j.dump());
}

std::string config_hash_hex(const PipelineConfig & c)
{
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(config_hash(c)));
  return buf;
}

}  // namespace scenesim
