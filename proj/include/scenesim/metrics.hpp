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

#ifndef SCENESIM__METRICS_HPP_
#define SCENESIM__METRICS_HPP_

#include "scenesim/reactive_sim.hpp"
#include "scenesim/scenario.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scenesim
{

/// Penalty members (nc, dac, ddc, tlc) are binary; the rest lie in [0, 1].
struct SubMetricVector
{
  double nc{1.0};
  double dac{1.0};
  double ddc{1.0};
  double tlc{1.0};
  double ep{1.0};
  double ttc{1.0};
  double lk{1.0};
  double hc{1.0};
  double ec{1.0};

  bool operator==(const SubMetricVector &) const = default;
};

/// Names in canonical order: nc dac ddc tlc ep ttc lk hc ec.
inline constexpr std::array<const char *, 9> kSubMetricNames = {
  "nc", "dac", "ddc", "tlc", "ep", "ttc", "lk", "hc", "ec"};

double submetric_value(const SubMetricVector & s, std::string_view name);
bool is_submetric_name(std::string_view name);

struct MetricWeights
{
  double ep{5.0};
  double ttc{5.0};
  double lk{2.0};
  double hc{2.0};
  double ec{2.0};
};

enum class TwoStageAggregation { product, mean };

/// Thresholds of the rule-based sub-metrics. Defaults are artifact choices.
struct MetricParams
{
  MetricWeights weights;
  double at_fault_min_speed{0.1};
  double ddc_max_seconds{1.0};
  double ddc_max_angle{kPi / 2.0};
  double ep_min_reference{0.1};
  double ttc_threshold{1.0};
  double ttc_horizon{3.0};
  double ttc_min_speed{0.5};
  double lk_margin{0.3};
  double lk_min_fraction{0.95};
  double hc_max_accel{4.0};
  double hc_max_jerk{8.0};
  double hc_max_yaw_rate{0.95};
  double hc_max_yaw_accel{1.9};
  double ec_max_relative{0.3};
  // per-feature floors (accel, jerk, yaw rate) for the relative comparison;
  // defaults match the history-comfort limits
  std::array<double, 3> ec_floor{4.0, 8.0, 0.95};
  TwoStageAggregation two_stage{TwoStageAggregation::product};
};

/// Penalty product times the weighted mean of the graded members.
double aggregate_epdms(const SubMetricVector & s, const MetricWeights & w);
double aggregate_two_stage(double s1, double s2, TwoStageAggregation mode);

struct CollisionEvent
{
  std::size_t frame{0};
  std::string agent_id;
  bool at_fault{false};
};

struct EgoFootprint
{
  OrientedBox box;
  double speed{0.0};
};

struct AgentFootprints
{
  std::string id;
  bool is_static{false};
  std::vector<OrientedBox> boxes;
};

/// Earliest ego/agent overlap. A collision is at fault when the ego moves faster
/// than `moving_speed` and the contact lies in its front half, or the agent is static.
std::optional<CollisionEvent> check_collision(
  std::span<const EgoFootprint> ego, std::span<const AgentFootprints> agents, double moving_speed = 0.1);
/// First contact with every agent that is hit at all, ordered by frame then agent.
std::vector<CollisionEvent> find_collisions(
  std::span<const EgoFootprint> ego, std::span<const AgentFootprints> agents, double moving_speed = 0.1);

/// Collisions between the ego and every agent of a simulated window.
std::vector<CollisionEvent> scene_collisions(
  const SceneStates & states, const VehicleParams & vehicle, double moving_speed = 0.1);

/// Approximate contact point of two overlapping boxes.
Vec2 contact_point(const OrientedBox & a, const OrientedBox & b);

/// Minimum constant-velocity time to collision over all frames (inf when none).
/// Frames where the ego is slower than `min_ego_speed` are skipped.
double time_to_collision(
  const SceneStates & states, double ego_length, double ego_width, double horizon,
  double min_ego_speed = 0.0);

struct ComfortFeatures
{
  double max_accel{0.0};
  double max_jerk{0.0};
  double max_yaw_rate{0.0};
};

ComfortFeatures comfort_features(std::span<const VehicleState> states, double dt);
/// History-comfort check over a state sequence.
bool comfortable(std::span<const VehicleState> states, double dt, const MetricParams & p);

struct MetricContext
{
  // ego states immediately preceding the scored window, oldest first
  std::span<const VehicleState> history;
  // comfort features of the first stage when scoring a second stage
  std::optional<ComfortFeatures> stage1;
};

SubMetricVector compute_submetrics(
  const SceneStates & states, const Scenario & scenario, const MetricContext & ctx,
  const MetricParams & params, const VehicleParams & vehicle);

struct RewardRecord
{
  SubMetricVector submetrics;
  double epdms{0.0};
  std::optional<std::array<double, 2>> stage_scores;
};

nlohmann::json submetrics_to_json(const SubMetricVector & s);
SubMetricVector submetrics_from_json(const nlohmann::json & j);
nlohmann::json metric_report(const std::string & scenario_id, const RewardRecord & r);

}  // namespace scenesim

#endif  // SCENESIM__METRICS_HPP_
