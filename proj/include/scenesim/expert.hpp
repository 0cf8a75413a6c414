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

#ifndef SCENESIM__EXPERT_HPP_
#define SCENESIM__EXPERT_HPP_

#include "scenesim/metrics.hpp"
#include "scenesim/reactive_sim.hpp"
#include "scenesim/vocab.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scenesim
{

/// Start velocity and heading plus end pose, all in one reference frame.
struct MatchingVector
{
  double v_x{0.0};
  double v_y{0.0};
  double theta0{0.0};
  double x_end{0.0};
  double y_end{0.0};
  double theta_end{0.0};

  std::array<double, 6> values() const { return {v_x, v_y, theta0, x_end, y_end, theta_end}; }
};

/// Matching vector of `traj` in the frame of its first state. `horizon` > 0 enforces the length.
MatchingVector build_matching_vector(const Trajectory & traj, std::size_t horizon = 0);

/// Recovery target: start velocity from `start`, end pose from `goal`, in the frame of `start`.
MatchingVector recovery_target(const VehicleState & start, const Pose2D & goal);

/// Per-component weights of the L1 matching distance; all ones reproduces plain L1.
using MatchingScale = std::array<double, 6>;
inline constexpr MatchingScale kUnitScale{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};

/// L1 distance with angle components compared through their wrapped difference.
double matching_distance(const MatchingVector & a, const MatchingVector & b, const MatchingScale & scale = kUnitScale);

/// Precomputed matching vectors of a vocabulary.
class MatchingIndex
{
public:
  explicit MatchingIndex(const Vocabulary & vocab);
  /// Entry minimizing the matching distance; ties go to the lower index.
  std::size_t nearest(const MatchingVector & target, const MatchingScale & scale = kUnitScale) const;
  const std::vector<MatchingVector> & vectors() const { return vectors_; }

private:
  std::vector<MatchingVector> vectors_;
};

std::size_t recovery_retrieve_index(
  const MatchingVector & target, const Vocabulary & vocab, const MatchingScale & scale = kUnitScale);
/// The retrieved entry itself (ego-local).
Trajectory recovery_retrieve(
  const MatchingVector & target, const Vocabulary & vocab, const MatchingScale & scale = kUnitScale);

struct PlannerParams
{
  std::vector<double> speed_fractions{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> lateral_offsets{-1.0, -0.5, 0.0, 0.5, 1.0};
  // 0 uses the scenario horizon
  int horizon{0};
  MetricWeights weights;
  double v_desired{13.0};
  double jerk_max{4.0};
  double lane_width{3.5};
};

/// Throws Error(invalid_argument) when the proposal bank is malformed.
void validate_planner_params(const PlannerParams & p);

/// Everything known at the moment the expert takes over.
struct PlanContext
{
  const SceneSnapshot * init{nullptr};  // null: logged states at the start frame
  std::span<const VehicleState> history;
  std::optional<ComfortFeatures> stage1;
};

struct PlanResult
{
  Trajectory plan;
  std::size_t index{0};
  double score{0.0};
  std::vector<std::optional<double>> scores;  // per proposal; empty when not simulable
  SceneStates states;                         // reactive rollout of the winner
};

/// Candidate proposals in bank order (speed fraction major, offset minor).
std::vector<Trajectory> planner_proposals(
  const Scenario & scenario, std::size_t t, const PlannerParams & p, const SimParams & sim,
  const SceneSnapshot * init = nullptr);

/// Privileged planner: simulates every proposal reactively from frame t, scores it and
/// returns the best one (ties: lower index). Throws Error(runtime) if none is simulable.
PlanResult privileged_plan(
  const Scenario & scenario, std::size_t t, const PlannerParams & p, const SimParams & sim = {},
  const MetricParams & metric = {}, const PlanContext & ctx = {});

struct ExpertFilterSpec
{
  std::vector<std::string> required_ones{"nc", "dac", "ddc", "tlc", "ttc", "lk", "hc", "ec"};
  double ep_min{0.5};
};

struct FilterDecision
{
  bool accept{false};
  std::string reason;  // empty on accept, otherwise "kinematics", "EP" or an upper-case sub-metric
  SubMetricVector submetrics;
  double epdms{0.0};
};

/// Kinematic limits of a trajectory: curvature and longitudinal acceleration.
std::optional<std::string> kinematic_limit_violation(const Trajectory & traj, const VehicleParams & vehicle);

FilterDecision expert_filter(
  const SceneStates & states, const Scenario & scenario, const Trajectory & traj, const ExpertFilterSpec & spec,
  const MetricContext & ctx = {}, const MetricParams & metric = {}, const VehicleParams & vehicle = {});

/// Upper-case display name of a sub-metric.
std::string submetric_label(std::string_view name);

}  // namespace scenesim

#endif  // SCENESIM__EXPERT_HPP_
