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


#include "scenesim/error.hpp"
#include "scenesim/expert.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace scenesim
{
namespace
{

using testing::agent_track;
using testing::data_path;
using testing::straight_road;
using testing::straight_states;

Trajectory line(double x0, double y0, double theta, double v, std::size_t n = 40)
{
  return Trajectory{0.1, straight_states(x0, y0, theta, v, n), TrajectoryFrame::global};
}

Trajectory bicycle_arc(const Pose2D & start, double v, double steer_rate, std::size_t n = 40)
{
  Trajectory t;
  t.dt = 0.1;
  VehicleState s;
  s.pose = start;
  s.vel_lon = v;
  t.states.push_back(s);
  while (t.states.size() < n) t.states.push_back(bicycle_step(t.states.back(), {0.0, steer_rate}, 0.1, {}));
  return t;
}

// Wrapped L1 distance written out independently.
double l1(const MatchingVector & a, const MatchingVector & b)
{
  const auto wrap = [](double x) { return std::abs(std::atan2(std::sin(x), std::cos(x))); };
  return std::abs(a.v_x - b.v_x) + std::abs(a.v_y - b.v_y) + wrap(a.theta0 - b.theta0) + std::abs(a.x_end - b.x_end) +
         std::abs(a.y_end - b.y_end) + wrap(a.theta_end - b.theta_end);
}

TEST(MatchingVector, StraightTrajectory)
{
  const MatchingVector m = build_matching_vector(line(3.0, -1.0, 0.0, 5.0), 40);
  const std::array<double, 6> expected{5.0, 0.0, 0.0, 19.5, 0.0, 0.0};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(m.values()[i], expected[i], 1e-9) << i;
}

TEST(MatchingVector, InvariantToGlobalRotation)
{
  const MatchingVector a = build_matching_vector(bicycle_arc({0.0, 0.0, 0.0}, 7.0, 0.05));
  const MatchingVector b = build_matching_vector(bicycle_arc({12.0, -4.0, kPi / 2.0}, 7.0, 0.05));
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(a.values()[i], b.values()[i], 1e-9) << i;
}

TEST(MatchingVector, ArcAgainstScriptedExtraction)
{
  const Trajectory t = bicycle_arc({3.0, -2.0, 0.7}, 8.0, 0.08);
  const VehicleState & a = t.front();
  const VehicleState & b = t.back();
  const double dx = b.pose.x - a.pose.x;
  const double dy = b.pose.y - a.pose.y;
  const double c = std::cos(a.pose.theta);
  const double s = std::sin(a.pose.theta);
  const MatchingVector m = build_matching_vector(t, 40);
  EXPECT_NEAR(m.v_x, 8.0, 1e-12);
  EXPECT_NEAR(m.v_y, 0.0, 1e-12);
  EXPECT_NEAR(m.theta0, 0.0, 1e-12);
  EXPECT_NEAR(m.x_end, c * dx + s * dy, 1e-9);
  EXPECT_NEAR(m.y_end, -s * dx + c * dy, 1e-9);
  EXPECT_NEAR(m.theta_end, std::atan2(std::sin(b.pose.theta - a.pose.theta), std::cos(b.pose.theta - a.pose.theta)), 1e-9);
  EXPECT_GT(m.y_end, 1.0);
  EXPECT_THROW(build_matching_vector(t, 41), Error);
}

TEST(MatchingVector, RecoveryTargetUsesStartFrame)
{
  VehicleState start;
  start.pose = {10.0, 5.0, kPi / 2.0};
  start.vel_lon = 6.0;
  const MatchingVector m = recovery_target(start, {8.0, 25.0, kPi / 2.0 + 0.1});
  EXPECT_NEAR(m.x_end, 20.0, 1e-9);
  EXPECT_NEAR(m.y_end, 2.0, 1e-9);
  EXPECT_NEAR(m.theta_end, 0.1, 1e-12);
  EXPECT_DOUBLE_EQ(m.v_x, 6.0);
}

Vocabulary random_vocabulary(std::size_t n, std::uint64_t seed)
{
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> v(0.0, 15.0);
  std::uniform_real_distribution<double> rate(-0.3, 0.3);
  Vocabulary vocab;
  for (std::size_t i = 0; i < n; ++i) vocab.entries.push_back(bicycle_arc({0.0, 0.0, 0.0}, v(gen), rate(gen)));
  return vocab;
}

TEST(Retrieve, ExactMatchReturnsThatEntry)
{
  const Vocabulary vocab = random_vocabulary(32, 4);
  EXPECT_EQ(recovery_retrieve_index(build_matching_vector(vocab.entries[7]), vocab), 7u);
  EXPECT_EQ(recovery_retrieve(build_matching_vector(vocab.entries[7]), vocab), vocab.entries[7]);
}

TEST(Retrieve, TiesGoToLowerIndex)
{
  Vocabulary vocab;
  vocab.entries = {line(0, 0, 0, 9.0), line(0, 0, 0, 4.0), line(0, 0, 0, 6.0), line(0, 0, 0, 4.0)};
  EXPECT_EQ(recovery_retrieve_index(build_matching_vector(vocab.entries[3]), vocab), 1u);
  // equidistant from the 4 m/s and 6 m/s entries
  MatchingVector mid = build_matching_vector(line(0, 0, 0, 5.0));
  EXPECT_EQ(recovery_retrieve_index(mid, vocab), 1u);
  EXPECT_THROW(recovery_retrieve_index(mid, Vocabulary{}), Error);
}

TEST(Retrieve, MatchesExhaustiveScan)
{
  const Vocabulary vocab = random_vocabulary(512, 8);
  const MatchingIndex index(vocab);
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int q = 0; q < 1000; ++q) {
    const MatchingVector target{7.5 + 8.0 * u(gen), 0.2 * u(gen), 0.1 * u(gen), 30.0 + 30.0 * u(gen), 15.0 * u(gen),
                                kPi * u(gen)};
    std::size_t oracle = 0;
    for (std::size_t i = 1; i < vocab.size(); ++i) {
      if (l1(build_matching_vector(vocab.entries[i]), target) < l1(build_matching_vector(vocab.entries[oracle]), target)) {
        oracle = i;
      }
    }
    ASSERT_EQ(index.nearest(target), oracle) << "query " << q;
  }
}

TEST(Planner, EmptyRoadMakesFullProgress)
{
  const Scenario s = straight_road();
  const PlanResult r = privileged_plan(s, 20, PlannerParams{});
  const SubMetricVector m = compute_submetrics(r.states, s, {}, MetricParams{}, VehicleParams{});
  EXPECT_EQ(m.ep, 1.0);
  EXPECT_EQ(m.nc * m.dac * m.ddc * m.tlc, 1.0);
  EXPECT_EQ(r.plan.size(), 40u);
}

TEST(Planner, StopsBehindBlockingVehicle)
{
  Scenario s = straight_road();
  // stopped 15 m (bumper to bumper) ahead of the ego's position at frame 20
  s.agents.push_back(agent_track("blocker", 20.0 + 15.0 + 4.8, 0.0, 0.0, s.ego_log.states.size()));
  const PlanResult r = privileged_plan(s, 20, PlannerParams{});
  EXPECT_TRUE(scene_collisions(r.states, VehicleParams{}).empty());
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < r.states.size(); ++k) {
    const Vec2 d = r.states.agents[0].states[k].pose.position() - r.states.ego[k].pose.position();
    if (std::abs(d.y) < 2.0) min_gap = std::min(min_gap, d.x - 4.8);
  }
  EXPECT_GT(min_gap, 0.0);
}

TEST(Planner, SingleProposalReturnedVerbatim)
{
  const Scenario s = straight_road();
  PlannerParams p;
  p.speed_fractions = {0.5};
  p.lateral_offsets = {0.0};
  const auto proposals = planner_proposals(s, 20, p, SimParams{});
  ASSERT_EQ(proposals.size(), 1u);
  const PlanResult r = privileged_plan(s, 20, p);
  EXPECT_EQ(r.index, 0u);
  EXPECT_EQ(r.plan, proposals[0]);
}

TEST(Planner, WinnerScoresAtLeastEveryProposal)
{
  Scenario s = load_scenario(data_path("scenarios/benign_straight.json"));
  const PlannerParams p;
  const SimParams sim;
  const PlanResult r = privileged_plan(s, 20, p, sim);
  const auto proposals = planner_proposals(s, 20, p, sim);
  ASSERT_EQ(proposals.size(), 25u);
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const SceneStates st = rollout(s, proposals[i], 20, 40, RolloutMode::reactive, sim);
    const double score = aggregate_epdms(compute_submetrics(st, s, {}, MetricParams{}, sim.vehicle), p.weights);
    EXPECT_GE(r.score, score) << "proposal " << i;
    if (i == r.index) {
      EXPECT_EQ(r.score, score);
    }
  }
  EXPECT_EQ(privileged_plan(s, 20, p, sim).plan, r.plan);
}

TEST(Planner, RejectsBadParameters)
{
  const Scenario s = straight_road();
  PlannerParams p;
  p.speed_fractions = {};
  EXPECT_THROW(privileged_plan(s, 20, p), Error);
  p = PlannerParams{};
  p.lateral_offsets = {3.0};
  EXPECT_THROW(privileged_plan(s, 20, p), Error);
  EXPECT_THROW(privileged_plan(s, 70, PlannerParams{}), Error);
}

SceneStates log_window(const Scenario & s, std::size_t t0, std::size_t n)
{
  return rollout(s, Trajectory{}, t0, n, RolloutMode::log_replay_ego, SimParams{});
}

TEST(ExpertFilter, BenignTrajectoryAccepted)
{
  const Scenario s = load_scenario(data_path("scenarios/benign_straight.json"));
  const SceneStates st = rollout(s, Trajectory{}, 20, 40, RolloutMode::log_replay_ego, SimParams{});
  const MetricContext ctx{std::span<const VehicleState>(s.ego_log.states).subspan(0, 20), std::nullopt};
  const FilterDecision d = expert_filter(st, s, st.ego_trajectory(), ExpertFilterSpec{}, ctx);
  EXPECT_TRUE(d.accept) << d.reason;
  EXPECT_TRUE(d.reason.empty());
}

TEST(ExpertFilter, LowProgressRejectedAsEp)
{
  const Scenario s = straight_road();
  SceneStates st = log_window(s, 20, 40);
  st.ego = straight_states(20.0, 0.0, 0.0, 4.0, 40);
  const FilterDecision d = expert_filter(st, s, st.ego_trajectory(), ExpertFilterSpec{});
  EXPECT_NEAR(d.submetrics.ep, 0.4, 1e-9);
  EXPECT_FALSE(d.accept);
  EXPECT_EQ(d.reason, "EP");
}

TEST(ExpertFilter, OverCurvedRejectedAsKinematics)
{
  const Scenario s = straight_road();
  const SceneStates st = log_window(s, 20, 40);
  Trajectory tight;
  tight.dt = 0.1;
  for (int k = 0; k < 40; ++k) {
    const double a = 6.0 * 0.1 * k / 3.0;
    VehicleState v;
    v.pose = {3.0 * std::sin(a), 3.0 * (1.0 - std::cos(a)), normalize_angle(a)};
    v.vel_lon = 6.0;
    tight.states.push_back(v);
  }
  ASSERT_TRUE(kinematic_limit_violation(tight, VehicleParams{}).has_value());
  const FilterDecision d = expert_filter(st, s, tight, ExpertFilterSpec{});
  EXPECT_FALSE(d.accept);
  EXPECT_EQ(d.reason, "kinematics");
}

TEST(ExpertFilter, NamesTheFailedSubMetric)
{
  Scenario s = straight_road();
  s.agents.push_back(agent_track("parked", 45.0, 0.0, 0.0, s.ego_log.states.size(), AgentKind::static_object));
  const SceneStates st = log_window(s, 20, 40);
  const FilterDecision d = expert_filter(st, s, st.ego_trajectory(), ExpertFilterSpec{});
  EXPECT_FALSE(d.accept);
  EXPECT_EQ(d.reason, "NC");
  EXPECT_EQ(submetric_label("ttc"), "TTC");
}

}  // namespace
}  // namespace scenesim
