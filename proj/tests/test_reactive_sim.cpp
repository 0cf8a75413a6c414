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
#include "scenesim/reactive_sim.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace scenesim
{
namespace
{

using testing::agent_track;
using testing::straight_road;

// Closed-form car-following law evaluated from scratch.
double idm_oracle(double v, double v_lead, double gap, const IdmParams & p)
{
  const double s_star =
    p.s0 + std::max(0.0, v * p.headway + v * (v - v_lead) / (2.0 * std::sqrt(p.a_max * p.b_comf)));
  const double free = std::pow(v / p.v_desired, p.delta);
  const double a = p.a_max * (1.0 - free - (s_star / gap) * (s_star / gap));
  return std::min(std::max(a, -p.b_hard), p.a_max);
}

Trajectory braking_plan(const VehicleState & start, double decel, std::size_t n)
{
  Trajectory plan;
  plan.dt = 0.1;
  plan.states.push_back(start);
  VehicleParams vp;
  while (plan.states.size() < n) plan.states.push_back(bicycle_step(plan.states.back(), {-decel, 0.0}, 0.1, vp));
  return plan;
}

Scenario follower_scene()
{
  Scenario s = straight_road();
  // 20 m behind the ego at the start of the horizon.
  s.agents.push_back(agent_track("follower", -20.0, 0.0, 10.0, s.ego_log.states.size()));
  return s;
}

double min_gap(const SceneStates & st, std::size_t agent)
{
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < st.size(); ++k) {
    gap = std::min(gap, st.ego[k].pose.x - st.agents[agent].states[k].pose.x - 4.8);
  }
  return gap;
}

TEST(Idm, FreeFlowEquilibrium)
{
  IdmParams p;
  EXPECT_LT(std::abs(idm_accel(p.v_desired, std::nullopt, p)), 1e-9);
}

TEST(Idm, StandstillOnFreeRoad)
{
  IdmParams p;
  EXPECT_DOUBLE_EQ(idm_accel(0.0, std::nullopt, p), p.a_max);
}

TEST(Idm, CarFollowingMatchesClosedForm)
{
  IdmParams p;
  p.v_desired = 15.0;
  const double a = idm_accel(10.0, Leader{8.0, 20.0, "lead"}, p);
  EXPECT_NEAR(a, idm_oracle(10.0, 8.0, 20.0, p), 1e-12);
  EXPECT_NEAR(a, -0.7412, 1e-4);
}

TEST(Idm, OutputStaysWithinBounds)
{
  IdmParams p;
  for (double v : {0.0, 5.0, 13.0, 25.0, 40.0}) {
    for (double gap : {0.01, 1.0, 10.0, 100.0}) {
      for (double vl : {0.0, 10.0, 30.0}) {
        const double a = idm_accel(v, Leader{vl, gap, "x"}, p);
        EXPECT_GE(a, -p.b_hard);
        EXPECT_LE(a, p.a_max);
      }
    }
  }
}

TEST(Leader, EgoAheadInSameLane)
{
  const Scenario s = straight_road();
  std::vector<Entity> scene{{"ego", {{30.0, 0.0, 0.0}, 8.0}}, {"car", {{0.0, 0.0, 0.0}, 10.0}}};
  const auto leader = select_leader(1, scene, s.map);
  ASSERT_TRUE(leader.has_value());
  EXPECT_EQ(leader->id, "ego");
  EXPECT_NEAR(leader->gap, 30.0 - 4.8, 1e-9);
  EXPECT_DOUBLE_EQ(leader->v_lead, 8.0);
}

TEST(Leader, NoneOnEmptyRoad)
{
  const Scenario s = straight_road();
  std::vector<Entity> scene{{"car", {{0.0, 0.0, 0.0}, 10.0}}};
  EXPECT_FALSE(select_leader(0, scene, s.map).has_value());
}

TEST(Leader, IgnoresOtherLanesAndTrafficBehind)
{
  const Scenario s = straight_road();
  std::vector<Entity> scene{
    {"car", {{0.0, 0.0, 0.0}, 10.0}},
    {"beside", {{10.0, 3.5, 0.0}, 10.0}},
    {"behind", {{-10.0, 0.0, 0.0}, 10.0}},
    {"far", {{150.0, 0.0, 0.0}, 10.0}}};
  EXPECT_FALSE(select_leader(0, scene, s.map).has_value());
}

TEST(Leader, PicksNearestAhead)
{
  const Scenario s = straight_road();
  std::vector<Entity> scene{
    {"car", {{0.0, 0.0, 0.0}, 10.0}}, {"b", {{50.0, 0.0, 0.0}, 3.0}}, {"a", {{20.0, 0.3, 0.0}, 4.0}}};
  const auto leader = select_leader(0, scene, s.map);
  ASSERT_TRUE(leader.has_value());
  EXPECT_EQ(leader->id, "a");
  EXPECT_NEAR(leader->gap, 20.0 - 4.8, 1e-9);
}

TEST(Leader, StopLineArclength)
{
  const Scenario s = straight_road();
  const auto at = stop_line_arclength(s.map.lanes[0], Segment{{100.0, -2.0}, {100.0, 2.0}});
  ASSERT_TRUE(at.has_value());
  EXPECT_NEAR(*at, 150.0, 1e-9);
  EXPECT_FALSE(stop_line_arclength(s.map.lanes[0], Segment{{100.0, 2.0}, {100.0, 5.0}}).has_value());
}

TEST(Leader, RedLightActsAsStoppedLeader)
{
  Scenario s = straight_road();
  s.map.traffic_lights.push_back({Segment{{60.0, -2.0}, {60.0, 2.0}}, {{0.0, 10.0, LightState::red}}});
  VehicleState st;
  st.pose = {0.0, 0.0, 0.0};
  st.vel_lon = 10.0;
  IdmParams p;
  const auto red = red_light_leader(st, 4.8, s.map.lanes[0], s.map, 1.0, p);
  ASSERT_TRUE(red.has_value());
  EXPECT_NEAR(red->gap, 60.0 - 2.4, 1e-9);
  EXPECT_DOUBLE_EQ(red->v_lead, 0.0);
  EXPECT_FALSE(red_light_leader(st, 4.8, s.map.lanes[0], s.map, 12.0, p).has_value());
  // Too close to stop comfortably within the hard braking bound: the light is ignored.
  st.pose.x = 50.0;
  EXPECT_FALSE(red_light_leader(st, 4.8, s.map.lanes[0], s.map, 1.0, p).has_value());
}

TEST(Rollout, NonreactiveReplaysLoggedAgents)
{
  const Scenario s = follower_scene();
  const Trajectory plan = braking_plan(s.ego_log.states[20], 2.0, 40);
  const SceneStates out = rollout(s, plan, 20, 40, RolloutMode::nonreactive, SimParams{});
  ASSERT_EQ(out.agents.size(), 1u);
  for (std::size_t k = 0; k < 40; ++k) EXPECT_EQ(out.agents[0].states[k], s.agents[0].states[20 + k]);
}

TEST(Rollout, LogReplayEgoMatchesLog)
{
  const Scenario s = follower_scene();
  const SceneStates out = rollout(s, Trajectory{}, 10, 50, RolloutMode::log_replay_ego, SimParams{});
  ASSERT_EQ(out.size(), 50u);
  for (std::size_t k = 0; k < 50; ++k) EXPECT_EQ(out.ego[k], s.ego_log.states[10 + k]);
}

TEST(Rollout, FollowerBrakesBehindStoppingEgo)
{
  const Scenario s = follower_scene();
  const SimParams params;
  const std::size_t n = 80;
  const Trajectory plan = braking_plan(s.ego_log.states[20], 3.0, n);
  const SceneStates out = rollout(s, plan, 20, n, RolloutMode::reactive, params);
  ASSERT_EQ(out.size(), n);
  EXPECT_LT(out.ego.back().vel_lon, 0.05);

  // Scripted two-vehicle integration of the follower against the executed ego motion.
  double x = out.agents[0].states[0].pose.x;
  double v = out.agents[0].states[0].vel_lon;
  const IdmParams & p = params.idm;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double gap = out.ego[k].pose.x - x - 4.8;
    const double a = idm_oracle(v, out.ego[k].vel_lon, std::max(gap, 1e-3), p);
    x += v * 0.1;
    v = std::max(0.0, v + a * 0.1);
    const VehicleState & f = out.agents[0].states[k + 1];
    ASSERT_NEAR(f.pose.x, x, 1e-6) << "frame " << k + 1;
    ASSERT_NEAR(f.vel_lon, v, 1e-6) << "frame " << k + 1;
    EXPECT_NEAR(f.pose.y, 0.0, 1e-9);
  }
  EXPECT_LT(out.agents[0].states.back().vel_lon, 10.0);
  EXPECT_GT(min_gap(out, 0), 0.0);
  for (const VehicleState & f : out.agents[0].states) {
    EXPECT_GE(f.accel, -p.b_hard);
    EXPECT_LE(f.accel, p.a_max);
  }
}

TEST(Rollout, HarderEgoBrakingNeverWidensFollowerGap)
{
  const Scenario s = follower_scene();
  double previous = std::numeric_limits<double>::infinity();
  for (double decel : {1.0, 1.5, 2.0, 2.5, 3.0}) {
    const Trajectory plan = braking_plan(s.ego_log.states[20], decel, 80);
    const SceneStates out = rollout(s, plan, 20, 80, RolloutMode::reactive, SimParams{});
    const double gap = min_gap(out, 0);
    EXPECT_LE(gap, previous + 1e-9) << "decel " << decel;
    previous = gap;
  }
}

TEST(Rollout, Deterministic)
{
  const Scenario s = follower_scene();
  const Trajectory plan = braking_plan(s.ego_log.states[20], 2.0, 60);
  const SceneStates a = rollout(s, plan, 20, 60, RolloutMode::reactive, SimParams{});
  const SceneStates b = rollout(s, plan, 20, 60, RolloutMode::reactive, SimParams{});
  EXPECT_TRUE(a == b);
}

TEST(Rollout, RejectsBadArguments)
{
  const Scenario s = follower_scene();
  Trajectory plan = braking_plan(s.ego_log.states[20], 2.0, 40);
  const SimParams params;
  EXPECT_THROW(rollout(s, plan, 20, 0, RolloutMode::reactive, params), Error);
  EXPECT_THROW(rollout(s, plan, 90, 40, RolloutMode::reactive, params), Error);
  EXPECT_THROW(rollout(s, plan, 20, 41, RolloutMode::reactive, params), Error);
  plan.dt = 0.2;
  try {
    rollout(s, plan, 20, 40, RolloutMode::reactive, params);
    FAIL() << "expected a dt mismatch error";
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_argument);
  }
}

}  // namespace
}  // namespace scenesim
