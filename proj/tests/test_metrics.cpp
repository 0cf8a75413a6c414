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
#include "scenesim/metrics.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

namespace scenesim
{
namespace
{

using testing::data_path;
using testing::straight_road;
using testing::straight_states;

SubMetricVector ones() { return SubMetricVector{}; }

double & member(SubMetricVector & s, std::size_t i)
{
  double * fields[] = {&s.nc, &s.dac, &s.ddc, &s.tlc, &s.ep, &s.ttc, &s.lk, &s.hc, &s.ec};
  return *fields[i];
}

SceneStates window(const Scenario & s, std::size_t t_start, std::size_t n)
{
  SceneStates st;
  st.dt = s.dt;
  st.t_start = t_start;
  st.ego.assign(s.ego_log.states.begin() + t_start, s.ego_log.states.begin() + t_start + n);
  for (const AgentTrack & a : s.agents) {
    AgentStates as{a.id, a.length, a.width, a.is_static(), {}};
    as.states.assign(a.states.begin() + t_start, a.states.begin() + t_start + n);
    st.agents.push_back(std::move(as));
  }
  return st;
}

TEST(Aggregate, AllOnesIsOne)
{
  EXPECT_DOUBLE_EQ(aggregate_epdms(ones(), MetricWeights{}), 1.0);
  EXPECT_DOUBLE_EQ(aggregate_epdms(ones(), MetricWeights{1.0, 0.0, 3.0, 0.5, 7.0}), 1.0);
}

TEST(Aggregate, PenaltyAnnihilates)
{
  SubMetricVector s = ones();
  s.dac = 0.0;
  EXPECT_DOUBLE_EQ(aggregate_epdms(s, MetricWeights{}), 0.0);
}

TEST(Aggregate, WeightedMeanExample)
{
  SubMetricVector s = ones();
  s.ep = 0.8;
  s.ec = 0.5;
  EXPECT_NEAR(aggregate_epdms(s, MetricWeights{}), 14.0 / 16.0, 1e-12);
}

TEST(Aggregate, ZeroWeightSumThrows)
{
  EXPECT_THROW(aggregate_epdms(ones(), MetricWeights{0.0, 0.0, 0.0, 0.0, 0.0}), Error);
}

TEST(Aggregate, RangeMonotonicityAndScaleInvariance)
{
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    SubMetricVector s;
    for (std::size_t i = 0; i < 9; ++i) member(s, i) = i < 4 ? (unit(gen) < 0.8 ? 1.0 : 0.0) : unit(gen);
    const MetricWeights w{unit(gen) + 0.01, unit(gen), unit(gen), unit(gen), unit(gen)};
    const double base = aggregate_epdms(s, w);
    ASSERT_GE(base, 0.0);
    ASSERT_LE(base, 1.0);
    const bool penalised = s.nc * s.dac * s.ddc * s.tlc == 0.0;
    if (penalised) {
      EXPECT_EQ(base, 0.0);
    }

    const double c = 0.1 + 10.0 * unit(gen);
    const MetricWeights scaled{w.ep * c, w.ttc * c, w.lk * c, w.hc * c, w.ec * c};
    EXPECT_NEAR(aggregate_epdms(s, scaled), base, 1e-12);

    for (std::size_t i = 4; i < 9; ++i) {
      SubMetricVector up = s;
      member(up, i) = std::min(1.0, member(up, i) + unit(gen));
      EXPECT_GE(aggregate_epdms(up, w), base - 1e-15);
    }
    for (std::size_t i = 0; i < 4; ++i) {
      SubMetricVector up = s;
      member(up, i) = 1.0;
      EXPECT_GE(aggregate_epdms(up, w), base - 1e-15);
    }
  }
}

TEST(Aggregate, TwoStageModes)
{
  EXPECT_DOUBLE_EQ(aggregate_two_stage(0.8, 0.5, TwoStageAggregation::product), 0.4);
  EXPECT_DOUBLE_EQ(aggregate_two_stage(0.8, 0.5, TwoStageAggregation::mean), 0.65);
}

TEST(SubMetricNames, LookupAndRejection)
{
  SubMetricVector s = ones();
  s.ttc = 0.0;
  EXPECT_EQ(submetric_value(s, "ttc"), 0.0);
  EXPECT_TRUE(is_submetric_name("lk"));
  EXPECT_FALSE(is_submetric_name("pdms"));
  EXPECT_THROW(submetric_value(s, "pdms"), Error);
  EXPECT_EQ(submetrics_from_json(submetrics_to_json(s)), s);
}

EgoFootprint square(double x, double y, double theta = 0.0, double speed = 1.0)
{
  return {OrientedBox{{x, y, theta}, 1.0, 1.0}, speed};
}

TEST(Collision, UnitSquareExamples)
{
  std::vector<EgoFootprint> ego{square(0.0, 0.0)};
  std::vector<AgentFootprints> near{{"a", false, {OrientedBox{{0.5, 0.0, 0.0}, 1.0, 1.0}}}};
  const auto hit = check_collision(ego, near);
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->frame, 0u);
  EXPECT_EQ(hit->agent_id, "a");
  std::vector<AgentFootprints> far{{"a", false, {OrientedBox{{2.0, 0.0, 0.0}, 1.0, 1.0}}}};
  EXPECT_FALSE(check_collision(ego, far).has_value());
}

TEST(Collision, FirstFrameAndFaultRule)
{
  std::vector<EgoFootprint> ego;
  for (int k = 0; k < 10; ++k) ego.push_back(square(0.3 * k, 0.0));
  // agent ahead of the ego: the ego runs into it
  AgentFootprints ahead{"ahead", false, {}};
  for (int k = 0; k < 10; ++k) ahead.boxes.push_back(OrientedBox{{2.5, 0.0, 0.0}, 1.0, 1.0});
  const auto hit = check_collision(ego, std::vector<AgentFootprints>{ahead});
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->frame, 5u);
  EXPECT_TRUE(hit->at_fault);

  // struck from behind while moving: not at fault
  AgentFootprints behind{"behind", false, {}};
  for (int k = 0; k < 10; ++k) behind.boxes.push_back(OrientedBox{{0.3 * k - 0.8, 0.0, 0.0}, 1.0, 1.0});
  const auto rear = check_collision(ego, std::vector<AgentFootprints>{behind});
  ASSERT_TRUE(rear.has_value());
  EXPECT_FALSE(rear->at_fault);

  // static obstacles are always the ego's fault
  behind.is_static = true;
  EXPECT_TRUE(check_collision(ego, std::vector<AgentFootprints>{behind})->at_fault);

  // a stopped ego hit head-on is not at fault
  std::vector<EgoFootprint> parked(10, square(0.0, 0.0, 0.0, 0.0));
  AgentFootprints oncoming{"oncoming", false, {}};
  for (int k = 0; k < 10; ++k) oncoming.boxes.push_back(OrientedBox{{3.0 - 0.3 * k, 0.0, kPi}, 1.0, 1.0});
  EXPECT_FALSE(check_collision(parked, std::vector<AgentFootprints>{oncoming})->at_fault);
}

TEST(Collision, FrameCountMismatchThrows)
{
  std::vector<EgoFootprint> ego{square(0.0, 0.0), square(1.0, 0.0)};
  std::vector<AgentFootprints> agents{{"a", false, {OrientedBox{{9.0, 0.0, 0.0}, 1.0, 1.0}}}};
  EXPECT_THROW(check_collision(ego, agents), Error);
}

SceneStates two_vehicle(double ego_v, double lead_x, double lead_v, std::size_t n = 5)
{
  SceneStates st;
  st.dt = 0.1;
  st.ego = straight_states(0.0, 0.0, 0.0, ego_v, n);
  AgentStates lead{"lead", 4.8, 2.0, false, straight_states(lead_x, 0.0, 0.0, lead_v, n)};
  st.agents.push_back(lead);
  return st;
}

TEST(TimeToCollision, StoppedLeaderTwoSeconds)
{
  // 20 m bumper gap at 10 m/s closing speed
  EXPECT_NEAR(time_to_collision(two_vehicle(10.0, 20.0 + 4.8, 0.0, 1), 4.8, 2.0, 3.0), 2.0, 1e-9);
  // the minimum over frames is taken where the gap is smallest
  EXPECT_NEAR(time_to_collision(two_vehicle(10.0, 20.0 + 4.8, 0.0, 5), 4.8, 2.0, 3.0), 1.6, 1e-9);
}

TEST(TimeToCollision, InfiniteCases)
{
  SceneStates empty = two_vehicle(10.0, 30.0, 0.0);
  empty.agents.clear();
  EXPECT_TRUE(std::isinf(time_to_collision(empty, 4.8, 2.0, 3.0)));
  EXPECT_TRUE(std::isinf(time_to_collision(two_vehicle(10.0, 10.0, 15.0), 4.8, 2.0, 3.0)));
  // beyond the projection horizon
  EXPECT_TRUE(std::isinf(time_to_collision(two_vehicle(10.0, 60.0, 0.0), 4.8, 2.0, 3.0)));
}

// Independent per-frame checks for a scene whose vehicles all head along +x.
struct AxisAlignedOracle
{
  double x_min, x_max, y_min, y_max;

  bool inside(const VehicleState & s, double len, double wid) const
  {
    return s.pose.x - len / 2 >= x_min && s.pose.x + len / 2 <= x_max && s.pose.y - wid / 2 >= y_min &&
           s.pose.y + wid / 2 <= y_max;
  }
  static bool overlap(const VehicleState & a, const VehicleState & b, double len, double wid)
  {
    return std::abs(a.pose.x - b.pose.x) <= len && std::abs(a.pose.y - b.pose.y) <= wid;
  }
};

TEST(SubMetrics, BenignLogHasNoPenalties)
{
  const Scenario s = load_scenario(data_path("scenarios/benign_straight.json"));
  const SceneStates st = window(s, 20, 40);
  const VehicleParams vp;
  const MetricContext ctx{std::span<const VehicleState>(s.ego_log.states).subspan(0, 20), std::nullopt};
  const SubMetricVector m = compute_submetrics(st, s, ctx, MetricParams{}, vp);

  const AxisAlignedOracle oracle{-20.0, 400.0, -2.0, 5.5};
  bool dac = true;
  bool nc = true;
  for (std::size_t k = 0; k < st.size(); ++k) {
    ASSERT_NEAR(st.ego[k].pose.theta, 0.0, 1e-12);
    dac = dac && oracle.inside(st.ego[k], vp.length, vp.width);
    for (const AgentStates & a : st.agents) {
      ASSERT_NEAR(a.states[k].pose.theta, 0.0, 1e-12);
      nc = nc && !AxisAlignedOracle::overlap(st.ego[k], a.states[k], vp.length, vp.width);
    }
  }
  ASSERT_TRUE(dac);
  ASSERT_TRUE(nc);
  EXPECT_EQ(m.nc, 1.0);
  EXPECT_EQ(m.dac, 1.0);
  EXPECT_EQ(m.ddc, 1.0);
  EXPECT_EQ(m.tlc, 1.0);
  EXPECT_EQ(m.ep, 1.0);
  EXPECT_EQ(aggregate_epdms(m, MetricWeights{}), 1.0);
  EXPECT_EQ(compute_submetrics(st, s, ctx, MetricParams{}, vp), m);
}

TEST(SubMetrics, HeadOnCollisionAtFrameTen)
{
  Scenario s = straight_road();
  // front bumpers meet 9.6 frames into the window starting at frame 20
  AgentTrack wrong_way;
  wrong_way.id = "wrong_way";
  wrong_way.states = straight_states(64.0, 0.0, kPi, 10.0, s.ego_log.states.size());
  s.agents.push_back(wrong_way);
  const SceneStates st = window(s, 20, 40);
  const auto events = scene_collisions(st, VehicleParams{});
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events.front().frame, 10u);
  EXPECT_TRUE(events.front().at_fault);
  const SubMetricVector m = compute_submetrics(st, s, MetricContext{}, MetricParams{}, VehicleParams{});
  EXPECT_EQ(m.nc, 0.0);
  EXPECT_EQ(m.ttc, 0.0);
  EXPECT_EQ(aggregate_epdms(m, MetricWeights{}), 0.0);
}

TEST(SubMetrics, StationaryEgoMakesNoProgress)
{
  const Scenario s = straight_road();
  SceneStates st = window(s, 20, 40);
  for (VehicleState & e : st.ego) e = s.ego_log.states[20], e.vel_lon = 0.0;
  const SubMetricVector m = compute_submetrics(st, s, MetricContext{}, MetricParams{}, VehicleParams{});
  EXPECT_EQ(m.ep, 0.0);
  EXPECT_EQ(m.nc, 1.0);
}

TEST(SubMetrics, OffRoadAndLaneKeeping)
{
  const Scenario s = straight_road();
  SceneStates st = window(s, 20, 40);
  for (std::size_t k = 20; k < 40; ++k) st.ego[k].pose.y = 4.8;
  SubMetricVector m = compute_submetrics(st, s, MetricContext{}, MetricParams{}, VehicleParams{});
  EXPECT_EQ(m.dac, 0.0);
  // y = 4.8 is still within the second lane margin, so lane keeping still holds
  EXPECT_EQ(m.lk, 1.0);
  for (std::size_t k = 20; k < 40; ++k) st.ego[k].pose.y = -2.5;
  m = compute_submetrics(st, s, MetricContext{}, MetricParams{}, VehicleParams{});
  EXPECT_EQ(m.lk, 0.0);
}

TEST(SubMetrics, RedLightCrossing)
{
  Scenario s = straight_road();
  s.map.traffic_lights.push_back({Segment{{35.0, -2.0}, {35.0, 2.0}}, {{0.0, 100.0, LightState::red}}});
  const SceneStates st = window(s, 20, 40);
  EXPECT_EQ(compute_submetrics(st, s, MetricContext{}, MetricParams{}, VehicleParams{}).tlc, 0.0);
  s.map.traffic_lights.front().phases.front().state = LightState::green;
  EXPECT_EQ(compute_submetrics(st, s, MetricContext{}, MetricParams{}, VehicleParams{}).tlc, 1.0);
}

TEST(SubMetrics, WrongWayBeyondOneSecond)
{
  const Scenario s = straight_road();
  SceneStates st = window(s, 20, 40);
  for (std::size_t k = 5; k < 15; ++k) st.ego[k].pose.theta = kPi;
  EXPECT_EQ(compute_submetrics(st, s, MetricContext{}, MetricParams{}, VehicleParams{}).ddc, 1.0);
  st.ego[15].pose.theta = kPi;
  EXPECT_EQ(compute_submetrics(st, s, MetricContext{}, MetricParams{}, VehicleParams{}).ddc, 0.0);
}

TEST(SubMetrics, ExtendedComfortComparesStages)
{
  const Scenario s = straight_road();
  const SceneStates st = window(s, 20, 40);
  MetricContext ctx;
  ctx.stage1 = ComfortFeatures{0.0, 0.0, 0.0};
  EXPECT_EQ(compute_submetrics(st, s, ctx, MetricParams{}, VehicleParams{}).ec, 1.0);
  // a stage-one peak far above the floor that the second stage does not reproduce
  ctx.stage1 = ComfortFeatures{3.5, 20.0, 0.0};
  EXPECT_EQ(compute_submetrics(st, s, ctx, MetricParams{}, VehicleParams{}).ec, 0.0);
}

TEST(SubMetrics, MisalignedWindowThrows)
{
  const Scenario s = straight_road();
  SceneStates st = window(s, 20, 40);
  st.t_start = 70;
  EXPECT_THROW(compute_submetrics(st, s, MetricContext{}, MetricParams{}, VehicleParams{}), Error);
}

TEST(Comfort, FeaturesFromFiniteDifferences)
{
  std::vector<VehicleState> s(4);
  const double v[] = {10.0, 10.2, 10.6, 10.6};
  for (int k = 0; k < 4; ++k) s[k].vel_lon = v[k];
  const ComfortFeatures f = comfort_features(s, 0.1);
  EXPECT_NEAR(f.max_accel, 4.0, 1e-9);
  EXPECT_NEAR(f.max_jerk, 40.0, 1e-9);
  EXPECT_FALSE(comfortable(s, 0.1, MetricParams{}));
}

TEST(Report, CarriesScoresAndStages)
{
  RewardRecord r;
  r.submetrics.ep = 0.5;
  r.epdms = 0.84375;
  r.stage_scores = std::array<double, 2>{0.9, 0.8};
  const auto j = metric_report("abc", r);
  EXPECT_EQ(j.at("scenario_id"), "abc");
  EXPECT_DOUBLE_EQ(j.at("epdms").get<double>(), 0.84375);
  EXPECT_DOUBLE_EQ(j.at("submetrics").at("ep").get<double>(), 0.5);
  EXPECT_EQ(j.at("stage_scores").size(), 2u);
}

}  // namespace
}  // namespace scenesim
