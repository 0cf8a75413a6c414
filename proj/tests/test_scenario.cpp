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
#include "scenesim/scenario.hpp"
#include "scenesim/synthetic.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>

namespace scenesim
{
namespace
{

using testing::data_path;
using testing::scratch_dir;

void write_text(const std::filesystem::path & p, const std::string & text)
{
  std::ofstream f(p, std::ios::binary);
  f << text;
}

// Error kind and message of loading `j` from a file.
std::pair<ErrorKind, std::string> load_error(const nlohmann::json & j, const std::string & name)
{
  const auto path = scratch_dir("scenario_" + name) / "s.json";
  write_json_file(j, path);
  try {
    load_scenario(path);
  } catch (const Error & e) {
    return {e.kind(), e.what()};
  }
  ADD_FAILURE() << "load succeeded";
  return {ErrorKind::runtime, ""};
}

TEST(Scenario, LoadsMinimalStraightFile)
{
  const Scenario s = load_scenario(data_path("scenarios/minimal_straight.json"));
  EXPECT_EQ(s.map.lanes.size(), 1u);
  EXPECT_TRUE(s.agents.empty());
  EXPECT_EQ(s.ego_log.size(), 60u);
  EXPECT_EQ(s.ego_log.size(), static_cast<std::size_t>(s.t_history + 2 * s.t_horizon));
}

TEST(Scenario, EgoLogLengthMismatchIsValidationError)
{
  nlohmann::json j = read_json_file(data_path("scenarios/minimal_straight.json"));
  j["ego_log"].erase(j["ego_log"].size() - 1);
  const auto [kind, msg] = load_error(j, "length");
  EXPECT_EQ(kind, ErrorKind::validation);
  EXPECT_NE(msg.find("ego_log length"), std::string::npos) << msg;
}

TEST(Scenario, LeavingDrivableAreaNamesTheFrame)
{
  nlohmann::json j = read_json_file(data_path("scenarios/minimal_straight.json"));
  // The road is 4 m wide; shifting the ego sideways from frame 12 on leaves it.
  for (std::size_t k = 12; k < j["ego_log"].size(); ++k) j["ego_log"][k]["y"] = 3.0;
  const auto [kind, msg] = load_error(j, "offroad");
  EXPECT_EQ(kind, ErrorKind::validation);
  EXPECT_NE(msg.find("ego footprint leaves the drivable area at frame 12"), std::string::npos) << msg;
}

TEST(Scenario, MalformedJsonIsParseError)
{
  const auto path = scratch_dir("scenario_parse") / "s.json";
  write_text(path, "{\"id\": \"x\", ");
  try {
    load_scenario(path);
    FAIL() << "expected a parse error";
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
  }
}

TEST(Scenario, MissingAndUnknownFieldsAreSchemaErrors)
{
  nlohmann::json j = read_json_file(data_path("scenarios/minimal_straight.json"));
  nlohmann::json missing = j;
  missing.erase("t_horizon");
  auto [kind, msg] = load_error(missing, "missing");
  EXPECT_EQ(kind, ErrorKind::schema);
  EXPECT_NE(msg.find("t_horizon"), std::string::npos) << msg;

  nlohmann::json unknown = j;
  unknown["map"]["speed_limit"] = 13.0;
  std::tie(kind, msg) = load_error(unknown, "unknown");
  EXPECT_EQ(kind, ErrorKind::schema);
  EXPECT_NE(msg.find("speed_limit"), std::string::npos) << msg;
}

TEST(Scenario, ValidScenarioHasNoDiagnostics)
{
  EXPECT_TRUE(validate_scenario(testing::straight_road()).empty());
  EXPECT_TRUE(validate_scenario(load_scenario(data_path("scenarios/benign_straight.json"))).empty());
}

TEST(Scenario, OverlappingLightPhasesNameTheLight)
{
  Scenario s = testing::straight_road();
  TrafficLight tl;
  tl.stop_line = {{100.0, -1.75}, {100.0, 1.75}};
  tl.phases = {{0.0, 5.0, LightState::green}, {4.0, 9.0, LightState::red}};
  s.map.traffic_lights.push_back(tl);
  const auto diags = validate_scenario(s);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].invariant, "phases non-overlapping");
  EXPECT_EQ(diags[0].location, "map.traffic_lights[0]");
}

TEST(Scenario, AgentTrackLengthMismatchNamesTheAgent)
{
  Scenario s = testing::straight_road();
  s.agents.push_back(testing::agent_track("truck_7", 40.0, 3.5, 8.0, s.frame_count() - 3));
  const auto diags = validate_scenario(s);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].invariant, "agent track length");
  EXPECT_NE(diags[0].message.find("truck_7"), std::string::npos);
}

TEST(Scenario, SynthesizedScenariosRoundTripThroughFiles)
{
  const auto corpus = generate_synthetic_corpus(CorpusConfig::with_total(10), 3);
  const auto dir = scratch_dir("scenario_roundtrip");
  for (const Scenario & s : corpus) {
    const auto path = dir / (s.id + ".json");
    write_scenario(s, path);
    const Scenario back = load_scenario(path);
    EXPECT_TRUE(back == s) << s.id;
  }
}

TEST(Scenario, TrajectoryPlacementInvertsLocalization)
{
  Trajectory g;
  g.states = testing::straight_states(5.0, -3.0, 0.9, 7.0, 10);
  const Trajectory local = to_ego_local(g);
  EXPECT_EQ(local.frame, TrajectoryFrame::ego_local);
  EXPECT_NEAR(local.states.back().pose.x, 7.0 * 0.9, 1e-12);
  EXPECT_NEAR(local.states.back().pose.y, 0.0, 1e-12);
  const Trajectory back = place_at(local, g.front().pose);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_NEAR(back.states[k].pose.x, g.states[k].pose.x, 1e-12);
    EXPECT_NEAR(back.states[k].pose.y, g.states[k].pose.y, 1e-12);
  }
}

}  // namespace
}  // namespace scenesim
