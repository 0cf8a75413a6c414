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

#ifndef SCENESIM__CONFIG_HPP_
#define SCENESIM__CONFIG_HPP_

#include "scenesim/expert.hpp"
#include "scenesim/metrics.hpp"
#include "scenesim/reactive_sim.hpp"
#include "scenesim/vocab.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scenesim
{

enum class ExpertKind { recovery, planner };

const char * to_string(ExpertKind k);
std::optional<ExpertKind> parse_expert_kind(std::string_view s);

/// Fixed ego-to-camera transform; intrinsics are carried through untouched.
struct CameraSpec
{
  std::string id;
  Pose2D extrinsic;
  double height{1.5};
  nlohmann::json intrinsics = nlohmann::json::object();
};

std::vector<CameraSpec> default_camera_rig();

/// How the perturbation vocabulary and the recovery maneuver set are built.
struct VocabSpec
{
  ManeuverConfig maneuvers;
  std::size_t k{1024};
  std::uint64_t seed{1};
};

struct PipelineConfig
{
  std::uint64_t master_seed{1};
  int rounds{5};
  int per_round{0};  // 0: ceil(cleared / 5)
  ExpertKind expert{ExpertKind::recovery};
  bool reactive{true};
  int workers{1};  // scheduling only; excluded from the hash

  PerturbThresholds thresholds;
  GridSpec grid;
  SimParams sim;
  MetricParams metrics;
  PlannerParams planner;
  ExpertFilterSpec expert_filter;
  MatchingScale matching_scale{kUnitScale};
  VocabSpec vocab;
  std::vector<CameraSpec> cameras{default_camera_rig()};
};

nlohmann::json config_to_json(const PipelineConfig & c);
/// Applies the keys present in `patch` on top of `base`. Unknown keys and wrong
/// types are schema errors naming the field path.
PipelineConfig config_patch(const PipelineConfig & base, const nlohmann::json & patch);
PipelineConfig config_from_json(const nlohmann::json & j);
PipelineConfig load_config(const std::filesystem::path & path);

/// Range checks of every field; throws Error(validation) naming the field.
void validate_config(const PipelineConfig & c);

/// FNV-1a 64 over the canonical (key-sorted, compact) serialization without `workers`.
std::uint64_t config_hash(const PipelineConfig & c);
std::string config_hash_hex(const PipelineConfig & c);

}  // namespace scenesim

#endif  // SCENESIM__CONFIG_HPP_
