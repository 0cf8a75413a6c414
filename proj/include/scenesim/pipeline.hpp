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

#ifndef SCENESIM__PIPELINE_HPP_
#define SCENESIM__PIPELINE_HPP_

#include "scenesim/config.hpp"
#include "scenesim/expert.hpp"
#include "scenesim/metrics.hpp"
#include "scenesim/reactive_sim.hpp"
#include "scenesim/vocab.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scenesim
{

struct SensorPoseTrack
{
  std::vector<std::string> camera_ids;
  std::vector<std::vector<Pose2D>> poses;  // [camera][frame]
  std::vector<nlohmann::json> intrinsics;
};

/// Camera poses from the ego poses and each camera's fixed extrinsic.
SensorPoseTrack sensor_stub(const SceneStates & states, const std::vector<CameraSpec> & rig);

struct SimSample
{
  std::string scenario_id;
  int round{0};
  ExpertKind expert_kind{ExpertKind::recovery};
  std::size_t candidate{0};
  std::uint64_t seed{0};
  std::array<double, 3> offsets{0.0, 0.0, 0.0};  // lon, lat, dtheta of the perturbation
  Trajectory history;                              // executed first stage
  Trajectory expert_future;                        // executed second stage, starts where history ends
  SceneStates states;                              // both stages, junction frame once
  RewardRecord reward;
  double two_stage_score{0.0};
  SensorPoseTrack sensors;
};

/// Reject reasons tracked per round.
inline constexpr std::array<const char *, 4> kRejectReasons = {"collision", "offroad", "reward", "kinematics"};

struct RoundStats
{
  int round{0};
  std::size_t attempted{0};
  std::size_t accepted{0};
  std::size_t cumulative_accepted{0};
  std::map<std::string, std::size_t> rejects;
};

/// Immutable inputs shared by every sample of a run.
struct GenerationInputs
{
  GenerationInputs(Vocabulary perturbation, Vocabulary recovery);

  Vocabulary perturbation;
  Vocabulary recovery;
  MatchingIndex recovery_index;
};

/// Builds both vocabularies from the config's vocab section.
GenerationInputs make_generation_inputs(const PipelineConfig & config);
/// Uses a given perturbation vocabulary; the recovery set is rebuilt from the config.
GenerationInputs make_generation_inputs(const PipelineConfig & config, Vocabulary perturbation);

struct SampleOutcome
{
  std::optional<SimSample> sample;
  std::string reject_reason;  // one of kRejectReasons when sample is empty
  std::string detail;
};

/// Per-sample seed: splitmix64 chain over (master seed, FNV-1a of the id, round, candidate).
std::uint64_t sample_seed(std::uint64_t master, const std::string & scenario_id, int round, std::size_t candidate);

/// Two simulations of the horizon from a cleared candidate.
SampleOutcome simulate_sample(
  const Scenario & scenario, const PerturbationCandidate & cand, ExpertKind kind, const PipelineConfig & config,
  const GenerationInputs & inputs, int round = 0);

/// Candidate funnel of one scenario.
struct CandidateFunnel
{
  std::size_t enumerated{0};
  std::size_t threshold_rejected{0};
  std::size_t infeasible_nonreactive{0};
  std::size_t grid_dropped{0};
  std::size_t infeasible_reactive{0};
  std::size_t accepted{0};
};

/// Threshold, non-reactive filter, grid sparsification and (in reactive mode) the
/// reactive filter. Returns all candidates with their final status.
std::vector<PerturbationCandidate> select_perturbations(
  const Scenario & scenario, const Vocabulary & vocab, const PipelineConfig & config, CandidateFunnel * funnel = nullptr);

struct GenerationResult
{
  std::vector<SimSample> samples;
  std::vector<RoundStats> stats;
  CandidateFunnel funnel;
  std::vector<std::string> corpus_ids;
};

/// The whole generation run; deterministic in (corpus, config), independent of workers.
GenerationResult run_generation(
  const std::vector<Scenario> & corpus, const PipelineConfig & config, const GenerationInputs & inputs);

nlohmann::json sample_to_json(const SimSample & s);
std::string stats_csv(const std::vector<RoundStats> & stats, ExpertKind kind);
nlohmann::json manifest_json(const GenerationResult & result, const PipelineConfig & config);

/// Writes dataset.jsonl, stats.csv and manifest.json into `dir`. Throws Error(validation)
/// when a sample breaks the export safety guarantee.
void export_dataset(const GenerationResult & result, const PipelineConfig & config, const std::filesystem::path & dir);

struct RecordCheck
{
  bool ok{false};
  std::string message;
  SubMetricVector recomputed;
};

/// Re-scores one exported record against its scenario and checks the safety guarantee.
RecordCheck verify_sample_record(const nlohmann::json & record, const Scenario & scenario, const PipelineConfig & config);

/// Summary statistics of a dataset.jsonl; `corpus` enables re-verification of every record.
nlohmann::json dataset_stats(
  const std::filesystem::path & jsonl, const std::vector<Scenario> * corpus = nullptr,
  const PipelineConfig & config = {});

}  // namespace scenesim

#endif  // SCENESIM__PIPELINE_HPP_
