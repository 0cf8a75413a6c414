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

#ifndef SCENESIM__VOCAB_HPP_
#define SCENESIM__VOCAB_HPP_

#include "scenesim/metrics.hpp"
#include "scenesim/reactive_sim.hpp"
#include "scenesim/scenario.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scenesim
{

enum class VocabProvenance { clustered, raw_human };

const char * to_string(VocabProvenance p);

/// Ego-local trajectories of one common length and dt.
struct Vocabulary
{
  std::vector<Trajectory> entries;
  VocabProvenance provenance{VocabProvenance::clustered};

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  std::size_t horizon() const { return entries.empty() ? 0 : entries.front().size(); }
};

/// Synthetic stand-in for recorded human maneuvers.
struct ManeuverConfig
{
  std::size_t count{16384};
  int horizon{40};
  double dt{0.1};
  double v_max{15.0};
  double accel_min{-3.0};
  double accel_max{2.0};
  double jerk_max{4.0};
  double lat_accel_max{2.5};
};

/// Straight, arc and lane-change maneuvers with jerk-limited speed profiles,
/// integrated with the bicycle model. Deterministic in (config, seed).
std::vector<Trajectory> synthesize_maneuvers(
  const ManeuverConfig & config, std::uint64_t seed, const VehicleParams & vehicle = {});

/// k-means feature: x, y and unrolled heading of every `stride`-th state, ending at the last.
std::vector<double> trajectory_features(const Trajectory & t, int stride = 5);

/// Seeded k-means++ and Lloyd iterations (at most 100) over trajectory features; each
/// center is replaced by its nearest not-yet-used sample. Entries keep sample order.
Vocabulary build_vocabulary(std::span<const Trajectory> samples, std::size_t k, std::uint64_t seed);

void save_vocabulary(const Vocabulary & v, const std::filesystem::path & path);
Vocabulary load_vocabulary(
  const std::filesystem::path & path, VocabProvenance provenance = VocabProvenance::clustered);
nlohmann::json vocabulary_to_json(const Vocabulary & v);
Vocabulary vocabulary_from_json(const nlohmann::json & j, VocabProvenance provenance);

struct PerturbThresholds
{
  double r_lon{20.0};
  double r_lat{2.0};
  double dtheta_max{deg2rad(20.0)};
  double epdms_min{0.8};
  // the entry's start speed must be this close to the ego speed at placement
  double speed_tolerance{2.0};
};

struct GridSpec
{
  double step_lon{5.0};
  double step_lat{0.5};
  bool interleave{true};
};

enum class CandidateStatus {
  pending,
  threshold_rejected,
  grid_dropped,
  infeasible_nonreactive,
  infeasible_reactive,
  accepted
};

const char * to_string(CandidateStatus s);

struct PerturbationCandidate
{
  std::size_t index{0};  // vocabulary entry
  Trajectory trajectory;  // placed in the scenario frame
  std::array<int, 2> cell{0, 0};
  double lon{0.0};
  double lat{0.0};
  double dtheta{0.0};
  CandidateStatus status{CandidateStatus::pending};
  std::string reason;
  bool nonreactive_cleared{false};
  std::optional<RewardRecord> reward;
};

/// Places every entry at the ego state of frame t_history and measures its endpoint
/// against the logged ego at frame t_history + H - 1.
std::vector<PerturbationCandidate> enumerate_perturbations(
  const Scenario & scenario, const Vocabulary & vocab, const PerturbThresholds & th);

/// Endpoint cell of an offset pair.
std::array<int, 2> grid_cell(double lon, double lat, const GridSpec & g);

/// Keeps one pending candidate per endpoint cell: the member with the smallest rank
/// hashed from (seed, key, cell, entry index). The rest become grid_dropped.
std::vector<PerturbationCandidate> grid_sparsify(
  std::vector<PerturbationCandidate> cands, const GridSpec & g, std::uint64_t seed,
  const std::string & key = {});

enum class FeasibilityMode { nonreactive, reactive };

/// Rolls the candidate out over the first simulation window and scores it.
/// Nonreactive success sets nonreactive_cleared; reactive success marks it accepted.
PerturbationCandidate feasibility_filter(
  PerturbationCandidate cand, const Scenario & scenario, FeasibilityMode mode, double epdms_min,
  const SimParams & sim = {}, const MetricParams & metric = {});

}  // namespace scenesim

#endif  // SCENESIM__VOCAB_HPP_
