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

#ifndef SCENESIM__SYNTHETIC_HPP_
#define SCENESIM__SYNTHETIC_HPP_

#include "scenesim/reactive_sim.hpp"
#include "scenesim/scenario.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace scenesim
{

enum class ScenarioTemplate { straight, curve, intersection, lead_vehicle, cut_in };

inline constexpr std::array<ScenarioTemplate, 5> kScenarioTemplates = {
  ScenarioTemplate::straight, ScenarioTemplate::curve, ScenarioTemplate::intersection,
  ScenarioTemplate::lead_vehicle, ScenarioTemplate::cut_in};

const char * to_string(ScenarioTemplate t);
std::optional<ScenarioTemplate> parse_template(std::string_view name);

struct CorpusConfig
{
  // scenarios per template, in kScenarioTemplates order
  std::array<int, 5> counts{20, 20, 20, 20, 20};
  int t_history{20};
  int t_horizon{40};
  double dt{0.1};
  double lane_width{3.5};
  double road_buffer{0.25};

  /// Spreads `total` scenarios over the templates round-robin.
  static CorpusConfig with_total(int total);
  int total() const;
};

nlohmann::json corpus_config_to_json(const CorpusConfig & c);
/// Strict parse; missing keys keep their defaults, unknown keys are schema errors.
CorpusConfig corpus_config_from_json(const nlohmann::json & j);

/// One scenario of the given template. Deterministic in (template, index, seed, config).
Scenario synthesize_scenario(
  ScenarioTemplate kind, int index, std::uint64_t seed, const CorpusConfig & config,
  const SimParams & params = {});

/// All scenarios of the config, template by template. Throws Error(invalid_argument)
/// on negative counts, nonpositive frame counts or dt.
std::vector<Scenario> generate_synthetic_corpus(
  const CorpusConfig & config, std::uint64_t seed, const SimParams & params = {});

}  // namespace scenesim

#endif  // SCENESIM__SYNTHETIC_HPP_
