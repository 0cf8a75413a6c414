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


#include "scenesim/scenesim.h"

#include "scenesim/config.hpp"
#include "scenesim/error.hpp"
#include "scenesim/metrics.hpp"
#include "scenesim/pipeline.hpp"
#include "scenesim/scaling.hpp"
#include "scenesim/synthetic.hpp"
#include "scenesim/vocab.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <utility>
#include <vector>

struct ssim_config
{
  scenesim::PipelineConfig value;
};

struct ssim_corpus
{
  std::vector<scenesim::Scenario> scenarios;
};

struct ssim_vocab
{
  scenesim::Vocabulary value;
};

struct ssim_run
{
  scenesim::PipelineConfig config;
  scenesim::GenerationResult result;
};

namespace
{

thread_local std::string g_last_error;

ssim_status status_of(scenesim::ErrorKind kind)
{
  switch (kind) {
    case scenesim::ErrorKind::invalid_argument: return SSIM_INVALID_ARGUMENT;
    case scenesim::ErrorKind::parse: return SSIM_PARSE_ERROR;
    case scenesim::ErrorKind::schema: return SSIM_SCHEMA_ERROR;
    case scenesim::ErrorKind::validation: return SSIM_VALIDATION_ERROR;
    case scenesim::ErrorKind::io: return SSIM_IO_ERROR;
    case scenesim::ErrorKind::numeric: return SSIM_NUMERIC_ERROR;
    case scenesim::ErrorKind::runtime: return SSIM_RUNTIME_ERROR;
  }
  return SSIM_RUNTIME_ERROR;
}

// Runs `fn`, translating exceptions into a status and the thread's last error.
template <typename Fn>
ssim_status guarded(Fn && fn)
{
  try {
    fn();
    g_last_error.clear();
    return SSIM_OK;
  } catch (const scenesim::Error & e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::parse_error & e) {
    g_last_error = e.what();
    return SSIM_PARSE_ERROR;
  } catch (const nlohmann::json::exception & e) {
    g_last_error = e.what();
    return SSIM_SCHEMA_ERROR;
  } catch (const std::filesystem::filesystem_error & e) {
    g_last_error = e.what();
    return SSIM_IO_ERROR;
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
    return SSIM_RUNTIME_ERROR;
  } catch (const std::exception & e) {
    g_last_error = e.what();
    return SSIM_RUNTIME_ERROR;
  }
}

void require(bool ok, const char * what)
{
  if (!ok) throw scenesim::Error(scenesim::ErrorKind::invalid_argument, what);
}

char * dup_string(const std::string & s)
{
  char * out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const scenesim::PipelineConfig & config_or_default(const ssim_config * config)
{
  static const scenesim::PipelineConfig defaults;
  return config ? config->value : defaults;
}

}  // namespace

extern "C" {

const char * ssim_last_error(void) { return g_last_error.c_str(); }

const char * ssim_status_name(ssim_status status)
{
  switch (status) {
    case SSIM_OK: return "ok";
    case SSIM_INVALID_ARGUMENT: return "invalid_argument";
    case SSIM_PARSE_ERROR: return "parse_error";
    case SSIM_SCHEMA_ERROR: return "schema_error";
    case SSIM_VALIDATION_ERROR: return "validation_error";
    case SSIM_IO_ERROR: return "io_error";
    case SSIM_NUMERIC_ERROR: return "numeric_error";
    case SSIM_RUNTIME_ERROR: return "runtime_error";
  }
  return "unknown";
}

const char * ssim_version(void) { return SCENESIM_VERSION; }

void ssim_string_free(char * s) { delete[] s; }

ssim_status ssim_config_create(ssim_config ** out)
{
  return guarded([&] {
    require(out, "ssim_config_create: null output");
    *out = new ssim_config{};
  });
}

ssim_status ssim_config_load(const char * path, ssim_config ** out)
{
  return guarded([&] {
    require(path && out, "ssim_config_load: null argument");
    *out = new ssim_config{scenesim::load_config(path)};
  });
}

ssim_status ssim_config_from_json(const char * json, ssim_config ** out)
{
  return guarded([&] {
    require(json && out, "ssim_config_from_json: null argument");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error & e) {
      throw scenesim::Error(scenesim::ErrorKind::parse, std::string("config: ") + e.what());
    }
    *out = new ssim_config{scenesim::config_from_json(j)};
  });
}

ssim_status ssim_config_patch(ssim_config * config, const char * json)
{
  return guarded([&] {
    require(config && json, "ssim_config_patch: null argument");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error & e) {
      throw scenesim::Error(scenesim::ErrorKind::parse, std::string("config patch: ") + e.what());
    }
    scenesim::PipelineConfig patched = scenesim::config_patch(config->value, j);
    scenesim::validate_config(patched);
    config->value = std::move(patched);
  });
}

ssim_status ssim_config_to_json(const ssim_config * config, char ** out)
{
  return guarded([&] {
    require(config && out, "ssim_config_to_json: null argument");
    *out = dup_string(scenesim::config_to_json(config->value).dump(2));
  });
}

ssim_status ssim_config_hash(const ssim_config * config, char ** out)
{
  return guarded([&] {
    require(config && out, "ssim_config_hash: null argument");
    *out = dup_string(scenesim::config_hash_hex(config->value));
  });
}

void ssim_config_free(ssim_config * config) { delete config; }

ssim_status ssim_corpus_synthesize(const char * corpus_config_json, int count, uint64_t seed, ssim_corpus ** out)
{
  return guarded([&] {
    require(out, "ssim_corpus_synthesize: null output");
    scenesim::CorpusConfig cc;
    if (corpus_config_json) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(corpus_config_json);
      } catch (const nlohmann::json::parse_error & e) {
        throw scenesim::Error(scenesim::ErrorKind::parse, std::string("corpus config: ") + e.what());
      }
      cc = scenesim::corpus_config_from_json(j);
    }
    if (count >= 0) cc.counts = scenesim::CorpusConfig::with_total(count).counts;
    auto corpus = std::make_unique<ssim_corpus>();
    corpus->scenarios = scenesim::generate_synthetic_corpus(cc, seed);
    *out = corpus.release();
  });
}

ssim_status ssim_corpus_load_dir(const char * dir, ssim_corpus ** out)
{
  return guarded([&] {
    require(dir && out, "ssim_corpus_load_dir: null argument");
    const std::filesystem::path root(dir);
    if (!std::filesystem::is_directory(root)) {
      throw scenesim::Error(scenesim::ErrorKind::io, "corpus directory not found: " + root.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto & e : std::filesystem::directory_iterator(root)) {
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    auto corpus = std::make_unique<ssim_corpus>();
    for (const auto & f : files) corpus->scenarios.push_back(scenesim::load_scenario(f));
    *out = corpus.release();
  });
}

ssim_status ssim_corpus_write_dir(const ssim_corpus * corpus, const char * dir)
{
  return guarded([&] {
    require(corpus && dir, "ssim_corpus_write_dir: null argument");
    const std::filesystem::path root(dir);
    std::filesystem::create_directories(root);
    for (const auto & s : corpus->scenarios) scenesim::write_scenario(s, root / (s.id + ".json"));
  });
}

size_t ssim_corpus_size(const ssim_corpus * corpus) { return corpus ? corpus->scenarios.size() : 0; }

void ssim_corpus_free(ssim_corpus * corpus) { delete corpus; }

ssim_status ssim_vocab_build(const ssim_config * config, size_t k, uint64_t seed, ssim_vocab ** out)
{
  return guarded([&] {
    require(out, "ssim_vocab_build: null output");
    const scenesim::PipelineConfig & c = config_or_default(config);
    const auto raw = scenesim::synthesize_maneuvers(c.vocab.maneuvers, c.vocab.seed, c.sim.vehicle);
    *out = new ssim_vocab{scenesim::build_vocabulary(raw, k == 0 ? c.vocab.k : k, seed)};
  });
}

ssim_status ssim_vocab_load(const char * path, ssim_vocab ** out)
{
  return guarded([&] {
    require(path && out, "ssim_vocab_load: null argument");
    *out = new ssim_vocab{scenesim::load_vocabulary(path)};
  });
}

ssim_status ssim_vocab_save(const ssim_vocab * vocab, const char * path)
{
  return guarded([&] {
    require(vocab && path, "ssim_vocab_save: null argument");
    scenesim::save_vocabulary(vocab->value, path);
  });
}

size_t ssim_vocab_size(const ssim_vocab * vocab) { return vocab ? vocab->value.size() : 0; }

void ssim_vocab_free(ssim_vocab * vocab) { delete vocab; }

ssim_status ssim_generate(
  const ssim_corpus * corpus, const ssim_vocab * vocab, const ssim_config * config, ssim_run ** out)
{
  return guarded([&] {
    require(corpus && out, "ssim_generate: null argument");
    const scenesim::PipelineConfig & c = config_or_default(config);
    const scenesim::GenerationInputs inputs =
      vocab ? scenesim::make_generation_inputs(c, vocab->value) : scenesim::make_generation_inputs(c);
    auto run = std::make_unique<ssim_run>();
    run->config = c;
    run->result = scenesim::run_generation(corpus->scenarios, c, inputs);
    *out = run.release();
  });
}

ssim_status ssim_run_export(const ssim_run * run, const char * dir)
{
  return guarded([&] {
    require(run && dir, "ssim_run_export: null argument");
    scenesim::export_dataset(run->result, run->config, dir);
  });
}

size_t ssim_run_sample_count(const ssim_run * run) { return run ? run->result.samples.size() : 0; }

ssim_status ssim_run_stats_csv(const ssim_run * run, char ** out)
{
  return guarded([&] {
    require(run && out, "ssim_run_stats_csv: null argument");
    *out = dup_string(scenesim::stats_csv(run->result.stats, run->config.expert));
  });
}

ssim_status ssim_run_manifest(const ssim_run * run, char ** out)
{
  return guarded([&] {
    require(run && out, "ssim_run_manifest: null argument");
    *out = dup_string(scenesim::manifest_json(run->result, run->config).dump(2));
  });
}

void ssim_run_free(ssim_run * run) { delete run; }

ssim_status ssim_eval_trajectory(
  const char * scenario_path, const char * trajectory_path, const char * mode, size_t start_frame,
  const ssim_config * config, char ** report_json)
{
  return guarded([&] {
    require(scenario_path && trajectory_path && mode && report_json, "ssim_eval_trajectory: null argument");
    const scenesim::PipelineConfig & c = config_or_default(config);
    const std::string m(mode);
    scenesim::RolloutMode rollout_mode;
    if (m == "reactive") {
      rollout_mode = scenesim::RolloutMode::reactive;
    } else if (m == "non-reactive" || m == "nonreactive") {
      rollout_mode = scenesim::RolloutMode::nonreactive;
    } else {
      throw scenesim::Error(scenesim::ErrorKind::invalid_argument, "unknown rollout mode: " + m);
    }
    const scenesim::Scenario sc = scenesim::load_scenario(scenario_path, c.sim.vehicle);
    scenesim::Trajectory traj = scenesim::load_trajectory(trajectory_path);
    if (std::abs(traj.dt - sc.dt) > 1e-9) {
      throw scenesim::Error(
        scenesim::ErrorKind::invalid_argument, "trajectory dt " + std::to_string(traj.dt) +
                                                 " does not match scenario dt " + std::to_string(sc.dt));
    }
    if (start_frame == SSIM_START_AT_HISTORY) start_frame = static_cast<std::size_t>(sc.t_history);
    if (start_frame >= sc.frame_count()) {
      throw scenesim::Error(scenesim::ErrorKind::invalid_argument, "start frame beyond the scenario");
    }
    if (traj.size() < 2) throw scenesim::Error(scenesim::ErrorKind::invalid_argument, "trajectory needs 2 states");
    if (traj.frame == scenesim::TrajectoryFrame::ego_local) {
      traj = scenesim::place_at(traj, sc.ego_log.states[start_frame].pose);
    }
    const std::size_t horizon = std::min(traj.size(), sc.frame_count() - start_frame);
    const scenesim::SceneStates states =
      scenesim::rollout(sc, traj, start_frame, horizon, rollout_mode, c.sim);
    const std::span<const scenesim::VehicleState> history(sc.ego_log.states.data(), start_frame);
    scenesim::RewardRecord r;
    r.submetrics = scenesim::compute_submetrics(states, sc, {history, std::nullopt}, c.metrics, c.sim.vehicle);
    r.epdms = scenesim::aggregate_epdms(r.submetrics, c.metrics.weights);
    *report_json = dup_string(scenesim::metric_report(sc.id, r).dump(2));
  });
}

ssim_status ssim_fit_log_quadratic(const double * n, const double * s, size_t count, ssim_fit * out)
{
  return guarded([&] {
    require(n && s && out, "ssim_fit_log_quadratic: null argument");
    std::vector<scenesim::ScalingPoint> pts(count);
    for (size_t i = 0; i < count; ++i) pts[i] = {n[i], s[i]};
    const scenesim::FitResult f = scenesim::fit_log_quadratic(pts);
    *out = ssim_fit{f.a, f.b, f.c, f.residual_std, f.saturation_n ? 1 : 0, f.saturation_n.value_or(0.0)};
  });
}

ssim_status ssim_scaling_report(
  const char * const * labels, const char * const * csv_paths, size_t count, const char * out_dir,
  char ** report_json)
{
  return guarded([&] {
    require(labels && csv_paths && out_dir && report_json, "ssim_scaling_report: null argument");
    require(count > 0, "ssim_scaling_report: no inputs");
    std::map<std::string, std::vector<scenesim::ScalingPoint>> runs;
    for (size_t i = 0; i < count; ++i) {
      require(labels[i] && csv_paths[i], "ssim_scaling_report: null label or path");
      if (!runs.emplace(labels[i], scenesim::read_scaling_csv(csv_paths[i])).second) {
        throw scenesim::Error(scenesim::ErrorKind::invalid_argument, std::string("duplicate label: ") + labels[i]);
      }
    }
    const auto report = scenesim::compare_fits(runs);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    for (const auto & r : report) {
      const auto rows = scenesim::emit_curve(r.fit, r.fit.n_min, r.fit.n_max, 64);
      std::ofstream f(dir / ("curve_" + r.label + ".csv"), std::ios::binary);
      f << scenesim::curve_csv(rows);
      if (!f) throw scenesim::Error(scenesim::ErrorKind::io, "cannot write curve for " + r.label);
    }
    const nlohmann::json j = scenesim::comparison_report(report);
    scenesim::write_json_file(j, dir / "report.json", 2);
    *report_json = dup_string(j.dump(2));
  });
}

ssim_status ssim_dataset_stats(
  const char * jsonl_path, const ssim_corpus * corpus, const ssim_config * config, char ** out)
{
  return guarded([&] {
    require(jsonl_path && out, "ssim_dataset_stats: null argument");
    const nlohmann::json j =
      scenesim::dataset_stats(jsonl_path, corpus ? &corpus->scenarios : nullptr, config_or_default(config));
    *out = dup_string(j.dump(2));
  });
}

}  // extern "C"
