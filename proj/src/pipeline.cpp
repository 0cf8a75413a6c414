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

#include "scenesim/pipeline.hpp"

#include "scenesim/error.hpp"
#include "scenesim/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#ifndef SCENESIM_VERSION
#define SCENESIM_VERSION "0.0.0"
#endif

namespace scenesim
{

using nlohmann::json;

SensorPoseTrack sensor_stub(const SceneStates & states, const std::vector<CameraSpec> & rig)
{
  if (rig.empty()) throw Error(ErrorKind::invalid_argument, "sensor_stub: empty camera rig");
  SensorPoseTrack track;
  for (const CameraSpec & cam : rig) {
    track.camera_ids.push_back(cam.id);
    track.intrinsics.push_back(cam.intrinsics);
    std::vector<Pose2D> poses;
    poses.reserve(states.size());
    for (const VehicleState & e : states.ego) {
      Pose2D p = to_global(e.pose, cam.extrinsic);
      p.theta = normalize_angle(p.theta);
      poses.push_back(p);
    }
    track.poses.push_back(std::move(poses));
  }
  return track;
}

GenerationInputs::GenerationInputs(Vocabulary perturbation_vocab, Vocabulary recovery_vocab)
: perturbation(std::move(perturbation_vocab)),
  recovery(std::move(recovery_vocab)),
  recovery_index(recovery)
{
}

GenerationInputs make_generation_inputs(const PipelineConfig & config, Vocabulary perturbation)
{
  Vocabulary raw;
  raw.provenance = VocabProvenance::raw_human;
  raw.entries = synthesize_maneuvers(config.vocab.maneuvers, config.vocab.seed, config.sim.vehicle);
  return GenerationInputs(std::move(perturbation), std::move(raw));
}

GenerationInputs make_generation_inputs(const PipelineConfig & config)
{
  Vocabulary raw;
  raw.provenance = VocabProvenance::raw_human;
  raw.entries = synthesize_maneuvers(config.vocab.maneuvers, config.vocab.seed, config.sim.vehicle);
  Vocabulary clustered = build_vocabulary(raw.entries, config.vocab.k, config.vocab.seed);
  return GenerationInputs(std::move(clustered), std::move(raw));
}

std::uint64_t sample_seed(std::uint64_t master, const std::string & scenario_id, int round, std::size_t candidate)
{
  std::uint64_t s = mix_seed(master, fnv1a64(scenario_id));
  s = mix_seed(s, static_cast<std::uint64_t>(round));
  return mix_seed(s, static_cast<std::uint64_t>(candidate));
}

namespace
{

RolloutMode run_mode(const PipelineConfig & c) { return c.reactive ? RolloutMode::reactive : RolloutMode::nonreactive; }

std::string reject_category(const std::string & filter_reason)
{
  if (filter_reason == "kinematics") return "kinematics";
  if (filter_reason == "NC") return "collision";
  if (filter_reason == "DAC") return "offroad";
  return "reward";
}

// Concatenates two windows that share their junction frame.
SceneStates join(const SceneStates & a, const SceneStates & b)
{
  SceneStates out = a;
  out.ego.insert(out.ego.end(), b.ego.begin() + 1, b.ego.end());
  for (std::size_t i = 0; i < out.agents.size(); ++i) {
    out.agents[i].states.insert(out.agents[i].states.end(), b.agents[i].states.begin() + 1, b.agents[i].states.end());
  }
  return out;
}

std::vector<VehicleState> stage2_history(const Scenario & s, const SceneStates & stage1)
{
  std::vector<VehicleState> h(s.ego_log.states.begin(), s.ego_log.states.begin() + s.t_history);
  h.insert(h.end(), stage1.ego.begin(), stage1.ego.end() - 1);
  return h;
}

}  // namespace

SampleOutcome simulate_sample(
  const Scenario & scenario, const PerturbationCandidate & cand, ExpertKind kind, const PipelineConfig & config,
  const GenerationInputs & inputs, int round)
{
  const auto T = static_cast<std::size_t>(scenario.t_history);
  const auto H = static_cast<std::size_t>(scenario.t_horizon);
  const SimParams & sim = config.sim;
  const MetricParams & metric = config.metrics;
  const RolloutMode mode = run_mode(config);
  SampleOutcome out;

  // stage 1: the perturbation itself
  const SceneStates s1 = rollout(scenario, cand.trajectory, T, H, mode, sim);
  const std::span<const VehicleState> log_history(scenario.ego_log.states.data(), T);
  const SubMetricVector m1 = compute_submetrics(s1, scenario, {log_history, std::nullopt}, metric, sim.vehicle);
  const double score1 = aggregate_epdms(m1, metric.weights);
  if (!scene_collisions(s1, sim.vehicle, metric.at_fault_min_speed).empty()) {
    out.reject_reason = "collision";
    out.detail = "stage 1 collision";
    return out;
  }
  if (m1.dac < 1.0) {
    out.reject_reason = "offroad";
    out.detail = "stage 1 off-road";
    return out;
  }
  if (score1 < config.thresholds.epdms_min) {
    out.reject_reason = "reward";
    out.detail = "stage 1 EPDMS below threshold";
    return out;
  }

  // stage 2: expert from the perturbed state
  const std::size_t t2 = T + H - 1;
  const SceneSnapshot init = s1.snapshot(H - 1);
  const std::vector<VehicleState> history = stage2_history(scenario, s1);
  const ComfortFeatures f1 = comfort_features(s1.ego, scenario.dt);
  SceneStates s2;
  try {
    if (kind == ExpertKind::recovery) {
      const Pose2D goal = scenario.ego_log.states[t2 + H - 1].pose;
      const std::size_t idx = inputs.recovery_index.nearest(recovery_target(init.ego, goal), config.matching_scale);
      const Trajectory ref = place_at(inputs.recovery.entries[idx], init.ego.pose);
      s2 = rollout(scenario, ref, t2, H, mode, sim, &init);
    } else {
      PlannerParams pp = config.planner;
      pp.horizon = static_cast<int>(H);
      const PlanResult plan = privileged_plan(scenario, t2, pp, sim, metric, {&init, history, f1});
      s2 = mode == RolloutMode::reactive ? plan.states : rollout(scenario, plan.plan, t2, H, mode, sim, &init);
    }
  } catch (const Error & e) {
    if (e.kind() != ErrorKind::runtime) throw;
    out.reject_reason = "reward";
    out.detail = e.what();
    return out;
  }

  const Trajectory future = s2.ego_trajectory();
  const FilterDecision d =
    expert_filter(s2, scenario, future, config.expert_filter, {history, f1}, metric, sim.vehicle);
  if (!d.accept) {
    out.reject_reason = reject_category(d.reason);
    out.detail = d.reason;
    return out;
  }

  SimSample s;
  s.scenario_id = scenario.id;
  s.round = round;
  s.expert_kind = kind;
  s.candidate = cand.index;
  s.seed = sample_seed(config.master_seed, scenario.id, round, cand.index);
  s.offsets = {cand.lon, cand.lat, cand.dtheta};
  s.history = s1.ego_trajectory();
  s.expert_future = future;
  s.states = join(s1, s2);
  s.reward.submetrics = d.submetrics;
  s.reward.epdms = d.epdms;
  s.reward.stage_scores = std::array<double, 2>{score1, d.epdms};
  s.two_stage_score = aggregate_two_stage(score1, d.epdms, metric.two_stage);
  s.sensors = sensor_stub(s.states, config.cameras);
  out.sample = std::move(s);
  return out;
}

std::vector<PerturbationCandidate> select_perturbations(
  const Scenario & scenario, const Vocabulary & vocab, const PipelineConfig & config, CandidateFunnel * funnel)
{
  std::vector<PerturbationCandidate> cands = enumerate_perturbations(scenario, vocab, config.thresholds);
  const double emin = config.thresholds.epdms_min;
  for (PerturbationCandidate & c : cands) {
    if (c.status == CandidateStatus::pending) {
      c = feasibility_filter(std::move(c), scenario, FeasibilityMode::nonreactive, emin, config.sim, config.metrics);
    }
  }
  cands = grid_sparsify(std::move(cands), config.grid, config.master_seed, scenario.id);
  for (PerturbationCandidate & c : cands) {
    if (c.status != CandidateStatus::pending) continue;
    if (config.reactive) {
      c = feasibility_filter(std::move(c), scenario, FeasibilityMode::reactive, emin, config.sim, config.metrics);
    } else {
      c.status = CandidateStatus::accepted;
    }
  }
  if (funnel) {
    funnel->enumerated += cands.size();
    for (const PerturbationCandidate & c : cands) {
      switch (c.status) {
        case CandidateStatus::threshold_rejected:
          ++funnel->threshold_rejected;
          break;
        case CandidateStatus::infeasible_nonreactive:
          ++funnel->infeasible_nonreactive;
          break;
        case CandidateStatus::grid_dropped:
          ++funnel->grid_dropped;
          break;
        case CandidateStatus::infeasible_reactive:
          ++funnel->infeasible_reactive;
          break;
        case CandidateStatus::accepted:
          ++funnel->accepted;
          break;
        case CandidateStatus::pending:
          break;
      }
    }
  }
  return cands;
}

namespace
{

struct ScenarioRun
{
  CandidateFunnel funnel;
  std::vector<std::vector<SampleOutcome>> rounds;
};

ScenarioRun run_scenario(const Scenario & scenario, const PipelineConfig & config, const GenerationInputs & inputs)
{
  ScenarioRun run;
  const std::vector<PerturbationCandidate> cands =
    select_perturbations(scenario, inputs.perturbation, config, &run.funnel);
  std::vector<std::size_t> cleared;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (cands[i].status == CandidateStatus::accepted) cleared.push_back(i);
  }
  Rng rng(mix_seed(config.master_seed, fnv1a64(scenario.id)));
  for (std::size_t i = cleared.size(); i > 1; --i) {
    std::swap(cleared[i - 1], cleared[rng.below(i)]);
  }
  const std::size_t per_round =
    config.per_round > 0 ? static_cast<std::size_t>(config.per_round) : (cleared.size() + 4) / 5;
  run.rounds.resize(static_cast<std::size_t>(config.rounds));
  for (int r = 0; r < config.rounds; ++r) {
    const std::size_t lo = std::min(cleared.size(), static_cast<std::size_t>(r) * per_round);
    const std::size_t hi = std::min(cleared.size(), lo + per_round);
    std::vector<std::size_t> slice(cleared.begin() + static_cast<std::ptrdiff_t>(lo), cleared.begin() + static_cast<std::ptrdiff_t>(hi));
    std::sort(slice.begin(), slice.end());
    for (std::size_t ci : slice) {
      run.rounds[static_cast<std::size_t>(r)].push_back(
        simulate_sample(scenario, cands[ci], config.expert, config, inputs, r + 1));
    }
  }
  return run;
}

}  // namespace

GenerationResult run_generation(
  const std::vector<Scenario> & corpus, const PipelineConfig & config, const GenerationInputs & inputs)
{
  if (corpus.empty()) throw Error(ErrorKind::invalid_argument, "run_generation: empty corpus");
  validate_config(config);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return corpus[a].id < corpus[b].id; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (corpus[order[i]].id == corpus[order[i - 1]].id) {
      throw Error(ErrorKind::validation, "run_generation: duplicate scenario id " + corpus[order[i]].id);
    }
  }

  std::vector<ScenarioRun> runs(corpus.size());
  std::vector<std::exception_ptr> errors(corpus.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < order.size(); i = next++) {
      try {
        runs[i] = run_scenario(corpus[order[i]], config, inputs);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.workers), order.size());
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread & t : pool) t.join();
  }
  for (const auto & e : errors) {
    if (e) std::rethrow_exception(e);
  }

  GenerationResult result;
  for (std::size_t i : order) result.corpus_ids.push_back(corpus[i].id);
  std::size_t cumulative = 0;
  for (int r = 0; r < config.rounds; ++r) {
    RoundStats st;
    st.round = r + 1;
    for (const char * reason : kRejectReasons) st.rejects[reason] = 0;
    for (ScenarioRun & run : runs) {
      for (SampleOutcome & o : run.rounds[static_cast<std::size_t>(r)]) {
        ++st.attempted;
        if (o.sample) {
          ++st.accepted;
          result.samples.push_back(std::move(*o.sample));
        } else {
          ++st.rejects[o.reject_reason];
        }
      }
    }
    cumulative += st.accepted;
    st.cumulative_accepted = cumulative;
    result.stats.push_back(std::move(st));
  }
  for (const ScenarioRun & run : runs) {
    result.funnel.enumerated += run.funnel.enumerated;
    result.funnel.threshold_rejected += run.funnel.threshold_rejected;
    result.funnel.infeasible_nonreactive += run.funnel.infeasible_nonreactive;
    result.funnel.grid_dropped += run.funnel.grid_dropped;
    result.funnel.infeasible_reactive += run.funnel.infeasible_reactive;
    result.funnel.accepted += run.funnel.accepted;
  }
  // (scenario id, round, candidate) order
  std::stable_sort(result.samples.begin(), result.samples.end(), [](const SimSample & a, const SimSample & b) {
    if (a.scenario_id != b.scenario_id) return a.scenario_id < b.scenario_id;
    if (a.round != b.round) return a.round < b.round;
    return a.candidate < b.candidate;
  });
  return result;
}

namespace
{

json states_json(const std::vector<VehicleState> & states)
{
  json arr = json::array();
  for (const VehicleState & s : states) arr.push_back(state_to_json(s));
  return arr;
}

std::vector<VehicleState> states_from(const json & arr, const std::string & where)
{
  if (!arr.is_array()) throw Error(ErrorKind::schema, where + " must be an array");
  std::vector<VehicleState> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(state_from_json(arr[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

json sample_to_json(const SimSample & s)
{
  json agents = json::array();
  for (const AgentStates & a : s.states.agents) agents.push_back({{"id", a.id}, {"states", states_json(a.states)}});
  json cams = json::array();
  for (std::size_t c = 0; c < s.sensors.camera_ids.size(); ++c) {
    json poses = json::array();
    for (const Pose2D & p : s.sensors.poses[c]) poses.push_back({p.x, p.y, p.theta});
    cams.push_back({{"id", s.sensors.camera_ids[c]}, {"intrinsics", s.sensors.intrinsics[c]}, {"poses", poses}});
  }
  json reward = {{"submetrics", submetrics_to_json(s.reward.submetrics)}, {"epdms", s.reward.epdms}};
  reward["stage_scores"] =
    s.reward.stage_scores ? json::array({(*s.reward.stage_scores)[0], (*s.reward.stage_scores)[1]}) : json(nullptr);
  reward["two_stage"] = s.two_stage_score;
  return json{
    {"scenario_id", s.scenario_id},
    {"round", s.round},
    {"expert_kind", to_string(s.expert_kind)},
    {"seed", s.seed},
    {"candidate", s.candidate},
    {"offsets", {{"lon", s.offsets[0]}, {"lat", s.offsets[1]}, {"dtheta", s.offsets[2]}}},
    {"t_start", s.states.t_start},
    {"history", states_json(s.history.states)},
    {"expert_future", states_json(s.expert_future.states)},
    {"agents_sim", agents},
    {"reward", reward},
    {"sensors", {{"cameras", cams}}}};
}

std::string stats_csv(const std::vector<RoundStats> & stats, ExpertKind kind)
{
  std::ostringstream os;
  os << "round,expert_kind,attempted,accepted,cumulative_accepted";
  for (const char * r : kRejectReasons) os << ",reject_" << r;
  os << '\n';
  for (const RoundStats & st : stats) {
    os << st.round << ',' << to_string(kind) << ',' << st.attempted << ',' << st.accepted << ','
       << st.cumulative_accepted;
    for (const char * r : kRejectReasons) {
      const auto it = st.rejects.find(r);
      os << ',' << (it == st.rejects.end() ? 0 : it->second);
    }
    os << '\n';
  }
  return os.str();
}

json manifest_json(const GenerationResult & result, const PipelineConfig & config)
{
  const CandidateFunnel & f = result.funnel;
  return json{
    {"config_hash", config_hash_hex(config)},
    {"tool_version", SCENESIM_VERSION},
    {"master_seed", config.master_seed},
    {"corpus_ids", result.corpus_ids},
    {"mode", config.reactive ? "reactive" : "non-reactive"},
    {"expert_kind", to_string(config.expert)},
    {"rounds", config.rounds},
    {"sample_count", result.samples.size()},
    {"candidates",
     {{"enumerated", f.enumerated},
      {"threshold_rejected", f.threshold_rejected},
      {"infeasible_nonreactive", f.infeasible_nonreactive},
      {"grid_dropped", f.grid_dropped},
      {"infeasible_reactive", f.infeasible_reactive},
      {"cleared", f.accepted}}}};
}

void export_dataset(const GenerationResult & result, const PipelineConfig & config, const std::filesystem::path & dir)
{
  for (const SimSample & s : result.samples) {
    const SubMetricVector & m = s.reward.submetrics;
    if (m.nc != 1.0 || m.dac != 1.0 || m.ddc != 1.0 || m.tlc != 1.0 || !(m.ep > config.expert_filter.ep_min)) {
      throw Error(
        ErrorKind::validation, "export: sample " + s.scenario_id + "/" + std::to_string(s.candidate) +
                                 " violates the safety guarantee");
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
  auto open = [](const std::filesystem::path & p) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::io, "cannot write " + p.string());
    return os;
  };
  {
    std::ofstream os = open(dir / "dataset.jsonl");
    for (const SimSample & s : result.samples) os << sample_to_json(s).dump() << '\n';
    if (!os) throw Error(ErrorKind::io, "write failed for dataset.jsonl");
  }
  {
    std::ofstream os = open(dir / "stats.csv");
    os << stats_csv(result.stats, config.expert);
    if (!os) throw Error(ErrorKind::io, "write failed for stats.csv");
  }
  write_json_file(manifest_json(result, config), dir / "manifest.json", 2);
}

RecordCheck verify_sample_record(const json & record, const Scenario & scenario, const PipelineConfig & config)
{
  RecordCheck check;
  const auto T = static_cast<std::size_t>(scenario.t_history);
  const auto H = static_cast<std::size_t>(scenario.t_horizon);
  try {
    if (record.at("scenario_id").get<std::string>() != scenario.id) {
      check.message = "scenario id mismatch";
      return check;
    }
    const std::vector<VehicleState> history = states_from(record.at("history"), "history");
    const std::vector<VehicleState> future = states_from(record.at("expert_future"), "expert_future");
    if (history.size() != H || future.size() != H) {
      check.message = "history/expert_future length differs from the horizon";
      return check;
    }
    const double gap = (history.back().pose.position() - future.front().pose.position()).norm();
    const double dtheta = std::abs(angle_diff(history.back().pose.theta, future.front().pose.theta));
    if (gap >= 0.05 || dtheta >= 0.02) {
      check.message = "history and expert_future are not contiguous";
      return check;
    }
    SceneStates s2;
    s2.dt = scenario.dt;
    s2.t_start = T + H - 1;
    s2.ego = future;
    const json & agents = record.at("agents_sim");
    if (agents.size() != scenario.agents.size()) {
      check.message = "agent count mismatch";
      return check;
    }
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const AgentTrack & track = scenario.agents[i];
      if (agents[i].at("id").get<std::string>() != track.id) {
        check.message = "agent order mismatch at " + track.id;
        return check;
      }
      const std::vector<VehicleState> st = states_from(agents[i].at("states"), "agents_sim[" + std::to_string(i) + "]");
      if (st.size() != 2 * H - 1) {
        check.message = "agent " + track.id + " has the wrong frame count";
        return check;
      }
      s2.agents.push_back({track.id, track.length, track.width, track.is_static(), {st.begin() + static_cast<std::ptrdiff_t>(H - 1), st.end()}});
    }
    std::vector<VehicleState> hist(scenario.ego_log.states.begin(), scenario.ego_log.states.begin() + static_cast<std::ptrdiff_t>(T));
    hist.insert(hist.end(), history.begin(), history.end() - 1);
    const ComfortFeatures f1 = comfort_features(history, scenario.dt);
    check.recomputed = compute_submetrics(s2, scenario, {hist, f1}, config.metrics, config.sim.vehicle);
    const SubMetricVector stored = submetrics_from_json(record.at("reward").at("submetrics"));
    const SubMetricVector & m = check.recomputed;
    if (!(m == stored)) {
      check.message = "recomputed sub-metrics differ from the exported ones";
      return check;
    }
    if (m.nc != 1.0 || m.dac != 1.0 || m.ddc != 1.0 || m.tlc != 1.0) {
      check.message = "a penalty sub-metric is not 1";
      return check;
    }
    if (!(m.ep > config.expert_filter.ep_min)) {
      check.message = "EP not above the expert threshold";
      return check;
    }
  } catch (const json::exception & e) {
    check.message = std::string("malformed record: ") + e.what();
    return check;
  }
  check.ok = true;
  return check;
}

json dataset_stats(const std::filesystem::path & jsonl, const std::vector<Scenario> * corpus, const PipelineConfig & config)
{
  std::ifstream in(jsonl, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + jsonl.string());
  std::map<std::string, const Scenario *> by_id;
  if (corpus) {
    for (const Scenario & s : *corpus) by_id[s.id] = &s;
  }
  std::size_t records = 0;
  std::size_t verified = 0;
  std::size_t failed = 0;
  double epdms_sum = 0.0;
  std::array<double, 9> sub_sum{};
  std::map<std::string, std::size_t> per_kind;
  std::map<int, std::size_t> per_round;
  std::map<std::string, std::size_t> per_scenario;
  json failures = json::array();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error & e) {
      throw Error(ErrorKind::parse, jsonl.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    ++records;
    try {
      epdms_sum += rec.at("reward").at("epdms").get<double>();
      const SubMetricVector m = submetrics_from_json(rec.at("reward").at("submetrics"));
      for (std::size_t i = 0; i < kSubMetricNames.size(); ++i) sub_sum[i] += submetric_value(m, kSubMetricNames[i]);
      ++per_kind[rec.at("expert_kind").get<std::string>()];
      ++per_round[rec.at("round").get<int>()];
      ++per_scenario[rec.at("scenario_id").get<std::string>()];
    } catch (const json::exception & e) {
      throw Error(ErrorKind::schema, jsonl.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (corpus) {
      const auto it = by_id.find(rec.value("scenario_id", ""));
      if (it == by_id.end()) {
        ++failed;
        failures.push_back({{"line", line_no}, {"message", "scenario not in corpus"}});
        continue;
      }
      const RecordCheck c = verify_sample_record(rec, *it->second, config);
      if (c.ok) {
        ++verified;
      } else {
        ++failed;
        failures.push_back({{"line", line_no}, {"message", c.message}});
      }
    }
  }
  json out;
  out["records"] = records;
  out["mean_epdms"] = records ? epdms_sum / static_cast<double>(records) : 0.0;
  json means = json::object();
  for (std::size_t i = 0; i < kSubMetricNames.size(); ++i) {
    means[kSubMetricNames[i]] = records ? sub_sum[i] / static_cast<double>(records) : 0.0;
  }
  out["submetric_means"] = means;
  out["by_expert_kind"] = per_kind;
  json rounds = json::object();
  for (const auto & [r, n] : per_round) rounds[std::to_string(r)] = n;
  out["by_round"] = rounds;
  out["scenarios"] = per_scenario.size();
  if (corpus) {
    out["verified"] = verified;
    out["failed"] = failed;
    out["failures"] = failures;
  }
  return out;
}

}  // namespace scenesim
