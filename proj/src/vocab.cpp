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

#include "scenesim/vocab.hpp"

#include "scenesim/error.hpp"
#include "scenesim/kinematics.hpp"
#include "scenesim/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace scenesim
{

using nlohmann::json;

const char * to_string(VocabProvenance p)
{
  return p == VocabProvenance::clustered ? "clustered" : "raw-human";
}

const char * to_string(CandidateStatus s)
{
  switch (s) {
    case CandidateStatus::pending:
      return "pending";
    case CandidateStatus::threshold_rejected:
      return "threshold-rejected";
    case CandidateStatus::grid_dropped:
      return "grid-dropped";
    case CandidateStatus::infeasible_nonreactive:
      return "infeasible-nonreactive";
    case CandidateStatus::infeasible_reactive:
      return "infeasible-reactive";
    case CandidateStatus::accepted:
      return "accepted";
  }
  return "unknown";
}

std::vector<Trajectory> synthesize_maneuvers(
  const ManeuverConfig & config, std::uint64_t seed, const VehicleParams & vehicle)
{
  if (config.horizon < 2) throw Error(ErrorKind::invalid_argument, "maneuver horizon must be at least 2");
  if (!(config.dt > 0.0)) throw Error(ErrorKind::invalid_argument, "maneuver dt must be positive");
  const double dt = config.dt;
  const double duration = dt * (config.horizon - 1);
  const double L = vehicle.wheelbase;
  std::vector<Trajectory> out;
  out.reserve(config.count);
  for (std::size_t i = 0; i < config.count; ++i) {
    Rng rng(mix_seed(seed, i));
    const double v0 = rng.uniform(0.0, config.v_max);
    const double a_target = rng.uniform(config.accel_min, config.accel_max);
    const double jerk = rng.uniform(1.0, config.jerk_max);
    const double t_switch = rng.uniform(1.0, duration);
    const double a_after = rng.chance(0.5) ? 0.0 : a_target;
    const double v_hi = std::max(v0, v0 + std::max(a_target, 0.0) * duration);

    const double shape = rng.uniform();
    double kappa = 0.0;
    double lc_amp = 0.0;
    double lc_t0 = 0.0;
    double lc_dur = 1.0;
    if (shape >= 0.3 && shape < 0.65) {
      const double k_max = std::min(std::tan(vehicle.steer_max) / L, config.lat_accel_max / std::max(v_hi * v_hi, 1.0));
      kappa = (rng.chance(0.5) ? 1.0 : -1.0) * rng.uniform(0.0, k_max);
    } else if (shape >= 0.65) {
      lc_dur = rng.uniform(2.5, std::min(4.0, duration));
      lc_t0 = rng.uniform(0.0, duration - lc_dur);
      const double d = (rng.chance(0.5) ? 1.0 : -1.0) * rng.uniform(1.0, 4.0);
      lc_amp = 2.0 * kPi * d / (lc_dur * lc_dur);
      lc_amp = std::clamp(lc_amp, -config.lat_accel_max, config.lat_accel_max);
    }

    Trajectory t;
    t.dt = dt;
    t.frame = TrajectoryFrame::ego_local;
    VehicleState st;
    st.vel_lon = v0;
    t.states.push_back(st);
    for (int k = 0; k + 1 < config.horizon; ++k) {
      const double time = k * dt;
      const double a_goal = time < t_switch ? a_target : a_after;
      const double a = st.accel + std::clamp(a_goal - st.accel, -jerk * dt, jerk * dt);
      const double v = std::max(st.vel_lon, 0.1);
      double k_goal = kappa;
      if (lc_amp != 0.0 && time >= lc_t0 && time <= lc_t0 + lc_dur) {
        k_goal = lc_amp * std::sin(2.0 * kPi * (time - lc_t0) / lc_dur) / std::max(v * v, 1.0);
      }
      const double delta_goal = std::atan(L * k_goal);
      const double rate_cap = std::min(vehicle.steer_rate_max, 1.5 * L / v);
      const double rate = std::clamp((delta_goal - st.steering) / dt, -rate_cap, rate_cap);
      st = bicycle_step(st, {a, rate}, dt, vehicle);
      t.states.push_back(st);
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<double> trajectory_features(const Trajectory & t, int stride)
{
  if (stride < 1) throw Error(ErrorKind::invalid_argument, "feature stride must be positive");
  std::vector<double> f;
  const int n = static_cast<int>(t.size());
  double unrolled = t.states.empty() ? 0.0 : t.states.front().pose.theta;
  int last = 0;
  for (int k = (n - 1) % stride; k < n; k += stride) {
    for (int j = last + 1; j <= k; ++j) {
      unrolled += angle_diff(t.states[j].pose.theta, t.states[j - 1].pose.theta);
    }
    last = std::max(last, k);
    f.push_back(t.states[k].pose.x);
    f.push_back(t.states[k].pose.y);
    f.push_back(unrolled);
  }
  return f;
}

namespace
{

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr int kKmeansIterations = 100;
constexpr Eigen::Index kBlock = 2048;

// Squared distances of rows [r0, r0 + rows) of X to every center.
RowMatrix block_distances(const RowMatrix & X, const Eigen::VectorXd & xn, const RowMatrix & C, const Eigen::VectorXd & cn, Eigen::Index r0, Eigen::Index rows)
{
  RowMatrix d = -2.0 * X.middleRows(r0, rows) * C.transpose();
  d.colwise() += xn.segment(r0, rows);
  d.rowwise() += cn.transpose();
  return d;
}

}  // namespace

Vocabulary build_vocabulary(std::span<const Trajectory> samples, std::size_t k, std::uint64_t seed)
{
  if (samples.empty()) throw Error(ErrorKind::invalid_argument, "build_vocabulary: no samples");
  if (k == 0) throw Error(ErrorKind::invalid_argument, "build_vocabulary: k must be positive");
  if (k > samples.size()) throw Error(ErrorKind::invalid_argument, "build_vocabulary: k exceeds the sample count");
  for (const Trajectory & t : samples) {
    if (t.size() != samples.front().size() || std::abs(t.dt - samples.front().dt) > 1e-12) {
      throw Error(ErrorKind::invalid_argument, "build_vocabulary: samples differ in length or dt");
    }
  }

  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto first = trajectory_features(samples.front());
  const auto d = static_cast<Eigen::Index>(first.size());
  RowMatrix X(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto f = trajectory_features(samples[static_cast<std::size_t>(i)]);
    X.row(i) = Eigen::Map<const Eigen::RowVectorXd>(f.data(), d);
  }
  const Eigen::VectorXd xn = X.rowwise().squaredNorm();
  const auto K = static_cast<Eigen::Index>(k);

  // k-means++ seeding
  Rng rng(seed);
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  RowMatrix C(K, d);
  Eigen::VectorXd d2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  auto pick = [&](Eigen::Index idx, Eigen::Index slot) {
    chosen[static_cast<std::size_t>(idx)] = 1;
    C.row(slot) = X.row(idx);
    d2 = d2.cwiseMin((X.rowwise() - X.row(idx)).rowwise().squaredNorm());
  };
  pick(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))), 0);
  for (Eigen::Index c = 1; c < K; ++c) {
    const double total = d2.sum();
    Eigen::Index idx = -1;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (chosen[static_cast<std::size_t>(i)] || d2(i) <= 0.0) continue;
        acc += d2(i);
        idx = i;
        if (acc > r) break;
      }
    }
    if (idx < 0) {
      for (Eigen::Index i = 0; i < n && idx < 0; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) idx = i;
      }
    }
    pick(idx, c);
  }

  // Lloyd iterations
  std::vector<Eigen::Index> assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < kKmeansIterations; ++iter) {
    const Eigen::VectorXd cn = C.rowwise().squaredNorm();
    bool changed = false;
    for (Eigen::Index r0 = 0; r0 < n; r0 += kBlock) {
      const Eigen::Index rows = std::min(kBlock, n - r0);
      const RowMatrix dist = block_distances(X, xn, C, cn, r0, rows);
      for (Eigen::Index i = 0; i < rows; ++i) {
        Eigen::Index best = 0;
        dist.row(i).minCoeff(&best);
        auto & a = assign[static_cast<std::size_t>(r0 + i)];
        if (a != best) {
          a = best;
          changed = true;
        }
      }
    }
    if (!changed) break;
    RowMatrix sum = RowMatrix::Zero(K, d);
    std::vector<Eigen::Index> count(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index a = assign[static_cast<std::size_t>(i)];
      sum.row(a) += X.row(i);
      ++count[static_cast<std::size_t>(a)];
    }
    for (Eigen::Index c = 0; c < K; ++c) {
      if (count[static_cast<std::size_t>(c)] > 0) C.row(c) = sum.row(c) / static_cast<double>(count[static_cast<std::size_t>(c)]);
    }
  }

  // snap each center to its nearest unused sample
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (Eigen::Index c = 0; c < K; ++c) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_i = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const double dist = (X.row(i) - C.row(c)).squaredNorm();
      if (dist < best) {
        best = dist;
        best_i = i;
      }
    }
    used[static_cast<std::size_t>(best_i)] = 1;
    picked.push_back(static_cast<std::size_t>(best_i));
  }
  std::sort(picked.begin(), picked.end());

  Vocabulary v;
  v.provenance = VocabProvenance::clustered;
  v.entries.reserve(k);
  for (std::size_t i : picked) v.entries.push_back(samples[i]);
  return v;
}

json vocabulary_to_json(const Vocabulary & v)
{
  json arr = json::array();
  for (const Trajectory & t : v.entries) arr.push_back(trajectory_to_json(t));
  return arr;
}

Vocabulary vocabulary_from_json(const json & j, VocabProvenance provenance)
{
  if (!j.is_array()) throw Error(ErrorKind::schema, "vocabulary: expected a JSON array of trajectories");
  Vocabulary v;
  v.provenance = provenance;
  for (std::size_t i = 0; i < j.size(); ++i) {
    v.entries.push_back(trajectory_from_json(j[i], "vocabulary[" + std::to_string(i) + "]"));
    const Trajectory & t = v.entries.back();
    if (t.size() != v.entries.front().size() || std::abs(t.dt - v.entries.front().dt) > 1e-12) {
      throw Error(ErrorKind::validation, "vocabulary[" + std::to_string(i) + "]: length or dt differs from entry 0");
    }
  }
  return v;
}

void save_vocabulary(const Vocabulary & v, const std::filesystem::path & path)
{
  write_json_file(vocabulary_to_json(v), path);
}

Vocabulary load_vocabulary(const std::filesystem::path & path, VocabProvenance provenance)
{
  return vocabulary_from_json(read_json_file(path), provenance);
}

std::vector<PerturbationCandidate> enumerate_perturbations(
  const Scenario & scenario, const Vocabulary & vocab, const PerturbThresholds & th)
{
  const auto T = static_cast<std::size_t>(scenario.t_history);
  const auto H = static_cast<std::size_t>(scenario.t_horizon);
  if (vocab.horizon() != H) {
    throw Error(
      ErrorKind::invalid_argument, "enumerate_perturbations: vocabulary horizon " + std::to_string(vocab.horizon()) +
                                     " differs from the scenario horizon " + std::to_string(H));
  }
  if (!vocab.empty() && std::abs(vocab.entries.front().dt - scenario.dt) > 1e-9) {
    throw Error(ErrorKind::invalid_argument, "enumerate_perturbations: vocabulary dt differs from the scenario dt");
  }
  if (T + H > scenario.frame_count()) {
    throw Error(ErrorKind::invalid_argument, "enumerate_perturbations: scenario too short");
  }
  const VehicleState & start = scenario.ego_log.states[T];
  const Pose2D log_end = scenario.ego_log.states[T + H - 1].pose;

  std::vector<PerturbationCandidate> out;
  out.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    PerturbationCandidate c;
    c.index = i;
    c.trajectory = place_at(vocab.entries[i], start.pose);
    const Pose2D rel = to_local(log_end, c.trajectory.back().pose);
    c.lon = rel.x;
    c.lat = rel.y;
    c.dtheta = normalize_angle(rel.theta);
    if (std::abs(c.dtheta) > th.dtheta_max) {
      c.reason = "heading";
    } else if (std::abs(c.lon) > th.r_lon) {
      c.reason = "longitudinal";
    } else if (std::abs(c.lat) > th.r_lat) {
      c.reason = "lateral";
    } else if (std::abs(vocab.entries[i].front().speed() - start.speed()) > th.speed_tolerance) {
      c.reason = "speed";
    }
    c.status = c.reason.empty() ? CandidateStatus::pending : CandidateStatus::threshold_rejected;
    out.push_back(std::move(c));
  }
  return out;
}

std::array<int, 2> grid_cell(double lon, double lat, const GridSpec & g)
{
  if (!(g.step_lon > 0.0) || !(g.step_lat > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "grid steps must be positive");
  }
  const int i_lon = static_cast<int>(std::floor(lon / g.step_lon));
  const bool odd = (i_lon % 2) != 0;
  const double shift = g.interleave && odd ? 0.5 * g.step_lat : 0.0;
  const int i_lat = static_cast<int>(std::floor((lat - shift) / g.step_lat));
  return {i_lon, i_lat};
}

std::vector<PerturbationCandidate> grid_sparsify(
  std::vector<PerturbationCandidate> cands, const GridSpec & g, std::uint64_t seed, const std::string & key)
{
  std::map<std::array<int, 2>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    PerturbationCandidate & c = cands[i];
    c.cell = grid_cell(c.lon, c.lat, g);
    if (c.status == CandidateStatus::pending) cells[c.cell].push_back(i);
  }
  const std::uint64_t base = mix_seed(seed, fnv1a64(key));
  for (const auto & [cell, members] : cells) {
    const std::uint64_t cell_key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cell[0])) << 32) |
                                   static_cast<std::uint32_t>(cell[1]);
    // keep the member with the smallest seeded rank so removing other members never changes the choice
    const std::uint64_t cell_seed = mix_seed(base, cell_key);
    std::size_t keep = members.front();
    std::uint64_t best = mix_seed(cell_seed, cands[keep].index);
    for (std::size_t i : members) {
      const std::uint64_t rank = mix_seed(cell_seed, cands[i].index);
      if (rank < best || (rank == best && cands[i].index < cands[keep].index)) {
        best = rank;
        keep = i;
      }
    }
    for (std::size_t i : members) {
      if (i == keep) continue;
      cands[i].status = CandidateStatus::grid_dropped;
      cands[i].reason = "grid";
    }
  }
  return cands;
}

PerturbationCandidate feasibility_filter(
  PerturbationCandidate cand, const Scenario & scenario, FeasibilityMode mode, double epdms_min,
  const SimParams & sim, const MetricParams & metric)
{
  if (cand.status != CandidateStatus::pending) {
    throw Error(ErrorKind::invalid_argument, "feasibility_filter: candidate is not pending");
  }
  if (mode == FeasibilityMode::reactive && !cand.nonreactive_cleared) {
    throw Error(ErrorKind::invalid_argument, "feasibility_filter: reactive check before the non-reactive one");
  }
  const auto T = static_cast<std::size_t>(scenario.t_history);
  const auto H = static_cast<std::size_t>(scenario.t_horizon);
  const RolloutMode rm = mode == FeasibilityMode::reactive ? RolloutMode::reactive : RolloutMode::nonreactive;
  const SceneStates states = rollout(scenario, cand.trajectory, T, H, rm, sim);
  const std::span<const VehicleState> history(scenario.ego_log.states.data(), T);
  RewardRecord r;
  r.submetrics = compute_submetrics(states, scenario, {history, std::nullopt}, metric, sim.vehicle);
  r.epdms = aggregate_epdms(r.submetrics, metric.weights);
  cand.reward = r;

  std::string reason;
  if (!scene_collisions(states, sim.vehicle, metric.at_fault_min_speed).empty()) {
    reason = "collision";
  } else if (r.submetrics.dac < 1.0) {
    reason = "off-road";
  } else if (r.epdms < epdms_min) {
    reason = "reward";
  }
  if (!reason.empty()) {
    cand.status = mode == FeasibilityMode::reactive ? CandidateStatus::infeasible_reactive
                                                    : CandidateStatus::infeasible_nonreactive;
    cand.reason = reason;
  } else if (mode == FeasibilityMode::nonreactive) {
    cand.nonreactive_cleared = true;
  } else {
    cand.status = CandidateStatus::accepted;
  }
  return cand;
}

}  // namespace scenesim
