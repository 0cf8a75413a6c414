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

#include "scenesim/kinematics.hpp"

#include "scenesim/error.hpp"

#include <algorithm>
#include <sstream>

namespace scenesim
{

VehicleState bicycle_step(
  const VehicleState & state, const ControlInput & u, double dt, const VehicleParams & vehicle)
{
  const double accel = std::clamp(u.accel, -vehicle.a_cmd_max, vehicle.a_cmd_max);
  const double rate = std::clamp(u.steer_rate, -vehicle.steer_rate_max, vehicle.steer_rate_max);
  const double v = state.vel_lon;
  const double delta = std::clamp(state.steering, -vehicle.steer_max, vehicle.steer_max);

  VehicleState next;
  next.pose.x = state.pose.x + v * std::cos(state.pose.theta) * dt;
  next.pose.y = state.pose.y + v * std::sin(state.pose.theta) * dt;
  next.pose.theta = normalize_angle(state.pose.theta + v * std::tan(delta) / vehicle.wheelbase * dt);
  next.vel_lon = std::max(0.0, v + accel * dt);
  next.vel_lat = 0.0;
  // the stored acceleration is the one that actually took effect
  next.accel = (next.vel_lon - v) / dt;
  if (v + accel * dt >= 0.0) next.accel = accel;
  next.steering = std::clamp(delta + rate * dt, -vehicle.steer_max, vehicle.steer_max);
  return next;
}

namespace
{

Eigen::MatrixXd riccati_map(
  const Eigen::MatrixXd & A, const Eigen::MatrixXd & B, const Eigen::MatrixXd & Q,
  const Eigen::MatrixXd & R, const Eigen::MatrixXd & P)
{
  const Eigen::MatrixXd BtP = B.transpose() * P;
  const Eigen::MatrixXd S = R + BtP * B;
  const Eigen::MatrixXd gain = S.ldlt().solve(BtP * A);
  Eigen::MatrixXd next = Q + A.transpose() * P * A - A.transpose() * P * B * gain;
  return 0.5 * (next + next.transpose());
}

}  // namespace

double riccati_residual(
  const Eigen::MatrixXd & A, const Eigen::MatrixXd & B, const Eigen::MatrixXd & Q,
  const Eigen::MatrixXd & R, const Eigen::MatrixXd & P)
{
  return (riccati_map(A, B, Q, R, P) - P).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd solve_lqr_gain(
  const Eigen::MatrixXd & A, const Eigen::MatrixXd & B, const Eigen::MatrixXd & Q,
  const Eigen::MatrixXd & R, const RiccatiOptions & opts)
{
  const auto n = A.rows();
  const auto m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m) {
    throw Error(ErrorKind::invalid_argument, "solve_lqr_gain: inconsistent matrix dimensions");
  }
  Eigen::LLT<Eigen::MatrixXd> r_chol(R);
  if (r_chol.info() != Eigen::Success) {
    throw Error(ErrorKind::invalid_argument, "solve_lqr_gain: R must be positive definite");
  }

  Eigen::MatrixXd P = Q;
  double delta = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    Eigen::MatrixXd next = riccati_map(A, B, Q, R, P);
    if (!next.allFinite()) {
      throw Error(ErrorKind::numeric, "solve_lqr_gain: Riccati iteration diverged");
    }
    delta = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (delta <= opts.tolerance * std::max(1.0, P.cwiseAbs().maxCoeff())) {
      const Eigen::MatrixXd BtP = B.transpose() * P;
      return (R + BtP * B).ldlt().solve(BtP * A);
    }
  }
  std::ostringstream msg;
  msg << "solve_lqr_gain: no convergence after " << opts.max_iterations
      << " iterations, residual " << delta;
  throw Error(ErrorKind::numeric, msg.str());
}

Eigen::Vector4d tracking_error(const VehicleState & state, const VehicleState & ref)
{
  const Vec2 d = state.pose.position() - ref.pose.position();
  const double th = ref.pose.theta;
  return {
    -std::sin(th) * d.x + std::cos(th) * d.y,
    angle_diff(state.pose.theta, th),
    state.vel_lon - ref.vel_lon,
    state.steering - ref.steering,
  };
}

namespace
{

using Mat4 = Eigen::Matrix4d;
using Mat42 = Eigen::Matrix<double, 4, 2>;
using Mat24 = Eigen::Matrix<double, 2, 4>;

void linearize(const VehicleState & ref, double dt, double wheelbase, Mat4 & A, Mat42 & B)
{
  const double v = ref.vel_lon;
  const double delta = ref.steering;
  const double c = std::cos(delta);
  A.setIdentity();
  A(0, 1) = dt * v;
  A(1, 2) = dt * std::tan(delta) / wheelbase;
  A(1, 3) = dt * v / (wheelbase * c * c);
  B.setZero();
  B(2, 0) = dt;
  B(3, 1) = dt;
}

bool near_state(const VehicleState & a, const VehicleState & b, double tol)
{
  return std::abs(a.pose.x - b.pose.x) <= tol && std::abs(a.pose.y - b.pose.y) <= tol &&
         std::abs(angle_diff(a.pose.theta, b.pose.theta)) <= tol &&
         std::abs(a.vel_lon - b.vel_lon) <= tol && std::abs(a.steering - b.steering) <= tol;
}

}  // namespace

Trajectory lqr_track(
  const Trajectory & reference, const VehicleState & start, const LqrParams & params,
  const VehicleParams & vehicle)
{
  if (reference.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "lqr_track: reference needs at least 2 states");
  }
  for (double w : params.control_weights) {
    if (!(w > 0.0)) throw Error(ErrorKind::invalid_argument, "lqr_track: control weights must be positive");
  }
  const double dt = reference.dt;
  const std::size_t n = reference.size();
  const int horizon = std::max(1, params.horizon);

  Mat4 Q = Mat4::Zero();
  for (int i = 0; i < 4; ++i) Q(i, i) = params.state_weights[static_cast<std::size_t>(i)];
  Eigen::Matrix2d R = Eigen::Matrix2d::Zero();
  R(0, 0) = params.control_weights[0];
  R(1, 1) = params.control_weights[1];

  // Linearizations along the reference; the tail reuses the last sample.
  std::vector<Mat4> As(n);
  std::vector<Mat42> Bs(n);
  for (std::size_t k = 0; k < n; ++k) linearize(reference.states[k], dt, vehicle.wheelbase, As[k], Bs[k]);

  Trajectory out;
  out.dt = dt;
  out.frame = reference.frame;
  out.states.reserve(n);
  out.states.push_back(start);

  for (std::size_t k = 0; k + 1 < n; ++k) {
    const VehicleState & x = out.states.back();
    const VehicleState & ref = reference.states[k];
    const VehicleState & ref_next = reference.states[k + 1];

    Mat4 P = Q;
    Mat24 K = Mat24::Zero();
    for (int j = horizon - 1; j >= 0; --j) {
      const std::size_t idx = std::min(n - 1, k + static_cast<std::size_t>(j));
      const Mat4 & A = As[idx];
      const Mat42 & B = Bs[idx];
      const Eigen::Matrix<double, 2, 4> BtP = B.transpose() * P;
      K = (R + BtP * B).ldlt().solve(BtP * A);
      P = Q + A.transpose() * P * (A - B * K);
      P = 0.5 * (P + P.transpose()).eval();
    }

    const Eigen::Vector4d err = tracking_error(x, ref);
    const Eigen::Vector2d fb = -K * err;
    const ControlInput ff{(ref_next.vel_lon - ref.vel_lon) / dt, (ref_next.steering - ref.steering) / dt};
    ControlInput u{ff.accel + fb(0), ff.steer_rate + fb(1)};
    if (params.jerk_limit > 0.0) {
      const double da = params.jerk_limit * dt;
      u.accel = std::clamp(u.accel, x.accel - da, x.accel + da);
    }
    if (params.yaw_accel_limit > 0.0) {
      const double rate = params.yaw_accel_limit * vehicle.wheelbase / std::max(x.speed(), 1.0);
      u.steer_rate = std::clamp(u.steer_rate, -rate, rate);
    }
    VehicleState next = bicycle_step(x, u, dt, vehicle);

    // On-reference execution reproduces a reachable reference sample exactly.
    if (err.cwiseAbs().maxCoeff() <= 1e-12 && near_state(next, ref_next, 1e-9)) {
      next = ref_next;
    }
    out.states.push_back(next);
  }
  return out;
}

}  // namespace scenesim
