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

#ifndef SCENESIM__KINEMATICS_HPP_
#define SCENESIM__KINEMATICS_HPP_

#include "scenesim/scenario.hpp"

#include <Eigen/Dense>

#include <array>

namespace scenesim
{

struct ControlInput
{
  double accel{0.0};
  double steer_rate{0.0};
};

/// Error-state LQR weights. State order: lateral, heading, speed, steering.
struct LqrParams
{
  std::array<double, 4> state_weights{1.0, 8.0, 0.5, 0.1};
  std::array<double, 2> control_weights{0.2, 0.2};
  int horizon{10};
  // Command smoothing; a value <= 0 disables the limit.
  double jerk_limit{6.0};
  double yaw_accel_limit{1.8};
};

/// Forward-Euler kinematic bicycle. Inputs are clamped to the vehicle limits,
/// speed never goes negative and steering stays within +-steer_max.
VehicleState bicycle_step(
  const VehicleState & state, const ControlInput & u, double dt, const VehicleParams & vehicle);

struct RiccatiOptions
{
  double tolerance{1e-10};
  int max_iterations{10000};
};

/// Infinite-horizon discrete LQR gain by fixed-point iteration of the Riccati map.
/// Throws Error(numeric) when the iteration does not settle.
Eigen::MatrixXd solve_lqr_gain(
  const Eigen::MatrixXd & A, const Eigen::MatrixXd & B, const Eigen::MatrixXd & Q,
  const Eigen::MatrixXd & R, const RiccatiOptions & opts = {});

/// Riccati residual || Q + A'PA - A'PB (R + B'PB)^-1 B'PA - P ||_max.
double riccati_residual(
  const Eigen::MatrixXd & A, const Eigen::MatrixXd & B, const Eigen::MatrixXd & Q,
  const Eigen::MatrixXd & R, const Eigen::MatrixXd & P);

/// Tracking error of `state` against reference sample `ref`: lateral, heading, speed, steering.
Eigen::Vector4d tracking_error(const VehicleState & state, const VehicleState & ref);

/// Executes `reference` from `start` with time-varying error-state LQR feedback.
/// The output has the reference's length and frame; output[0] == start.
Trajectory lqr_track(
  const Trajectory & reference, const VehicleState & start, const LqrParams & params,
  const VehicleParams & vehicle);

}  // namespace scenesim

#endif  // SCENESIM__KINEMATICS_HPP_
