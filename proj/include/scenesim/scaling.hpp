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

#ifndef SCENESIM__SCALING_HPP_
#define SCENESIM__SCALING_HPP_

#include <json.hpp>

#include <array>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scenesim
{

struct ScalingPoint
{
  double n{1.0};
  double s{0.0};
};

/// S = a log^2 N + b log N + c with natural logarithms.
struct FitResult
{
  double a{0.0};
  double b{0.0};
  double c{0.0};
  double residual_std{0.0};
  std::optional<double> saturation_n;  // exp(-b / 2a), present iff a < 0
  std::size_t points{0};
  std::array<double, 3> std_errors{0.0, 0.0, 0.0};
  double n_min{0.0};
  double n_max{0.0};

  double evaluate(double n) const;
};

/// Linear least squares through the normal equations. Throws Error(invalid_argument)
/// for n <= 0 and Error(numeric) for fewer than three distinct n.
FitResult fit_log_quadratic(std::span<const ScalingPoint> points);

struct CurveRow
{
  double n{0.0};
  double s_fit{0.0};
  double s_lo{0.0};
  double s_hi{0.0};
};

/// Log-uniform grid over [n_min, n_max] with a +-residual_std band.
std::vector<CurveRow> emit_curve(const FitResult & fit, double n_min, double n_max, std::size_t samples);
std::string curve_csv(const std::vector<CurveRow> & rows);

enum class SaturationFlag { saturating, non_saturating, extrapolated };

const char * to_string(SaturationFlag f);

/// Saturating when a < 0 and the vertex lies within [n_min / 10, 10 n_max];
/// extrapolated when a < 0 but the vertex is farther out.
SaturationFlag saturation_flag(const FitResult & fit);

struct FitComparison
{
  std::string label;
  FitResult fit;
  SaturationFlag flag{SaturationFlag::non_saturating};
};

std::vector<FitComparison> compare_fits(const std::map<std::string, std::vector<ScalingPoint>> & runs);

nlohmann::json fit_to_json(const FitResult & fit);
nlohmann::json comparison_report(const std::vector<FitComparison> & report);

/// CSV with a header naming columns n and s. Errors name the offending line.
std::vector<ScalingPoint> parse_scaling_csv(std::istream & in, const std::string & source = "csv");
std::vector<ScalingPoint> read_scaling_csv(const std::filesystem::path & path);

}  // namespace scenesim

#endif  // SCENESIM__SCALING_HPP_
