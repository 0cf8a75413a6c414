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

#include "scenesim/scaling.hpp"

#include "scenesim/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace scenesim
{

using nlohmann::json;

double FitResult::evaluate(double n) const
{
  const double l = std::log(n);
  return a * l * l + b * l + c;
}

FitResult fit_log_quadratic(std::span<const ScalingPoint> points)
{
  std::set<double> distinct;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const ScalingPoint & p = points[i];
    if (!(p.n > 0.0) || !std::isfinite(p.n)) {
      throw Error(ErrorKind::invalid_argument, "fit_log_quadratic: point " + std::to_string(i) + " has n <= 0");
    }
    if (!std::isfinite(p.s)) {
      throw Error(ErrorKind::invalid_argument, "fit_log_quadratic: point " + std::to_string(i) + " has a non-finite score");
    }
    distinct.insert(p.n);
  }
  if (distinct.size() < 3) {
    throw Error(ErrorKind::numeric, "fit_log_quadratic: rank-deficient design, need at least 3 distinct n");
  }

  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd X(m, 3);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double l = std::log(points[static_cast<std::size_t>(i)].n);
    X(i, 0) = l * l;
    X(i, 1) = l;
    X(i, 2) = 1.0;
    y(i) = points[static_cast<std::size_t>(i)].s;
  }
  // column scaling keeps the normal matrix well conditioned
  const Eigen::Vector3d scale = X.colwise().norm().transpose().cwiseInverse();
  const Eigen::MatrixXd Xs = X * scale.asDiagonal();
  const Eigen::Matrix3d N = Xs.transpose() * Xs;
  const Eigen::LDLT<Eigen::Matrix3d> ldlt(N);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-14 * ldlt.vectorD().maxCoeff()) {
    throw Error(ErrorKind::numeric, "fit_log_quadratic: singular normal equations");
  }
  Eigen::Vector3d z = ldlt.solve(Xs.transpose() * y);
  // one step of iterative refinement
  z += ldlt.solve(Xs.transpose() * (y - Xs * z));
  const Eigen::Vector3d coef = scale.asDiagonal() * z;

  FitResult fit;
  fit.a = coef(0);
  fit.b = coef(1);
  fit.c = coef(2);
  if (std::abs(fit.a) <= 1e-12 * std::max({1.0, std::abs(fit.b), std::abs(fit.c)})) fit.a = 0.0;
  fit.points = points.size();
  fit.n_min = *distinct.begin();
  fit.n_max = *distinct.rbegin();
  const Eigen::VectorXd r = y - X * Eigen::Vector3d(fit.a, fit.b, fit.c);
  const double ssr = r.squaredNorm();
  const double dof = static_cast<double>(std::max<Eigen::Index>(m - 3, 1));
  fit.residual_std = std::sqrt(ssr / dof);
  if (m > 3) {
    const Eigen::Matrix3d inv = ldlt.solve(Eigen::Matrix3d::Identity());
    const double sigma2 = ssr / static_cast<double>(m - 3);
    for (int i = 0; i < 3; ++i) fit.std_errors[static_cast<std::size_t>(i)] = std::sqrt(sigma2 * inv(i, i)) * scale(i);
  }
  if (fit.a < 0.0) fit.saturation_n = std::exp(-fit.b / (2.0 * fit.a));
  return fit;
}

std::vector<CurveRow> emit_curve(const FitResult & fit, double n_min, double n_max, std::size_t samples)
{
  if (!(n_min > 0.0) || !(n_max > n_min)) throw Error(ErrorKind::invalid_argument, "emit_curve: need 0 < n_min < n_max");
  if (samples < 2) throw Error(ErrorKind::invalid_argument, "emit_curve: need at least 2 samples");
  std::vector<CurveRow> rows;
  rows.reserve(samples);
  const double l0 = std::log(n_min);
  const double l1 = std::log(n_max);
  for (std::size_t i = 0; i < samples; ++i) {
    double n = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(samples - 1));
    if (i == 0) n = n_min;
    if (i + 1 == samples) n = n_max;
    const double s = fit.evaluate(n);
    rows.push_back({n, s, s - fit.residual_std, s + fit.residual_std});
  }
  return rows;
}

std::string curve_csv(const std::vector<CurveRow> & rows)
{
  std::ostringstream os;
  os.precision(17);
  os << "n,s_fit,s_lo,s_hi\n";
  for (const CurveRow & r : rows) os << r.n << ',' << r.s_fit << ',' << r.s_lo << ',' << r.s_hi << '\n';
  return os.str();
}

const char * to_string(SaturationFlag f)
{
  switch (f) {
    case SaturationFlag::saturating:
      return "saturating";
    case SaturationFlag::non_saturating:
      return "non-saturating";
    case SaturationFlag::extrapolated:
      return "extrapolated";
  }
  return "unknown";
}

SaturationFlag saturation_flag(const FitResult & fit)
{
  if (!fit.saturation_n) return SaturationFlag::non_saturating;
  const double n = *fit.saturation_n;
  return n >= fit.n_min / 10.0 && n <= fit.n_max * 10.0 ? SaturationFlag::saturating : SaturationFlag::extrapolated;
}

std::vector<FitComparison> compare_fits(const std::map<std::string, std::vector<ScalingPoint>> & runs)
{
  std::vector<FitComparison> out;
  for (const auto & [label, pts] : runs) {
    FitComparison c;
    c.label = label;
    c.fit = fit_log_quadratic(pts);
    c.flag = saturation_flag(c.fit);
    out.push_back(std::move(c));
  }
  return out;
}

json fit_to_json(const FitResult & fit)
{
  json j{{"a", fit.a},
         {"b", fit.b},
         {"c", fit.c},
         {"residual_std", fit.residual_std},
         {"points", fit.points},
         {"std_errors", fit.std_errors},
         {"n_min", fit.n_min},
         {"n_max", fit.n_max}};
  j["saturation_n"] = fit.saturation_n && std::isfinite(*fit.saturation_n) ? json(*fit.saturation_n) : json(nullptr);
  return j;
}

json comparison_report(const std::vector<FitComparison> & report)
{
  json fits = json::array();
  for (const FitComparison & c : report) {
    json j = fit_to_json(c.fit);
    j["label"] = c.label;
    j["flag"] = to_string(c.flag);
    fits.push_back(std::move(j));
  }
  return json{{"fits", fits}};
}

namespace
{

std::string trim(std::string s)
{
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string & line)
{
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string & cell, const std::string & where)
{
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::parse, where + ": '" + cell + "' is not a finite number");
  }
  return v;
}

}  // namespace

std::vector<ScalingPoint> parse_scaling_csv(std::istream & in, const std::string & source)
{
  std::string line;
  std::size_t line_no = 0;
  int col_n = -1;
  int col_s = -1;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i] == "n") col_n = static_cast<int>(i);
      if (cells[i] == "s") col_s = static_cast<int>(i);
    }
    width = cells.size();
    break;
  }
  if (col_n < 0 || col_s < 0) throw Error(ErrorKind::parse, source + ": header with columns n and s required");
  std::vector<ScalingPoint> pts;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::string where = source + " line " + std::to_string(line_no);
    const auto cells = split(line);
    if (cells.size() != width) throw Error(ErrorKind::parse, where + ": expected " + std::to_string(width) + " columns");
    ScalingPoint p{parse_number(cells[static_cast<std::size_t>(col_n)], where), parse_number(cells[static_cast<std::size_t>(col_s)], where)};
    if (!(p.n > 0.0)) throw Error(ErrorKind::validation, where + ": n must be positive, got " + cells[static_cast<std::size_t>(col_n)]);
    pts.push_back(p);
  }
  return pts;
}

std::vector<ScalingPoint> read_scaling_csv(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return parse_scaling_csv(in, path.string());
}

}  // namespace scenesim
