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

#ifndef SCENESIM__GEOMETRY_HPP_
#define SCENESIM__GEOMETRY_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace scenesim
{

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

/// Signed shortest difference a - b, in (-pi, pi].
inline double angle_diff(double a, double b) { return normalize_angle(a - b); }

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

struct Vec2
{
  double x{0.0};
  double y{0.0};

  Vec2 operator+(const Vec2 & o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2 & o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  bool operator==(const Vec2 &) const = default;
  double dot(const Vec2 & o) const { return x * o.x + y * o.y; }
  double cross(const Vec2 & o) const { return x * o.y - y * o.x; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 rotate(const Vec2 & v, double theta)
{
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

struct Pose2D
{
  double x{0.0};
  double y{0.0};
  double theta{0.0};

  Vec2 position() const { return {x, y}; }
  bool operator==(const Pose2D &) const = default;
};

/// Expresses a global point in the frame of `frame`.
Vec2 to_local(const Pose2D & frame, const Vec2 & p);
/// Expresses a global pose in the frame of `frame`.
Pose2D to_local(const Pose2D & frame, const Pose2D & p);
/// Maps a pose given in the frame of `frame` back to global coordinates.
Pose2D to_global(const Pose2D & frame, const Pose2D & local);
Vec2 to_global(const Pose2D & frame, const Vec2 & local);

struct Segment
{
  Vec2 a;
  Vec2 b;
};

/// Proper or touching intersection of two closed segments.
bool segments_intersect(const Segment & s, const Segment & t);
std::optional<Vec2> segment_intersection(const Segment & s, const Segment & t);

struct PolylineProjection
{
  double s{0.0};        // arclength of the foot point (extrapolated past the ends)
  double lateral{0.0};  // signed offset, left positive
  double heading{0.0};  // tangent heading at the foot point
  double distance{0.0};
};

struct BoundingBox
{
  Vec2 min;
  Vec2 max;
  bool contains(const Vec2 & p) const
  {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
};

/// Polyline with cumulative arclength.
class Polyline
{
public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2> & points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  double arclength_at(std::size_t i) const { return cumulative_[i]; }

  PolylineProjection project(const Vec2 & p) const;
  /// Point and tangent heading at arclength s; linear extrapolation beyond the ends.
  Pose2D pose_at(double s) const;
  /// Same polyline offset to the left by `d` (right when negative).
  Polyline offset(double d) const;

private:
  static constexpr std::size_t kBlock = 8;
  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
  std::vector<BoundingBox> blocks_;
};

/// Simple polygon given by its vertex ring (no repeated closing vertex).
class Polygon
{
public:
  Polygon() = default;
  explicit Polygon(std::vector<Vec2> ring);

  const std::vector<Vec2> & ring() const { return ring_; }
  std::size_t size() const { return ring_.size(); }
  const BoundingBox & bbox() const { return bbox_; }

  /// Even-odd containment; points on the boundary count as inside.
  bool contains(const Vec2 & p) const;
  /// True when no two non-adjacent edges intersect.
  bool is_simple() const;

private:
  std::vector<Vec2> ring_;
  BoundingBox bbox_;
};

/// Rectangle footprint centered at `center`.
struct OrientedBox
{
  Pose2D center;
  double length{0.0};
  double width{0.0};

  std::array<Vec2, 4> corners() const;
  double circumradius() const { return 0.5 * std::hypot(length, width); }
};

/// Separating-axis overlap test; boxes touching within 1e-9 m overlap.
bool boxes_overlap(const OrientedBox & a, const OrientedBox & b);

/// Drops interior vertices that are collinear with their neighbours within `tol` meters.
std::vector<Vec2> simplify_collinear(std::span<const Vec2> pts, double tol);

}  // namespace scenesim

#endif  // SCENESIM__GEOMETRY_HPP_
