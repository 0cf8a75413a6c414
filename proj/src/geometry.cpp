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

#include "scenesim/geometry.hpp"

#include <algorithm>
#include <limits>

namespace scenesim
{

double normalize_angle(double a)
{
  if (a > -kPi && a <= kPi) {
    return a;
  }
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) {
    a += 2.0 * kPi;
  } else if (a > kPi) {
    a -= 2.0 * kPi;
  }
  return a;
}

Vec2 to_local(const Pose2D & frame, const Vec2 & p)
{
  return rotate(p - frame.position(), -frame.theta);
}

Pose2D to_local(const Pose2D & frame, const Pose2D & p)
{
  const Vec2 q = to_local(frame, p.position());
  return {q.x, q.y, normalize_angle(p.theta - frame.theta)};
}

Vec2 to_global(const Pose2D & frame, const Vec2 & local)
{
  return frame.position() + rotate(local, frame.theta);
}

Pose2D to_global(const Pose2D & frame, const Pose2D & local)
{
  const Vec2 q = to_global(frame, local.position());
  return {q.x, q.y, normalize_angle(local.theta + frame.theta)};
}

namespace
{
int orientation(const Vec2 & a, const Vec2 & b, const Vec2 & c)
{
  const double v = (b - a).cross(c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(const Vec2 & a, const Vec2 & b, const Vec2 & p)
{
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}
}  // namespace

bool segments_intersect(const Segment & s, const Segment & t)
{
  const int o1 = orientation(s.a, s.b, t.a);
  const int o2 = orientation(s.a, s.b, t.b);
  const int o3 = orientation(t.a, t.b, s.a);
  const int o4 = orientation(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_segment(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_segment(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_segment(t.a, t.b, s.b)) return true;
  return false;
}

std::optional<Vec2> segment_intersection(const Segment & s, const Segment & t)
{
  const Vec2 r = s.b - s.a;
  const Vec2 q = t.b - t.a;
  const double denom = r.cross(q);
  if (std::abs(denom) < 1e-15) {
    if (!segments_intersect(s, t)) return std::nullopt;
    // Collinear overlap: report an endpoint lying on the other segment.
    for (const Vec2 & p : {t.a, t.b}) {
      if (on_segment(s.a, s.b, p)) return p;
    }
    return s.a;
  }
  const Vec2 d = t.a - s.a;
  const double u = d.cross(q) / denom;
  const double v = d.cross(r) / denom;
  if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) return std::nullopt;
  return s.a + r * u;
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points))
{
  cumulative_.resize(points_.size(), 0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    cumulative_[i] = cumulative_[i - 1] + (points_[i] - points_[i - 1]).norm();
  }
  if (points_.size() < 2) return;
  const std::size_t segments = points_.size() - 1;
  for (std::size_t b = 0; b < segments; b += kBlock) {
    BoundingBox box{points_[b], points_[b]};
    for (std::size_t i = b; i <= std::min(b + kBlock, segments); ++i) {
      box.min = {std::min(box.min.x, points_[i].x), std::min(box.min.y, points_[i].y)};
      box.max = {std::max(box.max.x, points_[i].x), std::max(box.max.y, points_[i].y)};
    }
    blocks_.push_back(box);
  }
}

namespace
{

double box_distance2(const BoundingBox & box, const Vec2 & p)
{
  const double dx = std::max({box.min.x - p.x, 0.0, p.x - box.max.x});
  const double dy = std::max({box.min.y - p.y, 0.0, p.y - box.max.y});
  return dx * dx + dy * dy;
}

}  // namespace

PolylineProjection Polyline::project(const Vec2 & p) const
{
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  if (points_.size() < 2) {
    if (points_.size() == 1) {
      best.distance = (p - points_[0]).norm();
    }
    return best;
  }
  const std::size_t last = points_.size() - 2;
  const auto visit = [&](std::size_t i) {
    const Vec2 a = points_[i];
    const Vec2 ab = points_[i + 1] - a;
    const double len2 = ab.dot(ab);
    if (len2 <= 0.0) return;
    double t = (p - a).dot(ab) / len2;
    if (i != 0) t = std::max(t, 0.0);
    if (i != last) t = std::min(t, 1.0);
    const Vec2 foot = a + ab * t;
    const double dist = (p - foot).norm();
    if (dist < best.distance) {
      const double len = std::sqrt(len2);
      best.distance = dist;
      best.s = cumulative_[i] + t * len;
      best.heading = std::atan2(ab.y, ab.x);
      best.lateral = (ab * (1.0 / len)).cross(p - foot);
    }
  };
  // Any vertex bounds the minimum from above; blocks whose box lies farther
  // cannot hold it. The end segments extrapolate and are always visited.
  Vec2 d = p - points_.back();
  double bound2 = d.dot(d);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    d = p - points_[b * kBlock];
    bound2 = std::min(bound2, d.dot(d));
  }
  const double cutoff = bound2 * (1.0 + 1e-9) + 1e-12;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const std::size_t first = b * kBlock;
    const std::size_t end = std::min(first + kBlock - 1, last);
    if (box_distance2(blocks_[b], p) <= cutoff) {
      for (std::size_t i = first; i <= end; ++i) visit(i);
    } else {
      if (first == 0) visit(0);
      if (end == last && last != 0) visit(last);
    }
  }
  return best;
}

Pose2D Polyline::pose_at(double s) const
{
  if (points_.size() < 2) {
    return points_.empty() ? Pose2D{} : Pose2D{points_[0].x, points_[0].y, 0.0};
  }
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t i = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  i = std::min(i, points_.size() - 2);
  // skip degenerate segments
  while (i + 2 < points_.size() && cumulative_[i + 1] - cumulative_[i] <= 0.0) ++i;
  const Vec2 a = points_[i];
  const Vec2 ab = points_[i + 1] - a;
  const double len = cumulative_[i + 1] - cumulative_[i];
  const double t = len > 0.0 ? (s - cumulative_[i]) / len : 0.0;
  const Vec2 q = a + ab * t;
  return {q.x, q.y, std::atan2(ab.y, ab.x)};
}

Polyline Polyline::offset(double d) const
{
  if (points_.size() < 2) return *this;
  std::vector<Vec2> out(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const std::size_t i0 = i == 0 ? 0 : i - 1;
    const std::size_t i1 = i == 0 ? 1 : i;
    const std::size_t j0 = i + 1 < points_.size() ? i : i - 1;
    const std::size_t j1 = i + 1 < points_.size() ? i + 1 : i;
    const Vec2 t_in = points_[i1] - points_[i0];
    const Vec2 t_out = points_[j1] - points_[j0];
    const double h_in = std::atan2(t_in.y, t_in.x);
    const double h_out = std::atan2(t_out.y, t_out.x);
    const double half = 0.5 * angle_diff(h_out, h_in);
    const double h = normalize_angle(h_in + half);
    const double scale = 1.0 / std::max(std::cos(half), 0.2);
    out[i] = points_[i] + Vec2{-std::sin(h), std::cos(h)} * (d * scale);
  }
  return Polyline(std::move(out));
}

Polygon::Polygon(std::vector<Vec2> ring) : ring_(std::move(ring))
{
  if (ring_.empty()) return;
  bbox_.min = bbox_.max = ring_[0];
  for (const Vec2 & p : ring_) {
    bbox_.min.x = std::min(bbox_.min.x, p.x);
    bbox_.min.y = std::min(bbox_.min.y, p.y);
    bbox_.max.x = std::max(bbox_.max.x, p.x);
    bbox_.max.y = std::max(bbox_.max.y, p.y);
  }
}

bool Polygon::contains(const Vec2 & p) const
{
  if (ring_.size() < 3 || !bbox_.contains(p)) return false;
  bool inside = false;
  const std::size_t n = ring_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 & a = ring_[i];
    const Vec2 & b = ring_[j];
    if (orientation(a, b, p) == 0 && on_segment(a, b, p)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool Polygon::is_simple() const
{
  const std::size_t n = ring_.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Segment e{ring_[i], ring_[(i + 1) % n]};
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      const Segment f{ring_[j], ring_[(j + 1) % n]};
      if (segments_intersect(e, f)) return false;
    }
  }
  return true;
}

std::array<Vec2, 4> OrientedBox::corners() const
{
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  return {
    to_global(center, Vec2{hl, hw}),
    to_global(center, Vec2{-hl, hw}),
    to_global(center, Vec2{-hl, -hw}),
    to_global(center, Vec2{hl, -hw}),
  };
}

bool boxes_overlap(const OrientedBox & a, const OrientedBox & b)
{
  const Vec2 d = b.center.position() - a.center.position();
  const double r = a.circumradius() + b.circumradius();
  if (d.dot(d) > (r + 1e-9) * (r + 1e-9)) return false;

  const std::array<Vec2, 4> axes = {
    Vec2{std::cos(a.center.theta), std::sin(a.center.theta)},
    Vec2{-std::sin(a.center.theta), std::cos(a.center.theta)},
    Vec2{std::cos(b.center.theta), std::sin(b.center.theta)},
    Vec2{-std::sin(b.center.theta), std::cos(b.center.theta)},
  };
  auto half_extent = [](const OrientedBox & box, const Vec2 & axis) {
    const Vec2 u{std::cos(box.center.theta), std::sin(box.center.theta)};
    const Vec2 v{-u.y, u.x};
    return 0.5 * box.length * std::abs(u.dot(axis)) + 0.5 * box.width * std::abs(v.dot(axis));
  };
  for (const Vec2 & axis : axes) {
    const double dist = std::abs(d.dot(axis));
    if (dist > half_extent(a, axis) + half_extent(b, axis) + 1e-9) return false;
  }
  return true;
}

std::vector<Vec2> simplify_collinear(std::span<const Vec2> pts, double tol)
{
  std::vector<Vec2> out;
  if (pts.size() <= 2) return {pts.begin(), pts.end()};
  out.push_back(pts.front());
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const Vec2 a = out.back();
    const Vec2 c = pts[i + 1];
    const Vec2 ac = c - a;
    const double len = ac.norm();
    const double dev = len > 0.0 ? std::abs(ac.cross(pts[i] - a)) / len : (pts[i] - a).norm();
    if (dev > tol) out.push_back(pts[i]);
  }
  out.push_back(pts.back());
  return out;
}

}  // namespace scenesim
