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
#include "scenesim/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace scenesim
{
namespace
{

double orient(Vec2 a, Vec2 b, Vec2 c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

bool inside_convex(const std::array<Vec2, 4> & poly, Vec2 p)
{
  bool pos = false;
  bool neg = false;
  for (int i = 0; i < 4; ++i) {
    const double o = orient(poly[i], poly[(i + 1) % 4], p);
    pos = pos || o > 0.0;
    neg = neg || o < 0.0;
  }
  return !(pos && neg);
}

bool edges_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d)
{
  const double o1 = orient(a, b, c);
  const double o2 = orient(a, b, d);
  const double o3 = orient(c, d, a);
  const double o4 = orient(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

// Vertex containment plus pairwise edge crossings.
bool brute_overlap(const OrientedBox & a, const OrientedBox & b)
{
  const auto ca = a.corners();
  const auto cb = b.corners();
  for (const Vec2 & p : ca) {
    if (inside_convex(cb, p)) return true;
  }
  for (const Vec2 & p : cb) {
    if (inside_convex(ca, p)) return true;
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (edges_cross(ca[i], ca[(i + 1) % 4], cb[j], cb[(j + 1) % 4])) return true;
    }
  }
  return false;
}

TEST(Geometry, NormalizeAngleRange)
{
  EXPECT_DOUBLE_EQ(normalize_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(normalize_angle(-kPi), kPi);
  EXPECT_NEAR(normalize_angle(3.0 * kPi), kPi, 1e-12);
  EXPECT_NEAR(normalize_angle(0.5 + 4.0 * kPi), 0.5, 1e-12);
  EXPECT_NEAR(angle_diff(0.1, -0.1), 0.2, 1e-15);
  EXPECT_NEAR(angle_diff(kPi - 0.1, -kPi + 0.1), -0.2, 1e-12);
}

TEST(Geometry, LocalGlobalRoundTrip)
{
  const Pose2D frame{3.0, -2.0, 0.7};
  const Pose2D p{10.0, 4.0, -2.5};
  const Pose2D back = to_global(frame, to_local(frame, p));
  EXPECT_NEAR(back.x, p.x, 1e-12);
  EXPECT_NEAR(back.y, p.y, 1e-12);
  EXPECT_NEAR(angle_diff(back.theta, p.theta), 0.0, 1e-12);
  const Vec2 forward = to_global(Pose2D{0.0, 0.0, kPi / 2.0}, Vec2{2.0, 0.0});
  EXPECT_NEAR(forward.x, 0.0, 1e-12);
  EXPECT_NEAR(forward.y, 2.0, 1e-12);
}

TEST(Geometry, UnitSquaresHalfApartOverlap)
{
  const OrientedBox a{{0.0, 0.0, 0.0}, 1.0, 1.0};
  const OrientedBox b{{0.5, 0.0, 0.0}, 1.0, 1.0};
  EXPECT_TRUE(boxes_overlap(a, b));
}

TEST(Geometry, UnitSquaresTwoApartSeparate)
{
  const OrientedBox a{{0.0, 0.0, 0.0}, 1.0, 1.0};
  const OrientedBox b{{2.0, 0.0, 0.0}, 1.0, 1.0};
  EXPECT_FALSE(boxes_overlap(a, b));
}

TEST(Geometry, RotatedSquareMatchesBruteForce)
{
  const OrientedBox a{{0.0, 0.0, 0.0}, 1.0, 1.0};
  for (double dir : {0.0, 0.3, kPi / 4.0, 1.0}) {
    const OrientedBox b{{1.2 * std::cos(dir), 1.2 * std::sin(dir), kPi / 4.0}, 1.0, 1.0};
    EXPECT_EQ(boxes_overlap(a, b), brute_overlap(a, b)) << "direction " << dir;
  }
  // Along x the 45 degree corner reaches 0.5 + 0.707 > 1.2.
  EXPECT_TRUE(boxes_overlap(a, OrientedBox{{1.2, 0.0, kPi / 4.0}, 1.0, 1.0}));
}

TEST(Geometry, SeparatingAxisAgreesWithBruteForceOnRandomPairs)
{
  Rng rng(2024);
  int disagreements = 0;
  int overlaps = 0;
  for (int i = 0; i < 1000; ++i) {
    const OrientedBox a{{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-kPi, kPi)}, rng.uniform(0.5, 5), rng.uniform(0.5, 3)};
    const OrientedBox b{{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-kPi, kPi)}, rng.uniform(0.5, 5), rng.uniform(0.5, 3)};
    const bool sat = boxes_overlap(a, b);
    overlaps += sat ? 1 : 0;
    disagreements += sat != brute_overlap(a, b) ? 1 : 0;
  }
  EXPECT_EQ(disagreements, 0);
  EXPECT_GT(overlaps, 100);
  EXPECT_LT(overlaps, 900);
}

TEST(Geometry, PolygonContainsAndSimplicity)
{
  const Polygon square({{0, 0}, {2, 0}, {2, 2}, {0, 2}});
  EXPECT_TRUE(square.contains({1, 1}));
  EXPECT_TRUE(square.contains({2, 1}));
  EXPECT_FALSE(square.contains({2.5, 1}));
  EXPECT_TRUE(square.is_simple());
  const Polygon bowtie({{0, 0}, {2, 2}, {2, 0}, {0, 2}});
  EXPECT_FALSE(bowtie.is_simple());
}

TEST(Geometry, PolylineProjectionMatchesExhaustiveScan)
{
  Rng rng(11);
  std::vector<Vec2> pts;
  double x = 0.0;
  double y = 0.0;
  double h = 0.3;
  for (int i = 0; i < 120; ++i) {
    pts.push_back({x, y});
    h += rng.uniform(-0.15, 0.15);
    x += 2.0 * std::cos(h);
    y += 2.0 * std::sin(h);
  }
  const Polyline line(pts);
  for (int q = 0; q < 500; ++q) {
    const Vec2 p{rng.uniform(-50, 250), rng.uniform(-150, 150)};
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const Vec2 ab = pts[i + 1] - pts[i];
      double t = (p - pts[i]).dot(ab) / ab.dot(ab);
      if (i != 0) t = std::max(t, 0.0);
      if (i + 2 != pts.size()) t = std::min(t, 1.0);
      best = std::min(best, (p - (pts[i] + ab * t)).norm());
    }
    EXPECT_DOUBLE_EQ(line.project(p).distance, best);
  }
}

TEST(Geometry, PolylineOffsetAndPose)
{
  const Polyline line({{0, 0}, {10, 0}, {20, 0}});
  EXPECT_DOUBLE_EQ(line.length(), 20.0);
  const auto proj = line.project({5.0, 1.5});
  EXPECT_NEAR(proj.s, 5.0, 1e-12);
  EXPECT_NEAR(proj.lateral, 1.5, 1e-12);
  const Polyline left = line.offset(2.0);
  EXPECT_NEAR(left.project({5.0, 2.0}).distance, 0.0, 1e-12);
  const Pose2D p = line.pose_at(25.0);
  EXPECT_NEAR(p.x, 25.0, 1e-12);
  EXPECT_NEAR(p.theta, 0.0, 1e-12);
}

}  // namespace
}  // namespace scenesim
