#include "agrisim/grid.hpp"
#include "agrisim/missions.hpp"
#include "agrisim/vineyard.hpp"
#include "grid_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace agrisim;

namespace {

Scene scene_of(std::vector<SceneObject> objects, Aabb bounds = {Vec3(-10, -10, 0), Vec3(10, 10, 5)}) {
  return Scene(orchard_classes(), std::move(objects), std::nullopt, bounds);
}

SceneObject trunk(double x, double y, double r) {
  return SceneObject::cylinder(Vec3(x, y, 1.5), r, 3.0, kTrunkClass, "trunk");
}

TrajectoryLog line_log(const Vec3& a, const Vec3& b, int samples) {
  TrajectoryLog log;
  for (int i = 0; i < samples; ++i) {
    const double s = samples == 1 ? 0.0 : static_cast<double>(i) / (samples - 1);
    log.append({static_cast<double>(i), a + s * (b - a), 0.0});
  }
  return log;
}

}  // namespace

// ---- capture waypoints ----

TEST(CaptureWaypoints, FourPointCircle) {
  const auto w = circular_capture_waypoints(Vec3::Zero(), 2.0, 1.5, 4);
  ASSERT_EQ(w.size(), 4u);
  const Vec3 expected[] = {{2, 0, 1.5}, {0, 2, 1.5}, {-2, 0, 1.5}, {0, -2, 1.5}};
  const double yaws[] = {std::numbers::pi, -std::numbers::pi / 2, 0.0, std::numbers::pi / 2};
  for (int k = 0; k < 4; ++k) {
    EXPECT_LT((w[k].position - expected[k]).norm(), 1e-12);
    EXPECT_NEAR(wrap_to_pi(w[k].yaw - yaws[k]), 0.0, 1e-12);
  }
}

TEST(CaptureWaypoints, CountsAndBoresight) {
  const Vec3 c(1.0, -2.0, 1.5);
  for (int n : {18, 36, 54}) {
    const auto w = circular_capture_waypoints(c, 3.5, 1.5, n);
    ASSERT_EQ(static_cast<int>(w.size()), n);
    for (const auto& p : w) {
      // Perpendicular distance from the centre to the forward ray.
      const Vec3 d(std::cos(p.yaw), std::sin(p.yaw), 0.0);
      const Vec3 r = c - p.position;
      EXPECT_GT(r.dot(d), 0.0);
      EXPECT_LT((r - r.dot(d) * d).norm(), 1e-9);
      EXPECT_NEAR(std::hypot(r.x(), r.y()), 3.5, 1e-12);
    }
  }
  EXPECT_TRUE(circular_capture_waypoints(c, 1.0, 1.5, 0).empty());
  EXPECT_THROW(circular_capture_waypoints(c, 0.0, 1.5, 4), std::invalid_argument);
}

TEST(CaptureWaypoints, RotationAboutAxisPermutesIndices) {
  const int n = 18;
  const Vec3 c(0.5, 0.5, 0.0);
  const auto w = circular_capture_waypoints(c, 2.0, 1.5, n);
  const double rot = 2.0 * std::numbers::pi * 5 / n;
  for (const auto& p : w) {
    const Vec3 q = p.position - c;
    const Vec3 rp = c + Vec3(std::cos(rot) * q.x() - std::sin(rot) * q.y(),
                             std::sin(rot) * q.x() + std::cos(rot) * q.y(), q.z());
    int matches = 0;
    for (const auto& o : w) {
      if ((o.position - rp).norm() < 1e-9 && std::abs(wrap_to_pi(o.yaw - (p.yaw + rot))) < 1e-9) ++matches;
    }
    EXPECT_EQ(matches, 1);
  }
}

// ---- trajectory metrics ----

TEST(Metrics, GoalConvergence) {
  TrajectoryLog log;
  log.append({0.0, Vec3(0, 0, 0), 0});
  log.append({1.0, Vec3(1, 1, 1), 0});
  EXPECT_EQ(goal_convergence(log, Vec3(1, 1, 1)), 0.0);

  TrajectoryLog b;
  b.append({0.0, Vec3(1, 1, 0), 0});
  EXPECT_NEAR(goal_convergence(b, Vec3(1, 1, 1)), 1.0, 1e-12);

  // Endpoint 8 mm short of the goal, in a direction off every axis.
  const Vec3 goal(12.0, 3.0, 1.5);
  const Vec3 dir = Vec3(2, -1, 0.5).normalized();
  auto run = line_log(Vec3(0, 3, 1.5), goal - 0.008 * dir, 50);
  EXPECT_NEAR(goal_convergence(run, goal), 0.008, 1e-12);
  EXPECT_THROW(goal_convergence(TrajectoryLog{}, goal), LogError);
}

TEST(Metrics, ClearancePastCylinder) {
  const auto scene = scene_of({trunk(0, 0, 0.5)});
  const auto log = line_log(Vec3(-5, 1.589, 1.5), Vec3(5, 1.589, 1.5), 2);
  EXPECT_NEAR(obstacle_clearance(log, scene), 1.089, 1e-3);
}

TEST(Metrics, ClearanceFarFromObjects) {
  const auto scene = scene_of({SceneObject::sphere(Vec3::Zero() + Vec3(0, 0, 1), 1.0, kCanopyClass, "canopy")});
  TrajectoryLog log;
  log.append({0.0, Vec3(6, 8, 1), 0});
  log.append({1.0, Vec3(6, 8, 1) + Vec3(0, 0, 1e-3), 0});
  EXPECT_NEAR(obstacle_clearance(log, scene), 9.0, 1e-3);
}

TEST(Metrics, InterpolationCatchesCloseApproach) {
  const auto scene = scene_of({trunk(0, 0, 0.3)});
  const auto log = line_log(Vec3(-3, 0.6, 1.5), Vec3(3, 0.6, 1.5), 2);
  const double ends = std::min(scene.min_distance(log.samples()[0].position),
                               scene.min_distance(log.samples()[1].position));
  const double c = obstacle_clearance(log, scene);
  EXPECT_LT(c, ends);
  // Dense resampling oracle.
  double dense = 1e9;
  for (int i = 0; i <= 600000; ++i) {
    const double x = -3.0 + 6.0 * i / 600000.0;
    dense = std::min(dense, std::hypot(x, 0.6) - 0.3);
  }
  EXPECT_NEAR(c, dense, 1e-3);
  EXPECT_GE(c, dense - 1e-9);
}

TEST(Metrics, InvariantToFinerResampling) {
  const auto scene = generate_vineyard(3, 5, 3.0, 1.5, 11);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-3, 9), uy(-1, 7), uz(0.5, 2.5);
  TrajectoryLog coarse;
  std::vector<Vec3> pts;
  for (int i = 0; i < 12; ++i) pts.push_back(Vec3(ux(rng), uy(rng), uz(rng)));
  for (int i = 0; i < 12; ++i) coarse.append({static_cast<double>(i), pts[i], 0});
  TrajectoryLog fine;
  for (int i = 0; i < 11; ++i) {
    for (int k = 0; k < 7; ++k) {
      const double s = k / 7.0;
      fine.append({i + s, pts[i] + s * (pts[i + 1] - pts[i]), 0});
    }
  }
  fine.append({11.0, pts[11], 0});
  EXPECT_NEAR(obstacle_clearance(coarse, scene), obstacle_clearance(fine, scene), 1e-3);
  EXPECT_NEAR(goal_convergence(coarse, Vec3(1, 2, 3)), goal_convergence(fine, Vec3(1, 2, 3)), 1e-3);
}

TEST(Metrics, FlightTimeAndEmpty) {
  const auto log = line_log(Vec3::Zero(), Vec3(4, 0, 0), 5);
  EXPECT_EQ(flight_time(log), 4.0);
  EXPECT_THROW(flight_time(TrajectoryLog{}), LogError);
  EXPECT_THROW(obstacle_clearance(TrajectoryLog{}, scene_of({})), LogError);
}

TEST(TrajectoryLogCsv, ParsesAndRoundTrips) {
  const auto log = TrajectoryLog::parse_csv("t,x,y,z,yaw\n0,0,0,1.5,0\n0.5,1,0,1.5,0.1\n1.0,2,0.5,1.5,0.2\n");
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log.samples()[2].position, Vec3(2, 0.5, 1.5));
  std::ostringstream os;
  log.write_csv(os);
  const auto back = TrajectoryLog::parse_csv(os.str());
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.samples()[i].t, log.samples()[i].t);
    EXPECT_EQ(back.samples()[i].position, log.samples()[i].position);
  }
  // A header is optional.
  EXPECT_EQ(TrajectoryLog::parse_csv("0,1,2,3,0\n").size(), 1u);
}

TEST(TrajectoryLogCsv, ErrorsNameTheRow) {
  auto message = [](const std::string& text) {
    try {
      TrajectoryLog::parse_csv(text);
    } catch (const LogError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("t,x,y,z,yaw\n0,0,0,0,0\n1,0,abc,0,0\n").find("row 3"), std::string::npos);
  EXPECT_NE(message("t,x,y,z,yaw\n0,0,0,0,0\n1,0,0,0\n").find("row 3"), std::string::npos);
  EXPECT_NE(message("t,x,y,z,yaw\n0,0,0,0,0\n0,1,0,0,0\n").find("row 3"), std::string::npos);
  EXPECT_NE(message("t,x,y,z,yaw\n0,0,0,0,0\n1,0,0,0,0,7\n").find("row 3"), std::string::npos);
}

// ---- occupancy grid ----

TEST(Grid, EmptySceneAllFree) {
  const auto g = rasterize_scene_to_grid(scene_of({}), 0.5, 0.3, 1.5);
  EXPECT_EQ(g.width, 40);
  EXPECT_EQ(g.height, 40);
  EXPECT_EQ(g.occupied_count(), 0u);
}

TEST(Grid, TrunkAtCellCentre) {
  // Cell (4, 4) has its centre at (2.25, 2.25) for bounds starting at 0.
  const auto scene = scene_of({trunk(2.25, 2.25, 0.2)}, {Vec3(0, 0, 0), Vec3(5, 5, 5)});
  const auto g = rasterize_scene_to_grid(scene, 0.5, 0.3, 1.5);
  std::set<std::pair<int, int>> expected;
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const double cx = 0.25 + 0.5 * x, cy = 0.25 + 0.5 * y;
      if (std::max(0.0, std::hypot(cx - 2.25, cy - 2.25) - 0.2) <= 0.3 + 1e-9) expected.insert({x, y});
    }
  }
  EXPECT_EQ(expected, (std::set<std::pair<int, int>>{{4, 4}, {3, 4}, {5, 4}, {4, 3}, {4, 5}}));
  std::set<std::pair<int, int>> got;
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      if (g.occupied({x, y})) got.insert({x, y});
    }
  }
  EXPECT_EQ(got, expected);
}

TEST(Grid, InflationIsMonotone) {
  const auto scene = generate_vineyard(4, 10, 3.0, 1.5, 3);
  const auto a = rasterize_scene_to_grid(scene, 0.5, 0.0, 1.5);
  const auto b = rasterize_scene_to_grid(scene, 0.5, 0.3, 1.5);
  ASSERT_EQ(a.occupancy.size(), b.occupancy.size());
  for (std::size_t i = 0; i < a.occupancy.size(); ++i) EXPECT_LE(a.occupancy[i], b.occupancy[i]);
  EXPECT_GT(b.occupied_count(), a.occupied_count());
  EXPECT_GT(a.occupied_count(), 0u);
}

TEST(Grid, AltitudeOutsideObjectIsFree) {
  const auto scene = scene_of({SceneObject::sphere(Vec3(0, 0, 4), 0.5, kCanopyClass, "canopy")});
  EXPECT_EQ(rasterize_scene_to_grid(scene, 0.5, 0.3, 1.5).occupied_count(), 0u);
}

// ---- A* ----

TEST(AStar, OctileAnalyticCases) {
  const auto g = OccupancyGrid::empty(Eigen::Vector2d::Zero(), 0.5, 30, 30);
  auto at = [&](int x, int y) { return Vec3(0.25 + 0.5 * x, 0.25 + 0.5 * y, 1.5); };
  EXPECT_EQ(*astar_distance(g, at(2, 3), at(12, 3)), 5.0);
  EXPECT_NEAR(*astar_distance(g, at(2, 3), at(12, 13)), 10 * 0.5 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(*astar_distance(g, at(2, 3), at(12, 7)), 0.5 * (6 + 4 * std::sqrt(2.0)), 1e-12);
  EXPECT_EQ(*astar_distance(g, at(4, 4), at(4, 4)), 0.0);
}

TEST(AStar, MatchesDijkstraOnRandomGrids) {
  std::mt19937_64 rng(2024);
  std::bernoulli_distribution fill(0.25);
  std::uniform_int_distribution<int> coord(0, 19);
  int solvable = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto g = OccupancyGrid::empty(Eigen::Vector2d::Zero(), 0.5, 20, 20);
    for (auto& c : g.occupancy) c = fill(rng) ? 1 : 0;
    Cell s, t;
    do { s = {coord(rng), coord(rng)}; } while (g.occupied(s));
    do { t = {coord(rng), coord(rng)}; } while (g.occupied(t));
    const auto ref = oracle::dijkstra(g, s, t);
    const auto got = astar_distance(g, Vec3(g.center(s).x(), g.center(s).y(), 0), Vec3(g.center(t).x(), g.center(t).y(), 0));
    ASSERT_EQ(ref.has_value(), got.has_value()) << "trial " << trial;
    if (!ref) continue;
    ++solvable;
    EXPECT_EQ(*got, 0.5 * (static_cast<double>(ref->first) + std::numbers::sqrt2 * static_cast<double>(ref->second)))
        << "trial " << trial;
    const auto back = astar_distance(g, Vec3(g.center(t).x(), g.center(t).y(), 0), Vec3(g.center(s).x(), g.center(s).y(), 0));
    EXPECT_EQ(*back, *got);
    EXPECT_GE(*got + 1e-12, 0.5 * std::hypot(s.x - t.x, s.y - t.y));
  }
  EXPECT_GT(solvable, 50);
}

TEST(AStar, NoCornerCutting) {
  auto g = OccupancyGrid::empty(Eigen::Vector2d::Zero(), 1.0, 3, 3);
  g.set({1, 0}, true);
  // (0,0) -> (1,1) diagonally would clip the occupied (1,0).
  EXPECT_EQ(*astar_distance(g, Vec3(0.5, 0.5, 0), Vec3(1.5, 1.5, 0)), 2.0);
}

TEST(AStar, SnapAndUnreachable) {
  auto g = OccupancyGrid::empty(Eigen::Vector2d::Zero(), 0.5, 20, 20);
  // Wall across the grid at x = 10.
  for (int y = 0; y < 20; ++y) g.set({10, y}, true);
  EXPECT_FALSE(astar_distance(g, Vec3(1, 1, 0), Vec3(8, 8, 0)).has_value());
  // Start inside the wall snaps one cell sideways.
  const auto d = astar_distance(g, Vec3(5.25, 2.25, 0), Vec3(0.25, 2.25, 0));
  ASSERT_TRUE(d);
  EXPECT_EQ(*d, 4.5);
  // A start buried deeper than three cells cannot snap.
  auto block = OccupancyGrid::empty(Eigen::Vector2d::Zero(), 0.5, 20, 20);
  for (int y = 0; y < 9; ++y) {
    for (int x = 0; x < 9; ++x) block.set({x, y}, true);
  }
  EXPECT_FALSE(astar_distance(block, Vec3(0.25, 0.25, 0), Vec3(8, 8, 0)).has_value());
  EXPECT_THROW(astar_distance(g, Vec3(-1, 0, 0), Vec3(1, 1, 0)), std::out_of_range);
}

TEST(AStar, BoundsAgainstEuclideanWithSnapSlack) {
  std::mt19937_64 rng(9);
  const auto scene = generate_vineyard(3, 6, 3.0, 1.5, 4);
  const auto g = rasterize_scene_to_grid(scene, 0.5, 0.3, 1.5);
  const auto& b = scene.bounds();
  std::uniform_real_distribution<double> ux(b.min.x(), b.max.x()), uy(b.min.y(), b.max.y());
  for (int i = 0; i < 200; ++i) {
    const Vec3 s(ux(rng), uy(rng), 1.5), t(ux(rng), uy(rng), 1.5);
    const auto d = astar_distance(g, s, t);
    if (!d) continue;
    EXPECT_GE(*d, std::hypot(s.x() - t.x(), s.y() - t.y()) - 2 * 0.5 * std::sqrt(2.0));
    EXPECT_EQ(*astar_distance(g, t, s), *d);
  }
}
