#include "agrisim/camera.hpp"
#include "agrisim/scene.hpp"
#include "agrisim/scene_io.hpp"
#include "agrisim/vineyard.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

using namespace agrisim;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Scene scene_of(std::vector<SceneObject> objects, std::optional<double> ground = std::nullopt,
               Aabb bounds = {Vec3::Constant(-50), Vec3::Constant(50)}) {
  return Scene(orchard_classes(), std::move(objects), ground, bounds);
}

/// Independent inside tests: plain implicit inequalities.
bool inside(const SceneObject& o, const Vec3& p) {
  const Vec3 q = p - o.center;
  switch (o.shape) {
    case Shape::Sphere: return q.squaredNorm() < o.dims[0] * o.dims[0];
    case Shape::VerticalCylinder:
      return q.x() * q.x() + q.y() * q.y() < o.dims[0] * o.dims[0] && std::abs(q.z()) < 0.5 * o.dims[1];
    case Shape::Ellipsoid: {
      double s = 0;
      for (int i = 0; i < 3; ++i) s += (q[i] / o.dims[i]) * (q[i] / o.dims[i]);
      return s < 1.0;
    }
    case Shape::Box:
      return std::abs(q.x()) < 0.5 * o.dims[0] && std::abs(q.y()) < 0.5 * o.dims[1] &&
             std::abs(q.z()) < 0.5 * o.dims[2];
  }
  return false;
}

/// First entry into the solid along the ray: fine march, then bisection.
std::optional<double> march(const SceneObject& o, const Vec3& origin, const Vec3& dir, double t_end) {
  const double step = 1e-3;
  double prev = 0.0;
  for (double t = step; t <= t_end; t += step) {
    if (inside(o, origin + t * dir)) {
      double lo = prev, hi = t;
      for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (inside(o, origin + mid * dir) ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = t;
  }
  return std::nullopt;
}

/// Surface parametrisations for brute-force distance.
using Surface = std::function<Vec3(double, double, int)>;

struct Patch {
  Surface f;
  int faces;
};

Patch surface_of(const SceneObject& o) {
  const Vec3 c = o.center;
  const auto& d = o.dims;
  switch (o.shape) {
    case Shape::Sphere:
      return {[=](double a, double b, int) {
                const double th = 2 * std::numbers::pi * a, ph = std::numbers::pi * b;
                return Vec3(c + d[0] * Vec3(std::sin(ph) * std::cos(th), std::sin(ph) * std::sin(th), std::cos(ph)));
              },
              1};
    case Shape::Ellipsoid:
      return {[=](double a, double b, int) {
                const double th = 2 * std::numbers::pi * a, ph = std::numbers::pi * b;
                return Vec3(c + Vec3(d[0] * std::sin(ph) * std::cos(th), d[1] * std::sin(ph) * std::sin(th),
                                     d[2] * std::cos(ph)));
              },
              1};
    case Shape::VerticalCylinder:
      return {[=](double a, double b, int face) {
                const double th = 2 * std::numbers::pi * a;
                if (face == 0) return Vec3(c + Vec3(d[0] * std::cos(th), d[0] * std::sin(th), (b - 0.5) * d[1]));
                const double z = face == 1 ? 0.5 * d[1] : -0.5 * d[1];
                return Vec3(c + Vec3(b * d[0] * std::cos(th), b * d[0] * std::sin(th), z));
              },
              3};
    case Shape::Box:
      return {[=](double a, double b, int face) {
                const int axis = face / 2;
                const double sign = face % 2 ? 1.0 : -1.0;
                Vec3 p;
                p[axis] = sign * 0.5 * d[static_cast<std::size_t>(axis)];
                const int u = (axis + 1) % 3, v = (axis + 2) % 3;
                p[u] = (a - 0.5) * d[static_cast<std::size_t>(u)];
                p[v] = (b - 0.5) * d[static_cast<std::size_t>(v)];
                return Vec3(c + p);
              },
              6};
  }
  return {};
}

double brute_distance(const SceneObject& o, const Vec3& p) {
  const auto patch = surface_of(o);
  double best = kInf;
  for (int face = 0; face < patch.faces; ++face) {
    // Coarse grid, then repeated local refinement around the best sample.
    const int n = 120;
    double ba = 0, bb = 0, bd = kInf;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const double dd = (patch.f(double(i) / n, double(j) / n, face) - p).norm();
        if (dd < bd) bd = dd, ba = double(i) / n, bb = double(j) / n;
      }
    }
    double h = 1.0 / n;
    for (int round = 0; round < 12; ++round) {
      const double ca = ba, cb = bb;
      for (int i = -8; i <= 8; ++i) {
        for (int j = -8; j <= 8; ++j) {
          const double a = std::clamp(ca + i * h / 4, 0.0, 1.0), b = std::clamp(cb + j * h / 4, 0.0, 1.0);
          const double dd = (patch.f(a, b, face) - p).norm();
          if (dd < bd) bd = dd, ba = a, bb = b;
        }
      }
      h /= 4;
    }
    best = std::min(best, bd);
  }
  return inside(o, p) ? -best : best;
}

std::vector<SceneObject> sample_objects() {
  return {SceneObject::sphere(Vec3(0.3, -0.2, 1.0), 0.8, kCanopyClass, "canopy"),
          SceneObject::ellipsoid(Vec3(-0.5, 0.4, 1.2), Vec3(1.1, 0.5, 0.7), kCanopyClass, "canopy"),
          SceneObject::ellipsoid(Vec3(0, 0, 0), Vec3(0.4, 0.9, 0.6), kCanopyClass, "canopy"),
          SceneObject::cylinder(Vec3(0.2, 0.1, 0.5), 0.3, 1.2, kTrunkClass, "trunk"),
          SceneObject::box(Vec3(-0.3, 0.2, 0.7), Vec3(0.8, 1.4, 0.5), kTrunkClass, "trunk")};
}

Pose camera_looking_along_x(const Vec3& position) {
  return CameraModel::rl_default().world_pose(position, UnitQuaternion::Identity());
}

/// Slab wall whose front face is the plane x = face_x.
SceneObject wall_at(double face_x) {
  return SceneObject::box(Vec3(face_x + 0.5, 0, 0), Vec3(1.0, 200, 200), kTrunkClass, "trunk");
}

}  // namespace

TEST(Raycast, UpwardRayOverGroundMisses) {
  const auto s = scene_of({}, 0.0);
  EXPECT_FALSE(s.raycast(Vec3(0, 0, 1), Vec3(0, 0, 1)).has_value());
}

TEST(Raycast, SphereAhead) {
  const auto s = scene_of({SceneObject::sphere(Vec3(5, 0, 1), 1.0, kCanopyClass, "canopy")}, 0.0);
  const auto hit = s.raycast(Vec3(0, 0, 1), Vec3(1, 0, 0));
  ASSERT_TRUE(hit);
  EXPECT_NEAR(hit->distance, 4.0, 1e-12);
  EXPECT_EQ(hit->class_id, kCanopyClass);
}

TEST(Raycast, GroundBelow) {
  const auto s = scene_of({}, 0.0);
  const auto hit = s.raycast(Vec3(0, 0, 1), Vec3(0, 0, -1));
  ASSERT_TRUE(hit);
  EXPECT_DOUBLE_EQ(hit->distance, 1.0);
  EXPECT_EQ(hit->class_id, kGroundClass);
}

TEST(Raycast, RejectsNonUnitDirection) {
  const auto s = scene_of({}, 0.0);
  EXPECT_THROW(s.raycast(Vec3::Zero(), Vec3(0, 0, 2)), std::invalid_argument);
}

TEST(Raycast, CoincidentSurfacesPickLowestIndex) {
  const auto s = scene_of({SceneObject::sphere(Vec3(3, 0, 0), 1.0, kTrunkClass, "trunk"),
                           SceneObject::sphere(Vec3(3, 0, 0), 1.0, kCanopyClass, "canopy")});
  const auto hit = s.raycast(Vec3::Zero(), Vec3(1, 0, 0));
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->object_index, 0u);
  EXPECT_EQ(hit->class_id, kTrunkClass);
}

TEST(Raycast, PrimitivesMatchMarchingOracle) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& o : sample_objects()) {
    const auto box = o.bounds();
    for (int trial = 0; trial < 60; ++trial) {
      // Aim at an interior point so the chord is not grazing.
      Vec3 target;
      do {
        target = box.centroid() + 0.5 * (box.max - box.min).cwiseProduct(Vec3(u(rng), u(rng), u(rng)));
      } while (o.sdf(target) > -0.05);
      const Vec3 origin = target + 5.0 * Vec3(u(rng), u(rng), u(rng)).normalized();
      const Vec3 dir = (target - origin).normalized();
      const auto t = o.intersect(origin, dir);
      const auto expected = march(o, origin, dir, 10.0);
      ASSERT_TRUE(expected);
      ASSERT_TRUE(t) << shape_name(o.shape);
      EXPECT_NEAR(*t, *expected, 1e-9) << shape_name(o.shape);
      // Pointing away never hits.
      EXPECT_FALSE(o.intersect(origin, -dir).has_value() && !inside(o, origin));
    }
  }
}

TEST(Raycast, BvhMatchesLinearScan) {
  const auto scene = generate_vineyard(4, 10, 3.0, 1.5, 3);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 origin(6 + 8 * u(rng), 4.5 + 5 * u(rng), 1.5 + u(rng));
    const Vec3 dir = Vec3(u(rng), u(rng), 0.3 * u(rng)).normalized();
    double best = kInf;
    ClassId cls = 0;
    for (const auto& o : scene.objects()) {
      if (const auto t = o.intersect(origin, dir); t && *t < best) best = *t, cls = o.class_id;
    }
    if (const double tg = (0.0 - origin.z()) / dir.z(); tg > 0 && tg < best) best = tg, cls = kGroundClass;
    const auto hit = scene.raycast(origin, dir);
    if (std::isinf(best)) {
      EXPECT_FALSE(hit);
    } else {
      ASSERT_TRUE(hit);
      EXPECT_EQ(hit->distance, best);
      EXPECT_EQ(hit->class_id, cls);
    }
  }
}

TEST(SignedDistance, SphereExample) {
  const auto s = scene_of({SceneObject::sphere(Vec3::Zero(), 1.0, kCanopyClass, "canopy")});
  EXPECT_DOUBLE_EQ(s.min_distance(Vec3(0, 3, 0)), 2.0);
}

TEST(SignedDistance, InsideTrunkIsNegative) {
  const auto s = scene_of({SceneObject::cylinder(Vec3(0, 0, 0.5), 0.1, 1.0, kTrunkClass, "trunk")});
  EXPECT_LT(s.min_distance(Vec3(0.02, 0, 0.4)), 0.0);
}

TEST(SignedDistance, EmptySceneIsInfinite) {
  EXPECT_TRUE(std::isinf(scene_of({}, 0.0).min_distance(Vec3::Zero())));
}

TEST(SignedDistance, MatchesDenseSurfaceSampling) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& o : sample_objects()) {
    for (int i = 0; i < 25; ++i) {
      const Vec3 p = o.center + 1.8 * Vec3(u(rng), u(rng), u(rng));
      EXPECT_NEAR(o.sdf(p), brute_distance(o, p), 1e-3) << shape_name(o.shape) << " at " << p.transpose();
    }
  }
}

TEST(SignedDistance, EllipsoidDegenerateAxesAndPlanes) {
  // Points on symmetry planes and axes exercise the special branches.
  const SceneObject e = SceneObject::ellipsoid(Vec3::Zero(), Vec3(1.2, 0.6, 0.4), kCanopyClass, "canopy");
  for (const Vec3& p : {Vec3(0, 0, 0), Vec3(0.3, 0, 0), Vec3(0, 0.2, 0), Vec3(0, 0, 0.1), Vec3(2, 0, 0),
                        Vec3(0.5, 0.3, 0), Vec3(0, 0.3, 0.3), Vec3(0.9, 0, 0.1), Vec3(0, 0, 1.5)}) {
    EXPECT_NEAR(e.sdf(p), brute_distance(e, p), 1e-3) << p.transpose();
  }
  EXPECT_NEAR(e.sdf(Vec3::Zero()), -0.4, 1e-12);
}

TEST(SignedDistance, SliceMatchesThreeDimensionalOnMidplane) {
  // For a vertical cylinder, the horizontal slice distance equals the 3-D
  // distance well inside the height range.
  const auto c = SceneObject::cylinder(Vec3(1, 1, 1), 0.5, 2.0, kTrunkClass, "trunk");
  EXPECT_NEAR(*c.slice_sdf(3, 1, 1), c.sdf(Vec3(3, 1, 1)), 1e-12);
  EXPECT_FALSE(c.slice_sdf(0, 0, 2.5));
  const auto e = SceneObject::ellipsoid(Vec3::Zero(), Vec3(1, 0.5, 0.5), kCanopyClass, "canopy");
  EXPECT_NEAR(*e.slice_sdf(2, 0, 0), 1.0, 1e-12);
  EXPECT_FALSE(e.slice_sdf(0, 0, 0.6));
}

TEST(Collision, Examples) {
  const auto empty = scene_of({}, 0.0);
  EXPECT_FALSE(empty.check_collision(Vec3(0, 0, 10), 0.3).collided);
  const auto s = scene_of({SceneObject::sphere(Vec3::Zero(), 1.0, kCanopyClass, "canopy")}, -10.0);
  EXPECT_TRUE(s.check_collision(Vec3::Zero(), 0.3).collided);
  const auto r = s.check_collision(Vec3(1.25, 0, 0), 0.3);
  EXPECT_TRUE(r.collided);
  EXPECT_EQ(r.class_id, kCanopyClass);
  EXPECT_FALSE(s.check_collision(Vec3(1.35, 0, 0), 0.3).collided);
  const auto g = empty.check_collision(Vec3(0, 0, 0.2), 0.3);
  EXPECT_TRUE(g.collided);
  EXPECT_EQ(g.class_id, kGroundClass);
}

TEST(Collision, FirstCollidingObjectByIndex) {
  const auto s = scene_of({SceneObject::cylinder(Vec3(0, 0, 0.5), 0.1, 1.0, kTrunkClass, "trunk"),
                           SceneObject::sphere(Vec3(0, 0, 0.5), 0.5, kCanopyClass, "canopy")});
  EXPECT_EQ(s.check_collision(Vec3(0, 0, 0.5), 0.2).class_id, kTrunkClass);
}

TEST(Collision, AgreesWithSignedDistance) {
  const auto scene = generate_vineyard(3, 6, 3.0, 1.5, 11);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ux(-1.0, 8.5), uy(-1.0, 7.0), uz(0.8, 2.5), ur(0.05, 0.6);
  for (int i = 0; i < 1000; ++i) {
    const double r = ur(rng);
    const Vec3 p(ux(rng), uy(rng), std::max(uz(rng), r + 0.01));  // keep clear of the ground
    EXPECT_EQ(scene.check_collision(p, r).collided, scene.min_distance(p) < r) << p.transpose() << " r=" << r;
  }
}

TEST(Camera, IntrinsicsFromFov) {
  const auto m = CameraModel::rl_default();
  EXPECT_NEAR(m.fx, 160.0, 1e-12);
  EXPECT_EQ(m.cx, 160.0);
  EXPECT_EQ(m.cy, 120.0);
  EXPECT_THROW(CameraModel::pinhole(320, 240, 1.0, 0.0), std::invalid_argument);
}

TEST(Camera, DefaultMountLooksAlongBodyX) {
  const auto m = CameraModel::rl_default();
  const Vec3 forward = m.body_to_camera.rotation * Vec3::UnitZ();
  EXPECT_TRUE(forward.isApprox(Vec3::UnitX(), 1e-12));
  const Vec3 right = m.body_to_camera.rotation * Vec3::UnitX();
  EXPECT_TRUE(right.isApprox(-Vec3::UnitY(), 1e-12));
}

TEST(Render, EmptySceneIsAllNoHit) {
  const auto m = CameraModel::pinhole(64, 48, std::numbers::pi / 2, 30.0);
  // Ground present, but the camera faces straight up.
  const auto scene = scene_of({}, 0.0);
  const UnitQuaternion pitch_up(Eigen::AngleAxisd(-std::numbers::pi / 2, Vec3::UnitY()));
  const auto pose = m.world_pose(Vec3(0, 0, 1), pitch_up);
  const auto r = render(scene, pose, m);
  for (std::size_t i = 0; i < r.depth.data.size(); ++i) {
    EXPECT_TRUE(std::isinf(r.depth.data[i]));
    EXPECT_EQ(r.seg.data[i], 0);
  }
}

TEST(Render, WallDepthIsForwardDistance) {
  const auto m = CameraModel::rl_default();
  const auto scene = scene_of({wall_at(5.0)});
  const auto depth = render_depth(scene, camera_looking_along_x(Vec3::Zero()), m);
  EXPECT_NEAR(depth.at(160, 120), 5.0, 1e-4);
  EXPECT_NEAR(depth.at(0, 0), 5.0, 1e-4);
  EXPECT_NEAR(depth.at(319, 239), 5.0, 1e-4);
  // Euclidean length at the corner would be much larger.
  const double euclid = 5.0 * m.pixel_ray(0, 0).norm();
  EXPECT_GT(euclid, 7.9);
}

TEST(Render, MovingBackIncreasesDepthExactly) {
  const auto m = CameraModel::pinhole(80, 60, std::numbers::pi / 2, 30.0);
  const auto scene = scene_of({wall_at(5.0), SceneObject::sphere(Vec3(3, 0, 0), 0.5, kCanopyClass, "canopy")});
  const auto near = render(scene, camera_looking_along_x(Vec3::Zero()), m);
  const auto far = render(scene, camera_looking_along_x(Vec3(-2.5, 0, 0)), m);
  int checked = 0;
  for (std::size_t i = 0; i < near.depth.data.size(); ++i) {
    if (near.seg.data[i] == kTrunkClass && far.seg.data[i] == kTrunkClass) {
      EXPECT_NEAR(far.depth.data[i] - near.depth.data[i], 2.5, 1e-4);
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(Render, MaxDepthClampsToNoHit) {
  const auto m = CameraModel::pinhole(32, 24, std::numbers::pi / 2, 4.0);
  const auto depth = render_depth(scene_of({wall_at(5.0)}), camera_looking_along_x(Vec3::Zero()), m);
  for (float d : depth.data) EXPECT_TRUE(std::isinf(d));
}

TEST(Render, SphereFillingCentre) {
  const auto m = CameraModel::rl_default();
  const auto scene = scene_of({SceneObject::sphere(Vec3(4, 0, 0), 1.0, kCanopyClass, "canopy")});
  const auto r = render(scene, camera_looking_along_x(Vec3::Zero()), m);
  EXPECT_EQ(r.seg.at(160, 120), kCanopyClass);
  // Centre-pixel ray is almost on-axis; the forward distance comes from the raycast.
  const Vec3 ray = m.pixel_ray(160, 120);
  const Vec3 dir_world = UnitQuaternion(m.body_to_camera.rotation) * ray.normalized();
  const auto hit = scene.raycast(Vec3::Zero(), dir_world);
  ASSERT_TRUE(hit);
  EXPECT_NEAR(r.depth.at(160, 120), hit->distance / ray.norm(), 1e-5);
}

TEST(Render, DepthAndSegmentationAgreeInVineyard) {
  const auto m = CameraModel::pinhole(96, 72, std::numbers::pi / 2, 12.0);
  const auto scene = generate_vineyard(4, 10, 3.0, 1.5, 7);
  for (double yaw : {0.0, 0.7, -1.2, 2.5}) {
    const auto pose = m.world_pose(Vec3(-2, 4.5, 1.5), quaternion_from_yaw(yaw));
    const auto r = render(scene, pose, m);
    for (std::size_t i = 0; i < r.depth.data.size(); ++i) {
      ASSERT_EQ(r.seg.data[i] != 0, std::isfinite(r.depth.data[i]));
      if (std::isfinite(r.depth.data[i])) {
        ASSERT_GT(r.depth.data[i], 0.0f);
        ASSERT_LE(r.depth.data[i], 12.0f);
      }
    }
  }
}

TEST(Render, DepthRowMatchesFullRender) {
  const auto m = CameraModel::pinhole(64, 48, std::numbers::pi / 2, 30.0);
  const auto scene = generate_vineyard(2, 5, 3.0, 1.5, 1);
  const auto pose = m.world_pose(Vec3(-1, 1.5, 1.5), quaternion_from_yaw(0.2));
  const auto full = render_depth(scene, pose, m);
  const auto row = render_depth_row(scene, pose, m, 24);
  for (int u = 0; u < 64; ++u) EXPECT_EQ(row[static_cast<std::size_t>(u)], full.at(u, 24));
}

TEST(Render, ColorizeUsesClassColours) {
  const auto scene = scene_of({}, 0.0);
  SegImage seg{2, 1, {0, kGroundClass}};
  const auto rgb = colorize(scene, seg);
  EXPECT_EQ(rgb.data[0], kSkyColor[0]);
  EXPECT_EQ(rgb.data[3], orchard_classes()[0].color[0]);
}

TEST(Vineyard, SinglePlant) {
  const auto s = generate_vineyard(1, 1, 3.0, 1.5, 0);
  ASSERT_EQ(s.objects().size(), 2u);
  EXPECT_EQ(s.objects()[0].class_name, "trunk");
  EXPECT_EQ(s.objects()[0].shape, Shape::VerticalCylinder);
  EXPECT_EQ(s.objects()[1].class_name, "canopy");
  EXPECT_EQ(s.objects()[1].shape, Shape::Ellipsoid);
}

TEST(Vineyard, DeterministicBytes) {
  EXPECT_EQ(serialize_scene(generate_vineyard(4, 10, 3.0, 1.5, 7)), serialize_scene(generate_vineyard(4, 10, 3.0, 1.5, 7)));
  EXPECT_NE(serialize_scene(generate_vineyard(4, 10, 3.0, 1.5, 7)), serialize_scene(generate_vineyard(4, 10, 3.0, 1.5, 8)));
}

TEST(Vineyard, DefaultLayoutWithinBoundsAndJitter) {
  const double rs = 3.0, ts = 1.5;
  const auto s = generate_vineyard(4, 10, rs, ts, 7);
  ASSERT_EQ(s.objects().size(), 80u);
  double max_half_width = 0.0;
  for (std::size_t i = 0; i < s.objects().size(); ++i) {
    const auto& o = s.objects()[i];
    EXPECT_TRUE(s.bounds().contains(o.bounds())) << i;
    const int plant = static_cast<int>(i / 2);
    const int row = plant / 10, k = plant % 10;
    EXPECT_LE(std::abs(o.center.x() - k * ts), 0.1 * ts + 1e-12);
    EXPECT_LE(std::abs(o.center.y() - row * rs), 0.1 * rs + 1e-12);
    if (o.shape == Shape::Ellipsoid) max_half_width = std::max(max_half_width, o.dims[1]);
  }
  // Corridor clearance between adjacent rows, measured on the generated geometry.
  for (int row = 0; row + 1 < 4; ++row) {
    double left_edge = -kInf, right_edge = kInf;
    for (const auto& o : s.objects()) {
      const auto b = o.bounds();
      if (std::abs(o.center.y() - row * rs) < 1e-9) left_edge = std::max(left_edge, b.max.y());
      if (std::abs(o.center.y() - (row + 1) * rs) < 1e-9) right_edge = std::min(right_edge, b.min.y());
    }
    EXPECT_GE(right_edge - left_edge, rs - 2 * max_half_width - 1e-12);
    EXPECT_GE(right_edge - left_edge, 1.5);
  }
}

TEST(Vineyard, RejectsBadArguments) {
  EXPECT_THROW(generate_vineyard(0, 1, 3, 1.5, 0), std::invalid_argument);
  EXPECT_THROW(generate_vineyard(1, 1, 0, 1.5, 0), std::invalid_argument);
}

TEST(Scenarios, KnownNamesAndSpawnInsideBounds) {
  for (auto name : scenario_names()) {
    const auto sc = make_scenario(name, 7);
    EXPECT_EQ(sc.name, name);
    EXPECT_TRUE(sc.scene.bounds().contains(sc.spawn));
    EXPECT_TRUE(sc.scene.bounds().contains(sc.goal));
    EXPECT_FALSE(sc.scene.check_collision(sc.spawn, 0.3).collided);
  }
  EXPECT_THROW(make_scenario("mars", 0), UnknownScenario);
}

TEST(SceneIo, MinimalFile) {
  const std::string text = R"({
  "ground_z": 0.0,
  "bounds": {"min": [-5, -5, 0], "max": [5, 5, 5]},
  "classes": [{"id": 1, "name": "ground", "color": [1, 2, 3]}, {"id": 3, "name": "canopy", "color": [0, 200, 0]}],
  "objects": [{"shape": "sphere", "center": [1, 0, 1], "dims": [0.5], "class": "canopy"}]
})";
  const auto s = parse_scene(text);
  ASSERT_EQ(s.objects().size(), 1u);
  EXPECT_EQ(s.objects()[0].class_id, 3);
  EXPECT_EQ(s.ground_class(), 1);
}

TEST(SceneIo, NegativeRadiusNamesObject) {
  const std::string text = R"({"ground_z": null, "bounds": {"min": [-5, -5, 0], "max": [5, 5, 5]},
  "classes": [{"id": 3, "name": "canopy", "color": [0, 200, 0]}],
  "objects": [{"shape": "sphere", "center": [1, 0, 1], "dims": [0.5], "class": "canopy"},
              {"shape": "sphere", "center": [1, 0, 1], "dims": [-0.5], "class": "canopy"}]})";
  try {
    parse_scene(text);
    FAIL();
  } catch (const SceneError& e) {
    EXPECT_NE(std::string(e.what()).find("objects[1]"), std::string::npos) << e.what();
  }
}

TEST(SceneIo, RejectsUnknownShapeAndOutOfBounds) {
  const std::string base = R"({"ground_z": null, "bounds": {"min": [-5, -5, 0], "max": [5, 5, 5]},
  "classes": [{"id": 3, "name": "canopy", "color": [0, 200, 0]}], "objects": [)";
  EXPECT_THROW(parse_scene(base + R"({"shape": "torus", "center": [0,0,1], "dims": [1], "class": "canopy"}]})"),
               SceneError);
  EXPECT_THROW(parse_scene(base + R"({"shape": "sphere", "center": [9,0,1], "dims": [1], "class": "canopy"}]})"),
               SceneError);
  EXPECT_THROW(parse_scene(base + R"({"shape": "box", "center": [0,0,1], "dims": [1, 1], "class": "canopy"}]})"),
               SceneError);
}

TEST(SceneIo, ParseErrorReportsLine) {
  try {
    parse_scene("{\n  \"ground_z\": 0.0,\n  \"bounds\": oops\n}");
    FAIL();
  } catch (const SceneError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(SceneIo, RoundTrip) {
  const auto original = generate_vineyard(3, 4, 2.5, 1.2, 99);
  const auto path = std::filesystem::temp_directory_path() / "agrisim_roundtrip_scene.json";
  save_scene(original, path);
  const auto loaded = load_scene(path);
  EXPECT_EQ(loaded, original);
  EXPECT_EQ(serialize_scene(loaded), serialize_scene(original));
  std::filesystem::remove(path);
}
