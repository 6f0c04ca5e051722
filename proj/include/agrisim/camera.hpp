#pragma once

#include "agrisim/dynamics.hpp"
#include "agrisim/scene.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace agrisim {

/// Rigid transform: maps points from the child frame into the parent frame.
struct Pose {
  Vec3 translation = Vec3::Zero();
  UnitQuaternion rotation = UnitQuaternion::Identity();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Pose compose(const Pose& child) const { return {apply(child.translation), (rotation * child.rotation).normalized()}; }
  Pose inverse() const {
    const UnitQuaternion inv = rotation.conjugate();
    return {-(inv * translation), inv};
  }
};

/// Optical convention: camera z forward, x right, y down. The default mount
/// looks along body +x with the image right along body -y.
inline UnitQuaternion default_body_to_camera_rotation() {
  Mat3 r;
  r.col(0) = Vec3(0, -1, 0);
  r.col(1) = Vec3(0, 0, -1);
  r.col(2) = Vec3(1, 0, 0);
  return UnitQuaternion(r);
}

struct CameraModel {
  int width = 320;
  int height = 240;
  double horizontal_fov = std::numbers::pi / 2.0;
  double fx = 160.0;
  double fy = 160.0;
  double cx = 160.0;
  double cy = 120.0;
  double max_depth = 30.0;
  Pose body_to_camera{Vec3::Zero(), default_body_to_camera_rotation()};

  static CameraModel pinhole(int width, int height, double horizontal_fov, double max_depth,
                             Pose body_to_camera = {Vec3::Zero(), default_body_to_camera_rotation()}) {
    CameraModel m;
    m.width = width;
    m.height = height;
    m.horizontal_fov = horizontal_fov;
    m.fx = (width / 2.0) / std::tan(horizontal_fov / 2.0);
    m.fy = m.fx;
    m.cx = width / 2.0;
    m.cy = height / 2.0;
    m.max_depth = max_depth;
    m.body_to_camera = body_to_camera;
    m.validate();
    return m;
  }

  static CameraModel rl_default() { return pinhole(320, 240, std::numbers::pi / 2.0, 30.0); }
  static CameraModel capture_default() { return pinhole(640, 480, std::numbers::pi / 2.0, 30.0); }

  void validate() const {
    if (width <= 0 || height <= 0) throw std::invalid_argument("camera.width/height must be positive");
    if (!(horizontal_fov > 0.0 && horizontal_fov < std::numbers::pi)) {
      throw std::invalid_argument("camera.horizontal_fov must be in (0, pi)");
    }
    if (!(max_depth > 0.0)) throw std::invalid_argument("camera.max_depth must be > 0");
  }

  /// Unnormalised camera-frame ray through the centre of pixel (u, v); z = 1.
  Vec3 pixel_ray(int u, int v) const { return Vec3((u + 0.5 - cx) / fx, (v + 0.5 - cy) / fy, 1.0); }

  /// World pose of the camera for a vehicle pose (body -> world).
  Pose world_pose(const Vec3& body_position, const UnitQuaternion& body_orientation) const {
    return Pose{body_position, body_orientation}.compose(body_to_camera);
  }
  Pose world_pose(const MultirotorState& s) const { return world_pose(s.position, s.orientation); }
};

struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;
  float at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
};

struct SegImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> data;
  std::uint16_t at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major RGB8
};

inline constexpr Rgb8 kSkyColor{135, 206, 235};

struct DepthSample {
  float depth = std::numeric_limits<float>::infinity();
  ClassId class_id = kBackgroundClass;
};

/// Casts the ray of one pixel. Depth is the distance along the camera forward
/// axis; hits beyond max_depth are reported as no-hit.
inline DepthSample sample_pixel(const Scene& scene, const Pose& camera_world, const CameraModel& model, int u, int v) {
  const Vec3 ray_cam = model.pixel_ray(u, v);
  const double inv_len = 1.0 / ray_cam.norm();
  const Vec3 dir = (camera_world.rotation * ray_cam) * inv_len;
  // Along the unit ray, z-depth = t * inv_len; cap t accordingly.
  const double t_max = model.max_depth / inv_len;
  const auto hit = scene.raycast(camera_world.translation, dir, std::nextafter(t_max, std::numeric_limits<double>::infinity()));
  if (!hit) return {};
  const double z = hit->distance * inv_len;
  if (z > model.max_depth) return {};
  return {static_cast<float>(z), hit->class_id};
}

struct RenderResult {
  DepthImage depth;
  SegImage seg;
};

inline RenderResult render(const Scene& scene, const Pose& camera_world, const CameraModel& model) {
  RenderResult r;
  r.depth = {model.width, model.height, std::vector<float>(static_cast<std::size_t>(model.width) * model.height)};
  r.seg = {model.width, model.height, std::vector<std::uint16_t>(static_cast<std::size_t>(model.width) * model.height)};
  for (int v = 0; v < model.height; ++v) {
    for (int u = 0; u < model.width; ++u) {
      const auto s = sample_pixel(scene, camera_world, model, u, v);
      const std::size_t i = static_cast<std::size_t>(v) * model.width + u;
      r.depth.data[i] = s.depth;
      r.seg.data[i] = s.class_id;
    }
  }
  return r;
}

inline DepthImage render_depth(const Scene& scene, const Pose& camera_world, const CameraModel& model) {
  return render(scene, camera_world, model).depth;
}

inline SegImage render_segmentation(const Scene& scene, const Pose& camera_world, const CameraModel& model) {
  return render(scene, camera_world, model).seg;
}

/// Depth of a single image row; same rays as render_depth.
inline std::vector<float> render_depth_row(const Scene& scene, const Pose& camera_world, const CameraModel& model,
                                           int row) {
  if (row < 0 || row >= model.height) throw std::out_of_range("depth row outside image");
  std::vector<float> out(static_cast<std::size_t>(model.width));
  for (int u = 0; u < model.width; ++u) out[static_cast<std::size_t>(u)] = sample_pixel(scene, camera_world, model, u, row).depth;
  return out;
}

/// Flat class-colour image from a segmentation render.
inline RgbImage colorize(const Scene& scene, const SegImage& seg) {
  RgbImage out{seg.width, seg.height, std::vector<std::uint8_t>(seg.data.size() * 3)};
  for (std::size_t i = 0; i < seg.data.size(); ++i) {
    Rgb8 c = kSkyColor;
    if (seg.data[i] != kBackgroundClass) {
      if (const auto* cls = scene.find_class(seg.data[i])) c = cls->color;
    }
    for (int k = 0; k < 3; ++k) out.data[3 * i + k] = c[static_cast<std::size_t>(k)];
  }
  return out;
}

}  // namespace agrisim
