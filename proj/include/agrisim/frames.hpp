#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

/**
 * @file frames.hpp
 * @brief Coordinate frames shared by the simulator.
 *
 * Dynamics, control and learning all run in a right-handed Z-up world frame
 * (x forward, y left, z up). The render frame is right-handed Y-up with the
 * camera looking down -Z. The conversion between the two is the fixed proper
 * rotation (x, y, z) -> (-y, z, -x) and is only applied at the sensor/render
 * boundary.
 *
 * Quaternions are Hamilton, scalar first (w, x, y, z), and rotate body
 * vectors into the world frame.
 */

namespace agrisim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using UnitQuaternion = Eigen::Quaterniond;

enum class FrameId { WorldZUp, WorldYUp, Body, Camera };

/// ROS-style frame names used in message headers and TF.
constexpr std::string_view frame_name(FrameId id) {
  switch (id) {
    case FrameId::WorldZUp: return "world";
    case FrameId::WorldYUp: return "world_yup";
    case FrameId::Body: return "base_link";
    case FrameId::Camera: return "camera_link";
  }
  return "";
}

enum class FrameDirection { ZUpToYUp, YUpToZUp };

inline constexpr double kQuaternionUnitTolerance = 1e-6;

/// Wraps an angle into (-pi, pi].
inline double wrap_to_pi(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  a -= std::numbers::pi;
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

/// Yaw about +Z of a body->world rotation (z-y-x convention).
inline double yaw_of(const UnitQuaternion& q) {
  const Mat3 r = q.toRotationMatrix();
  return std::atan2(r(1, 0), r(0, 0));
}

inline UnitQuaternion quaternion_from_yaw(double yaw) {
  return UnitQuaternion(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
}

/// Matrix form of zup_to_yup. Integer entries, determinant +1.
inline Mat3 zup_to_yup_matrix() {
  Mat3 m;
  m << 0, -1, 0,
       0, 0, 1,
       -1, 0, 0;
  return m;
}

inline Vec3 zup_to_yup(const Vec3& v) { return {-v.y(), v.z(), -v.x()}; }

inline Vec3 yup_to_zup(const Vec3& v) { return {-v.z(), -v.x(), v.y()}; }

/**
 * Re-expresses a rotation in the other world frame: q' = c * q * c^-1 where
 * c is the frame-change rotation. Rotating a converted vector by q' equals
 * converting the vector rotated by q.
 */
inline UnitQuaternion rotate_quaternion_frame(const UnitQuaternion& q, FrameDirection direction) {
  if (std::abs(q.norm() - 1.0) > kQuaternionUnitTolerance) {
    throw std::invalid_argument("rotate_quaternion_frame: quaternion is not unit norm (|q| = " +
                                std::to_string(q.norm()) + ")");
  }
  UnitQuaternion change(zup_to_yup_matrix());
  if (direction == FrameDirection::YUpToZUp) change = change.conjugate();
  UnitQuaternion out = change * q * change.conjugate();
  out.normalize();
  return out;
}

}  // namespace agrisim
