#pragma once

#include "agrisim/dynamics.hpp"
#include "agrisim/frames.hpp"
#include "agrisim/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace agrisim {

/// Geometric controller gains. Attitude gains are per unit inertia, position gains per unit mass.
struct Se3Gains {
  Vec3 k_pos{6.0, 6.0, 10.0};       // 1/s^2
  Vec3 k_vel{4.0, 4.0, 6.0};        // 1/s
  Vec3 k_rot{400.0, 400.0, 120.0};  // 1/s^2
  Vec3 k_omega{40.0, 40.0, 18.0};   // 1/s

  void validate() const {
    auto check = [](const Vec3& g, const char* name) {
      if (!g.allFinite() || (g.array() <= 0.0).any()) {
        throw std::invalid_argument(std::string("control.") + name + " entries must be strictly positive");
      }
    };
    check(k_pos, "k_pos");
    check(k_vel, "k_vel");
    check(k_rot, "k_rot");
    check(k_omega, "k_omega");
  }
};

namespace detail {

inline Vec3 vee(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

}  // namespace detail

struct Se3Command {
  double thrust = 0.0;          // N, never negative
  Vec3 moments = Vec3::Zero();  // N m, body
  Mat3 desired_attitude = Mat3::Identity();
};

/**
 * Geometric tracking on SE(3).
 *
 *   f_des = m (a_ref + g e3) + m (k_pos o e_p + k_vel o e_v)
 *   thrust = max(0, f_des . b3)
 *   M = I (-k_rot o e_R - k_omega o e_w) + w x I w
 *
 * with e_R = 1/2 (R_d^T R - R^T R_d)^v and e_w = w - R^T R_d w_d, where w_d
 * comes from the jerk and yaw-rate feedforward.
 */
inline Se3Command se3_control(const MultirotorState& state, const FlatOutputRef& ref, const Se3Gains& gains,
                              const VehicleParams& params) {
  if (!ref.finite() || !state.position.allFinite() || !state.velocity.allFinite()) {
    throw std::invalid_argument("se3_control: non-finite input");
  }
  const Mat3 r = state.orientation.toRotationMatrix();
  const Vec3 e3(0.0, 0.0, 1.0);
  const Vec3 e_pos = ref.position - state.position;
  const Vec3 e_vel = ref.velocity - state.velocity;

  const Vec3 f_des = params.mass * (ref.acceleration + params.gravity * e3) +
                     params.mass * (gains.k_pos.cwiseProduct(e_pos) + gains.k_vel.cwiseProduct(e_vel));

  const Vec3 b3 = r.col(2);
  Se3Command out;
  out.thrust = std::max(0.0, f_des.dot(b3));

  Mat3 r_des = r;
  Vec3 omega_des = Vec3::Zero();
  const double f_norm = f_des.norm();
  if (f_norm >= 1e-6) {
    const Vec3 b3_des = f_des / f_norm;
    const Vec3 b1_c(std::cos(ref.yaw), std::sin(ref.yaw), 0.0);
    Vec3 b2_des = b3_des.cross(b1_c);
    if (b2_des.norm() > 1e-9) {
      b2_des.normalize();
      const Vec3 b1_des = b2_des.cross(b3_des);
      r_des.col(0) = b1_des;
      r_des.col(1) = b2_des;
      r_des.col(2) = b3_des;

      // Body-rate feedforward from jerk: h = m/|f| (j - (b3.j) b3).
      const Vec3 h = (params.mass / f_norm) * (ref.jerk - b3_des.dot(ref.jerk) * b3_des);
      omega_des = Vec3(-h.dot(b2_des), h.dot(b1_des), ref.yaw_rate * e3.dot(b3_des));
    }
  }
  out.desired_attitude = r_des;

  const Vec3 e_r = 0.5 * detail::vee(r_des.transpose() * r - r.transpose() * r_des);
  const Vec3 e_w = state.angular_velocity - r.transpose() * r_des * omega_des;
  const Mat3 inertia = params.inertia();
  out.moments = inertia * (-gains.k_rot.cwiseProduct(e_r) - gains.k_omega.cwiseProduct(e_w)) +
                state.angular_velocity.cross(inertia * state.angular_velocity);
  return out;
}

/// Action bounds of the velocity command mode.
struct ActionBounds {
  double v_fwd_min = -2.0;
  double v_fwd_max = 3.0;
  double yaw_rate_min = -1.5;
  double yaw_rate_max = 1.5;

  double clamp_v_fwd(double v) const { return std::clamp(v, v_fwd_min, v_fwd_max); }
  double clamp_yaw_rate(double w) const { return std::clamp(w, yaw_rate_min, yaw_rate_max); }
  double max_abs_yaw_rate() const { return std::max(std::abs(yaw_rate_min), std::abs(yaw_rate_max)); }
};

struct VelocityFilterConfig {
  double slew_v_fwd = 4.0;     // m/s^2
  double slew_yaw_rate = 6.0;  // rad/s^2
  double lowpass_tau = 0.15;   // s
  double hold_altitude = 1.5;  // m

  void validate() const {
    if (!(slew_v_fwd > 0.0)) throw std::invalid_argument("filter.slew_v_fwd must be positive");
    if (!(slew_yaw_rate > 0.0)) throw std::invalid_argument("filter.slew_yaw_rate must be positive");
    if (!(lowpass_tau >= 0.0)) throw std::invalid_argument("filter.lowpass_tau must be non-negative");
    if (!std::isfinite(hold_altitude)) throw std::invalid_argument("filter.hold_altitude must be finite");
  }
};

/// Slew stage output, low-pass stage output and the integrated unicycle setpoint.
struct VelocityFilterState {
  double slewed_v_fwd = 0.0;
  double slewed_yaw_rate = 0.0;
  double filtered_v_fwd = 0.0;
  double filtered_yaw_rate = 0.0;
  Vec3 virtual_position = Vec3::Zero();
  double virtual_yaw = 0.0;

  static VelocityFilterState at(const Vec3& position, double yaw, double hold_altitude) {
    VelocityFilterState f;
    f.virtual_position = Vec3(position.x(), position.y(), hold_altitude);
    f.virtual_yaw = yaw;
    return f;
  }
};

struct VelocityStepResult {
  VelocityFilterState filter;
  FlatOutputRef reference;
};

/**
 * One tick of the unicycle command path: slew limit, first-order low-pass,
 * then integrate heading and planar position of the virtual setpoint.
 * Commands are expected to be clamped already.
 */
inline VelocityStepResult velocity_mode_step(const VelocityFilterState& filter, double cmd_v_fwd, double cmd_yaw_rate,
                                             double dt, const VelocityFilterConfig& cfg = {}) {
  if (!(dt > 0.0)) throw std::invalid_argument("velocity_mode_step: dt must be positive");
  VelocityFilterState f = filter;

  auto slew = [dt](double current, double target, double rate) {
    const double max_delta = rate * dt;
    return current + std::clamp(target - current, -max_delta, max_delta);
  };
  f.slewed_v_fwd = slew(f.slewed_v_fwd, cmd_v_fwd, cfg.slew_v_fwd);
  f.slewed_yaw_rate = slew(f.slewed_yaw_rate, cmd_yaw_rate, cfg.slew_yaw_rate);

  const double alpha = dt / (cfg.lowpass_tau + dt);
  f.filtered_v_fwd += alpha * (f.slewed_v_fwd - f.filtered_v_fwd);
  f.filtered_yaw_rate += alpha * (f.slewed_yaw_rate - f.filtered_yaw_rate);

  f.virtual_yaw += f.filtered_yaw_rate * dt;
  const Vec3 heading(std::cos(f.virtual_yaw), std::sin(f.virtual_yaw), 0.0);
  f.virtual_position.x() += f.filtered_v_fwd * heading.x() * dt;
  f.virtual_position.y() += f.filtered_v_fwd * heading.y() * dt;
  f.virtual_position.z() = cfg.hold_altitude;

  FlatOutputRef ref;
  ref.position = f.virtual_position;
  ref.velocity = f.filtered_v_fwd * heading;
  ref.yaw = f.virtual_yaw;
  ref.yaw_rate = f.filtered_yaw_rate;
  return {f, ref};
}

}  // namespace agrisim
