#pragma once

#include "agrisim/frames.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace agrisim {

/// Quadrotor parameters. Defaults describe a 500-class X quad.
struct VehicleParams {
  double mass = 0.8;                       // kg
  Vec3 inertia_diag{5e-3, 5e-3, 8e-3};     // kg m^2
  double arm_length = 0.17;                // m, centre to rotor
  double thrust_coeff = 2.3e-6;            // N s^2 / rad^2
  double moment_coeff = 4.0e-8;            // N m s^2 / rad^2
  double rotor_speed_max = 1500.0;         // rad/s
  double motor_time_constant = 0.05;       // s
  double collision_radius = 0.3;           // m
  double drag_coeff = 0.1;                 // N s / m, linear
  double gravity = 9.81;                   // m/s^2

  Mat3 inertia() const { return inertia_diag.asDiagonal(); }

  double hover_rotor_speed() const { return std::sqrt(mass * gravity / (4.0 * thrust_coeff)); }

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string("vehicle.") + name + " must be positive and finite");
      }
    };
    positive(mass, "mass");
    positive(inertia_diag.x(), "inertia_diag");
    positive(inertia_diag.y(), "inertia_diag");
    positive(inertia_diag.z(), "inertia_diag");
    positive(arm_length, "arm_length");
    positive(thrust_coeff, "thrust_coeff");
    positive(moment_coeff, "moment_coeff");
    positive(rotor_speed_max, "rotor_speed_max");
    positive(motor_time_constant, "motor_time_constant");
    positive(collision_radius, "collision_radius");
    positive(gravity, "gravity");
    if (drag_coeff < 0.0 || !std::isfinite(drag_coeff)) {
      throw std::invalid_argument("vehicle.drag_coeff must be non-negative");
    }
    if (rotor_speed_max <= hover_rotor_speed()) {
      throw std::invalid_argument("vehicle.rotor_speed_max must exceed the hover rotor speed");
    }
  }
};

using RotorSpeeds = std::array<double, 4>;

struct MultirotorState {
  Vec3 position = Vec3::Zero();           // m, Z-up world
  Vec3 velocity = Vec3::Zero();           // m/s, world
  UnitQuaternion orientation = UnitQuaternion::Identity();  // body -> world
  Vec3 angular_velocity = Vec3::Zero();   // rad/s, body
  RotorSpeeds rotor_speeds{0.0, 0.0, 0.0, 0.0};
  double time = 0.0;

  static MultirotorState hover(const VehicleParams& params, const Vec3& position, double yaw = 0.0) {
    MultirotorState s;
    s.position = position;
    s.orientation = quaternion_from_yaw(yaw);
    s.rotor_speeds.fill(params.hover_rotor_speed());
    return s;
  }
};

struct Wrench {
  double thrust = 0.0;          // N along body z
  Vec3 moments = Vec3::Zero();  // N m, body
};

struct MixerOutput {
  RotorSpeeds speeds{};
  Wrench achieved;        // forward map of `speeds`
  bool saturated = false;
};

/**
 * X-configuration rotor layout. Rotor i sits at (x_i, y_i) in the body frame
 * and spins with direction s_i; its reaction torque about body z is
 * s_i * k_m * w_i^2.
 *
 *        0 (+x,+y, s=-1)     3 (+x,-y, s=+1)
 *        1 (-x,+y, s=+1)     2 (-x,-y, s=-1)
 */
class MotorMixer {
 public:
  explicit MotorMixer(const VehicleParams& params) : params_(params) {
    const double d = params.arm_length / std::sqrt(2.0);
    const std::array<double, 4> xs{d, -d, -d, d};
    const std::array<double, 4> ys{d, d, -d, -d};
    const std::array<double, 4> spin{-1.0, 1.0, -1.0, 1.0};
    for (int i = 0; i < 4; ++i) {
      allocation_(0, i) = params.thrust_coeff;
      allocation_(1, i) = params.thrust_coeff * ys[i];
      allocation_(2, i) = -params.thrust_coeff * xs[i];
      allocation_(3, i) = params.moment_coeff * spin[i];
    }
    inverse_ = allocation_.inverse();
  }

  /// Squared rotor speeds -> (thrust, roll, pitch, yaw moment).
  const Eigen::Matrix4d& allocation() const { return allocation_; }

  Wrench forward(const RotorSpeeds& speeds) const {
    Eigen::Vector4d sq;
    for (int i = 0; i < 4; ++i) sq[i] = speeds[i] * speeds[i];
    const Eigen::Vector4d w = allocation_ * sq;
    return {w[0], w.tail<3>()};
  }

  MixerOutput mix(double thrust, const Vec3& moments) const {
    MixerOutput out;
    const Eigen::Vector4d sq = inverse_ * Eigen::Vector4d(std::max(thrust, 0.0), moments.x(), moments.y(), moments.z());
    const double max_sq = params_.rotor_speed_max * params_.rotor_speed_max;
    for (int i = 0; i < 4; ++i) {
      double u = sq[i];
      if (u < 0.0) {
        u = 0.0;
        out.saturated = true;
      } else if (u > max_sq) {
        u = max_sq;
        out.saturated = true;
      }
      out.speeds[i] = std::sqrt(u);
    }
    out.achieved = forward(out.speeds);
    return out;
  }

 private:
  VehicleParams params_;
  Eigen::Matrix4d allocation_;
  Eigen::Matrix4d inverse_;
};

inline MixerOutput motor_mixing(const VehicleParams& params, double thrust, const Vec3& moments) {
  return MotorMixer(params).mix(thrust, moments);
}

/// Raised when a state derivative is not finite. `field` names the culprit.
class DynamicsError : public std::runtime_error {
 public:
  DynamicsError(std::string field, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

namespace detail {

// Flat integration vector: p(3) v(3) q(4: w x y z) w(3) rotors(4).
using StateVector = Eigen::Matrix<double, 17, 1>;

inline StateVector pack(const MultirotorState& s) {
  StateVector x;
  x.segment<3>(0) = s.position;
  x.segment<3>(3) = s.velocity;
  x[6] = s.orientation.w();
  x[7] = s.orientation.x();
  x[8] = s.orientation.y();
  x[9] = s.orientation.z();
  x.segment<3>(10) = s.angular_velocity;
  for (int i = 0; i < 4; ++i) x[13 + i] = s.rotor_speeds[i];
  return x;
}

inline MultirotorState unpack(const StateVector& x, double time) {
  MultirotorState s;
  s.position = x.segment<3>(0);
  s.velocity = x.segment<3>(3);
  s.orientation = UnitQuaternion(x[6], x[7], x[8], x[9]);
  s.angular_velocity = x.segment<3>(10);
  for (int i = 0; i < 4; ++i) s.rotor_speeds[i] = x[13 + i];
  s.time = time;
  return s;
}

}  // namespace detail

/**
 * Rigid-body quadrotor model: first-order motors, Newton-Euler with linear
 * drag, integrated with classical RK4. The integrator is deterministic and
 * allocation-free.
 */
class QuadrotorModel {
 public:
  explicit QuadrotorModel(VehicleParams params) : params_(std::move(params)), mixer_(params_) {
    inertia_ = params_.inertia();
    inertia_inv_ = inertia_.inverse();
  }

  const VehicleParams& params() const { return params_; }
  const MotorMixer& mixer() const { return mixer_; }

  detail::StateVector derivative(const detail::StateVector& x, const RotorSpeeds& cmd) const {
    detail::StateVector dx;
    const Vec3 v = x.segment<3>(3);
    const Eigen::Quaterniond q(x[6], x[7], x[8], x[9]);
    const Vec3 w = x.segment<3>(10);

    RotorSpeeds speeds;
    for (int i = 0; i < 4; ++i) speeds[i] = x[13 + i];
    const Wrench wrench = mixer_.forward(speeds);

    // q is not renormalised inside a step; rotate with the explicit formula
    // so a slightly non-unit q does not get silently normalised.
    const Vec3 body_thrust(0.0, 0.0, wrench.thrust);
    const Vec3 world_thrust = rotate(q, body_thrust);
    const Vec3 accel = world_thrust / params_.mass - Vec3(0.0, 0.0, params_.gravity) -
                       params_.drag_coeff * v / params_.mass;

    const Eigen::Quaterniond w_quat(0.0, w.x(), w.y(), w.z());
    const Eigen::Quaterniond q_dot = q * w_quat;

    const Vec3 w_dot = inertia_inv_ * (wrench.moments - w.cross(inertia_ * w));

    dx.segment<3>(0) = v;
    dx.segment<3>(3) = accel;
    dx[6] = 0.5 * q_dot.w();
    dx[7] = 0.5 * q_dot.x();
    dx[8] = 0.5 * q_dot.y();
    dx[9] = 0.5 * q_dot.z();
    dx.segment<3>(10) = w_dot;
    for (int i = 0; i < 4; ++i) dx[13 + i] = (cmd[i] - x[13 + i]) / params_.motor_time_constant;
    check_finite(dx);
    return dx;
  }

  /// One RK4 step; dt must lie in (0, 0.01].
  MultirotorState step(const MultirotorState& state, const RotorSpeeds& rotor_cmd, double dt) const {
    if (!(dt > 0.0) || dt > 0.01) throw std::invalid_argument("step_dynamics: dt must lie in (0, 0.01]");
    const RotorSpeeds cmd = clamp_command(rotor_cmd);
    const detail::StateVector x = detail::pack(state);
    const detail::StateVector k1 = derivative(x, cmd);
    const detail::StateVector k2 = derivative(x + 0.5 * dt * k1, cmd);
    const detail::StateVector k3 = derivative(x + 0.5 * dt * k2, cmd);
    const detail::StateVector k4 = derivative(x + dt * k3, cmd);
    const detail::StateVector next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    MultirotorState out = detail::unpack(next, state.time + dt);
    out.orientation.normalize();
    for (double& w : out.rotor_speeds) w = std::clamp(w, 0.0, params_.rotor_speed_max);
    return out;
  }

  /// Single explicit Euler step without renormalisation. Reference integrator for tests.
  MultirotorState euler_step(const MultirotorState& state, const RotorSpeeds& rotor_cmd, double dt) const {
    const detail::StateVector x = detail::pack(state);
    const detail::StateVector next = x + dt * derivative(x, clamp_command(rotor_cmd));
    return detail::unpack(next, state.time + dt);
  }

  RotorSpeeds clamp_command(const RotorSpeeds& cmd) const {
    RotorSpeeds out;
    for (int i = 0; i < 4; ++i) out[i] = std::clamp(cmd[i], 0.0, params_.rotor_speed_max);
    return out;
  }

 private:
  static Vec3 rotate(const Eigen::Quaterniond& q, const Vec3& v) {
    const Eigen::Quaterniond p(0.0, v.x(), v.y(), v.z());
    const Eigen::Quaterniond r = q * p * q.conjugate();
    return {r.x(), r.y(), r.z()};
  }

  static void check_finite(const detail::StateVector& dx) {
    static constexpr const char* names[] = {"position", "velocity", "orientation", "angular_velocity", "rotor_speeds"};
    static constexpr int starts[] = {0, 3, 6, 10, 13, 17};
    for (int f = 0; f < 5; ++f) {
      for (int i = starts[f]; i < starts[f + 1]; ++i) {
        if (!std::isfinite(dx[i])) {
          throw DynamicsError(names[f], std::string("step_dynamics: non-finite derivative of ") + names[f]);
        }
      }
    }
  }

  VehicleParams params_;
  MotorMixer mixer_;
  Mat3 inertia_;
  Mat3 inertia_inv_;
};

inline MultirotorState step_dynamics(const MultirotorState& state, const RotorSpeeds& rotor_cmd, double dt,
                                     const VehicleParams& params = {}) {
  return QuadrotorModel(params).step(state, rotor_cmd, dt);
}

inline double kinetic_plus_potential_energy(const MultirotorState& s, const VehicleParams& p) {
  const double linear = 0.5 * p.mass * s.velocity.squaredNorm();
  const double angular = 0.5 * s.angular_velocity.dot(p.inertia() * s.angular_velocity);
  return linear + angular + p.mass * p.gravity * s.position.z();
}

}  // namespace agrisim
