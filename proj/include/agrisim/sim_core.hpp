#pragma once

#include "agrisim/control.hpp"
#include "agrisim/dynamics.hpp"
#include "agrisim/trajectory.hpp"
#include "agrisim/vineyard.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace agrisim {

struct SimConfig {
  VehicleParams vehicle;
  Se3Gains gains;
  VelocityFilterConfig filter;
  ActionBounds action_bounds;
  double physics_hz = 500.0;
  double state_hz = 30.0;
  double watchdog_s = 0.5;
  double goal_position_tolerance = 0.1;  // m
  double goal_speed_tolerance = 0.1;     // m/s
  double goto_speed = 1.0;               // m/s, average speed for time allocation
  double goto_max_accel = 2.0;           // m/s^2, peak of the rest-to-rest profile
  double goto_max_yaw_rate = 1.0;        // rad/s, peak of the rest-to-rest profile

  double dt() const { return 1.0 / physics_hz; }

  void validate() const {
    vehicle.validate();
    gains.validate();
    filter.validate();
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
    };
    positive(physics_hz, "rates.physics_hz");
    positive(state_hz, "rates.state_hz");
    positive(watchdog_s, "sim.watchdog_s");
    positive(goal_position_tolerance, "sim.goal_position_tolerance");
    positive(goal_speed_tolerance, "sim.goal_speed_tolerance");
    positive(goto_speed, "sim.goto_speed");
    positive(goto_max_accel, "sim.goto_max_accel");
    positive(goto_max_yaw_rate, "sim.goto_max_yaw_rate");
    const auto& b = action_bounds;
    if (!(b.v_fwd_min < b.v_fwd_max) || !std::isfinite(b.v_fwd_min) || !std::isfinite(b.v_fwd_max)) {
      throw std::invalid_argument("actions.v_fwd_min must be below actions.v_fwd_max");
    }
    if (!(b.yaw_rate_min < b.yaw_rate_max) || !std::isfinite(b.yaw_rate_min) || !std::isfinite(b.yaw_rate_max)) {
      throw std::invalid_argument("actions.yaw_rate_min must be below actions.yaw_rate_max");
    }
    if (physics_hz < 100.0) throw std::invalid_argument("rates.physics_hz must be >= 100 (dt <= 0.01 s)");
    if (state_hz > physics_hz) throw std::invalid_argument("rates.state_hz must not exceed rates.physics_hz");
  }
};

enum class ControlMode { Idle, PositionYaw, Velocity };

inline const char* mode_name(ControlMode m) {
  switch (m) {
    case ControlMode::Idle: return "idle";
    case ControlMode::PositionYaw: return "position_yaw";
    case ControlMode::Velocity: return "velocity";
  }
  return "idle";
}

struct StateEvent {
  MultirotorState state;
};

struct CollisionEvent {
  double time = 0.0;
  ClassId class_id = 0;
  std::string class_name;
  Vec3 position = Vec3::Zero();
};

struct GoalReachedEvent {
  double time = 0.0;
  std::uint64_t goto_id = 0;
  Vec3 position = Vec3::Zero();
};

struct ResetDoneEvent {
  double time = 0.0;
  std::uint64_t episode_id = 0;
  std::string scenario;
  std::uint64_t seed = 0;
};

using SimEvent = std::variant<StateEvent, CollisionEvent, GoalReachedEvent, ResetDoneEvent>;

/// A command the simulator refuses; `code` is the protocol error code.
class CommandError : public std::runtime_error {
 public:
  CommandError(std::string code, const std::string& detail) : std::runtime_error(detail), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/**
 * Single-vehicle simulation: scenario, plant, controller and command modes.
 * Not thread-safe; one loop owns it and calls tick() at physics rate.
 *
 * A collision freezes the vehicle where it hit until the next reset.
 */
class SimCore {
 public:
  explicit SimCore(SimConfig config = {}, Scenario scenario = open_field_scenario())
      : config_((config.validate(), std::move(config))), model_(config_.vehicle) {
    load(std::move(scenario), 0);
  }

  const SimConfig& config() const { return config_; }
  const Scenario& scenario() const { return scenario_; }
  const Scene& scene() const { return scenario_.scene; }
  const MultirotorState& state() const { return state_; }
  double time() const { return state_.time; }
  ControlMode mode() const { return mode_; }
  bool crashed() const { return crashed_; }
  std::uint64_t episode_id() const { return episode_id_; }
  std::uint64_t tick_count() const { return ticks_; }
  std::optional<std::uint64_t> active_goto() const {
    if (mode_ != ControlMode::PositionYaw) return std::nullopt;
    return goto_id_;
  }
  const PiecewiseTrajectory& trajectory() const { return trajectory_; }
  const FlatOutputRef& reference() const { return reference_; }

  /// Start pose for the current scenario, with altitude at the hold altitude.
  Vec3 spawn_position() const {
    return {scenario_.spawn.x(), scenario_.spawn.y(), config_.filter.hold_altitude};
  }

  /// Loads a named scenario. Throws CommandError("unknown_scenario").
  std::uint64_t reset(std::string_view scenario, std::uint64_t seed) {
    Scenario s;
    try {
      s = make_scenario(scenario, seed);
    } catch (const UnknownScenario& e) {
      throw CommandError("unknown_scenario", e.what());
    }
    return load(std::move(s), seed);
  }

  /// Replaces the scene and re-spawns the vehicle at rest. Sim time keeps running.
  std::uint64_t load(Scenario s, std::uint64_t seed) {
    scenario_ = std::move(s);
    const double now = state_.time;
    state_ = MultirotorState::hover(config_.vehicle, spawn_position(), scenario_.spawn_yaw);
    state_.time = now;
    mode_ = ControlMode::Idle;
    reference_ = FlatOutputRef::hold(state_.position, scenario_.spawn_yaw);
    trajectory_ = {};
    filter_ = {};
    cmd_v_fwd_ = 0.0;
    cmd_yaw_rate_ = 0.0;
    crashed_ = false;
    goal_reported_ = true;
    ++episode_id_;
    events_.push_back(ResetDoneEvent{now, episode_id_, scenario_.name, seed});
    events_.push_back(StateEvent{state_});
    return episode_id_;
  }

  /// Plans a single min-snap segment from the current position to the target.
  std::uint64_t goto_position(const Vec3& target, double yaw) {
    if (!target.allFinite() || !std::isfinite(yaw)) throw CommandError("invalid_argument", "goto target must be finite");
    if (!scene().bounds().contains(target)) throw CommandError("out_of_bounds", "goto target outside scene bounds");
    const std::array<Vec3, 2> points{state_.position, target};
    const double current_yaw = yaw_of(state_.orientation);
    auto durations = allocate_segment_times(points, config_.goto_speed);
    // Short hops at the average speed would demand more than the airframe can
    // give; stretch so peak acceleration and yaw rate stay within limits.
    const double dist = (target - state_.position).norm();
    const double dyaw = std::abs(wrap_to_pi(yaw - current_yaw));
    durations[0] = std::max({durations[0], std::sqrt(kRestToRestPeakAccel * dist / config_.goto_max_accel),
                             kRestToRestPeakRate * dyaw / config_.goto_max_yaw_rate});
    const std::array<Waypoint, 2> wps{Waypoint{state_.position, current_yaw},
                                      Waypoint{target, current_yaw + wrap_to_pi(yaw - current_yaw)}};
    trajectory_ = min_snap_trajectory(wps, durations, state_.time);
    goto_target_ = target;
    mode_ = ControlMode::PositionYaw;
    goal_reported_ = false;
    return ++goto_id_;
  }

  /// Sets the held unicycle command, clamped to the action bounds. Returns the applied pair.
  std::pair<double, double> velocity_command(double v_fwd, double yaw_rate) {
    if (!std::isfinite(v_fwd) || !std::isfinite(yaw_rate)) {
      throw CommandError("invalid_argument", "velocity command must be finite");
    }
    cmd_v_fwd_ = config_.action_bounds.clamp_v_fwd(v_fwd);
    cmd_yaw_rate_ = config_.action_bounds.clamp_yaw_rate(yaw_rate);
    last_command_time_ = state_.time;
    if (mode_ != ControlMode::Velocity) {
      filter_ = VelocityFilterState::at(state_.position, yaw_of(state_.orientation), config_.filter.hold_altitude);
      mode_ = ControlMode::Velocity;
    }
    return {cmd_v_fwd_, cmd_yaw_rate_};
  }

  void tick() {
    const double dt = config_.dt();
    ++ticks_;
    if (crashed_) {
      state_.time += dt;
      maybe_emit_state();
      return;
    }
    switch (mode_) {
      case ControlMode::Idle: break;
      case ControlMode::PositionYaw: reference_ = trajectory_.evaluate(state_.time); break;
      case ControlMode::Velocity: {
        const bool stale = state_.time - last_command_time_ > config_.watchdog_s;
        const auto out = velocity_mode_step(filter_, stale ? 0.0 : cmd_v_fwd_, stale ? 0.0 : cmd_yaw_rate_, dt,
                                            config_.filter);
        filter_ = out.filter;
        reference_ = out.reference;
        break;
      }
    }
    const Se3Command cmd = se3_control(state_, reference_, config_.gains, config_.vehicle);
    const MixerOutput mix = model_.mixer().mix(cmd.thrust, cmd.moments);
    state_ = model_.step(state_, mix.speeds, dt);

    if (const auto hit = scene().check_collision(state_.position, config_.vehicle.collision_radius); hit.collided) {
      crashed_ = true;
      state_.velocity.setZero();
      state_.angular_velocity.setZero();
      std::string name;
      if (hit.class_id) {
        if (const auto* c = scene().find_class(*hit.class_id)) name = c->name;
      }
      events_.push_back(CollisionEvent{state_.time, hit.class_id.value_or(0), name, state_.position});
    } else if (mode_ == ControlMode::PositionYaw && !goal_reported_ &&
               (state_.position - goto_target_).norm() < config_.goal_position_tolerance &&
               state_.velocity.norm() < config_.goal_speed_tolerance) {
      goal_reported_ = true;
      events_.push_back(GoalReachedEvent{state_.time, goto_id_, state_.position});
    }
    maybe_emit_state();
  }

  void advance(std::size_t ticks) {
    for (std::size_t i = 0; i < ticks; ++i) tick();
  }

  std::vector<SimEvent> drain_events() {
    std::vector<SimEvent> out;
    out.swap(events_);
    return out;
  }

 private:
  void maybe_emit_state() {
    const auto slot = [&](std::uint64_t k) {
      return static_cast<std::uint64_t>(std::floor(static_cast<double>(k) * config_.state_hz / config_.physics_hz));
    };
    if (slot(ticks_) != slot(ticks_ - 1)) events_.push_back(StateEvent{state_});
  }

  SimConfig config_;
  QuadrotorModel model_;
  Scenario scenario_;
  MultirotorState state_;
  ControlMode mode_ = ControlMode::Idle;
  FlatOutputRef reference_;
  PiecewiseTrajectory trajectory_;
  Vec3 goto_target_ = Vec3::Zero();
  std::uint64_t goto_id_ = 0;
  bool goal_reported_ = true;
  VelocityFilterState filter_;
  double cmd_v_fwd_ = 0.0;
  double cmd_yaw_rate_ = 0.0;
  double last_command_time_ = 0.0;
  bool crashed_ = false;
  std::uint64_t episode_id_ = 0;
  std::uint64_t ticks_ = 0;
  std::vector<SimEvent> events_;
};

}  // namespace agrisim
