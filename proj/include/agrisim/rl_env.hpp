#pragma once

#include "agrisim/camera.hpp"
#include "agrisim/grid.hpp"
#include "agrisim/sim_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace agrisim {

inline constexpr int kDepthStripSize = 32;
inline constexpr int kObservationSize = kDepthStripSize + 3;
inline constexpr double kDepthClip = 10.0;  // m
inline constexpr double kVelocityNorm = 3.0;  // m/s
inline constexpr double kYawRateNorm = 1.5;   // rad/s

using Observation = std::array<double, kObservationSize>;

struct RewardConfig {
  double lambda = 1.0;
  double p_step = 0.01;
  double r_goal = 100.0;
  double r_collision = -30.0;
  double goal_radius = 1.5;  // m, horizontal
  int max_steps = 500;

  void validate() const {
    if (!std::isfinite(lambda)) throw std::invalid_argument("reward.lambda must be finite");
    if (!std::isfinite(p_step)) throw std::invalid_argument("reward.p_step must be finite");
    if (!std::isfinite(r_goal)) throw std::invalid_argument("reward.r_goal must be finite");
    if (!std::isfinite(r_collision)) throw std::invalid_argument("reward.r_collision must be finite");
    if (!(goal_radius > 0.0)) throw std::invalid_argument("reward.goal_radius must be > 0");
    if (max_steps < 1) throw std::invalid_argument("reward.max_steps must be >= 1");
  }
};

enum class Outcome { Running, Goal, Collision, Truncated };

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Running: return "running";
    case Outcome::Goal: return "goal";
    case Outcome::Collision: return "collision";
    case Outcome::Truncated: return "truncated";
  }
  return "running";
}

/// 32 block minima of a depth row, clipped to kDepthClip and scaled to [0, 1].
/// Non-finite samples (no hit) count as the clip distance.
inline std::array<double, kDepthStripSize> depth_strip(std::span<const float> row) {
  if (row.empty() || row.size() % kDepthStripSize != 0) {
    throw std::invalid_argument("depth row width must be a positive multiple of 32");
  }
  const std::size_t block = row.size() / kDepthStripSize;
  std::array<double, kDepthStripSize> out{};
  for (std::size_t b = 0; b < kDepthStripSize; ++b) {
    double m = kDepthClip;
    for (std::size_t i = b * block; i < (b + 1) * block; ++i) {
      const double d = row[i];
      if (std::isfinite(d)) m = std::min(m, std::max(d, 0.0));
    }
    out[b] = m / kDepthClip;
  }
  return out;
}

inline Observation build_observation(std::span<const float> depth_row, const MultirotorState& state, const Vec3& goal) {
  Observation obs{};
  const auto strip = depth_strip(depth_row);
  std::copy(strip.begin(), strip.end(), obs.begin());
  const double yaw = yaw_of(state.orientation);
  const double bearing = std::atan2(goal.y() - state.position.y(), goal.x() - state.position.x());
  obs[32] = std::clamp(wrap_to_pi(bearing - yaw) / std::numbers::pi, -1.0, 1.0);
  const Vec3 body_velocity = state.orientation.conjugate() * state.velocity;
  obs[33] = std::clamp(body_velocity.x() / kVelocityNorm, -1.0, 1.0);
  // Yaw rate is the world-frame z component of the body angular velocity.
  const Vec3 world_rate = state.orientation * state.angular_velocity;
  obs[34] = std::clamp(world_rate.z() / kYawRateNorm, -1.0, 1.0);
  return obs;
}

/// Uses row height/2 of a full depth image.
inline Observation build_observation(const DepthImage& depth, const MultirotorState& state, const Vec3& goal) {
  if (depth.width <= 0 || depth.height <= 0) throw std::invalid_argument("depth image is empty");
  const auto row = static_cast<std::size_t>(depth.height / 2) * static_cast<std::size_t>(depth.width);
  return build_observation(std::span<const float>(depth.data).subspan(row, static_cast<std::size_t>(depth.width)),
                           state, goal);
}

struct RewardTerms {
  double reward = 0.0;
  double progress = 0.0;
  bool unreachable = false;  // progress fell back to 0
};

inline RewardTerms compute_reward(std::optional<double> d_prev, std::optional<double> d_curr, Outcome outcome,
                                  const RewardConfig& cfg) {
  RewardTerms t;
  if (d_prev && d_curr) {
    t.progress = cfg.lambda * (*d_prev - *d_curr);
  } else {
    t.unreachable = true;
  }
  double terminal = 0.0;
  if (outcome == Outcome::Goal) terminal = cfg.r_goal;
  if (outcome == Outcome::Collision) terminal = cfg.r_collision;
  t.reward = t.progress - cfg.p_step + terminal;
  return t;
}

inline RewardTerms compute_reward(double d_prev, double d_curr, Outcome outcome, const RewardConfig& cfg) {
  return compute_reward(std::optional<double>(d_prev), std::optional<double>(d_curr), outcome, cfg);
}

class EnvError : public std::runtime_error {
 public:
  EnvError(std::string code, const std::string& detail) : std::runtime_error(detail), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct EnvInfo {
  std::uint64_t episode_id = 0;
  std::uint64_t seed = 0;  // seed actually used after regeneration
  std::string scenario;
  int step = 0;
  Outcome outcome = Outcome::Running;
  std::optional<double> distance;  // A* distance to goal, nullopt if unreachable
  double d0 = 0.0;
  double progress = 0.0;
  bool unreachable = false;
  double applied_v_fwd = 0.0;
  double applied_yaw_rate = 0.0;
  Vec3 goal = Vec3::Zero();
  MultirotorState state;
};

struct StepResult {
  Observation obs{};
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  EnvInfo info;
};

struct EnvConfig {
  RewardConfig reward;
  CameraModel camera = CameraModel::rl_default();
  double agent_hz = 10.0;
  double grid_cell = 0.5;                     // m
  std::optional<double> grid_inflation;       // defaults to the vehicle collision radius
  int reset_attempts = 10;

  void validate(const SimConfig& sim) const {
    reward.validate();
    camera.validate();
    if (camera.width % kDepthStripSize != 0) throw std::invalid_argument("rl.camera.width must be divisible by 32");
    if (!(agent_hz > 0.0)) throw std::invalid_argument("rates.agent_hz must be > 0");
    if (agent_hz > sim.physics_hz) throw std::invalid_argument("rates.agent_hz must not exceed rates.physics_hz");
    if (!(grid_cell > 0.0)) throw std::invalid_argument("rl.grid_cell must be > 0");
    if (grid_inflation && !(*grid_inflation >= 0.0)) throw std::invalid_argument("rl.grid_inflation must be >= 0");
    if (reset_attempts < 1) throw std::invalid_argument("rl.reset_attempts must be >= 1");
  }
};

/**
 * Episode loop over a SimCore. While an episode runs, sim time advances only
 * through step(): each step holds the action for one agent interval of
 * physics ticks, then renders the centre depth row and scores progress by
 * A* distance on a grid rasterised once per episode.
 */
class RlEnv {
 public:
  RlEnv(SimCore& core, EnvConfig config = {}) : core_(core), config_(std::move(config)) {
    config_.validate(core_.config());
    ticks_per_step_ = static_cast<std::size_t>(std::llround(core_.config().physics_hz / config_.agent_hz));
    if (ticks_per_step_ == 0) ticks_per_step_ = 1;
  }

  const EnvConfig& config() const { return config_; }
  std::size_t ticks_per_step() const { return ticks_per_step_; }
  bool active() const { return active_; }
  bool done() const { return done_; }
  const OccupancyGrid& grid() const { return grid_; }
  const EnvInfo& info() const { return info_; }

  /// Ends the episode without a result, e.g. when another command takes over.
  void abandon() { active_ = false; }

  /// Regenerates the scenario with seed, seed+1, ... until the goal is
  /// reachable on the grid. Throws EnvError("unknown_scenario"|"unreachable").
  StepResult reset(std::uint64_t seed, std::string_view scenario) {
    for (int attempt = 0; attempt < config_.reset_attempts; ++attempt) {
      const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
      Scenario sc;
      try {
        sc = make_scenario(scenario, s);
      } catch (const UnknownScenario& e) {
        throw EnvError("unknown_scenario", e.what());
      }
      if (auto r = try_start(std::move(sc), s)) return *r;
    }
    throw EnvError("unreachable", "goal unreachable after " + std::to_string(config_.reset_attempts) + " seeds");
  }

  /// Starts an episode on an explicit scenario (no regeneration).
  StepResult reset(Scenario scenario, std::uint64_t seed = 0) {
    if (auto r = try_start(std::move(scenario), seed)) return *r;
    throw EnvError("unreachable", "goal unreachable in the given scenario");
  }

  StepResult step(double v_fwd, double yaw_rate) {
    if (!active_) throw EnvError("no_episode", "env_step before env_reset");
    if (done_) throw EnvError("episode_done", "env_step after the episode ended");
    if (!std::isfinite(v_fwd) || !std::isfinite(yaw_rate)) throw EnvError("invalid_argument", "action must be finite");
    for (std::size_t i = 0; i < ticks_per_step_; ++i) {
      // Re-issue each tick so the watchdog never fires inside a held step.
      const auto applied = core_.velocity_command(v_fwd, yaw_rate);
      info_.applied_v_fwd = applied.first;
      info_.applied_yaw_rate = applied.second;
      core_.tick();
      if (core_.crashed()) {
        core_.advance(ticks_per_step_ - i - 1);
        break;
      }
    }
    ++info_.step;

    const auto& st = core_.state();
    Outcome outcome = Outcome::Running;
    if (core_.crashed()) {
      outcome = Outcome::Collision;
    } else if (horizontal_goal_distance(st.position) < config_.reward.goal_radius) {
      outcome = Outcome::Goal;
    } else if (info_.step >= config_.reward.max_steps) {
      outcome = Outcome::Truncated;
    }

    const auto d_curr = distance_to_goal(st.position);
    const auto terms = compute_reward(info_.distance, d_curr, outcome, config_.reward);
    info_.distance = d_curr;
    info_.progress = terms.progress;
    info_.unreachable = terms.unreachable;
    info_.outcome = outcome;
    info_.state = st;

    StepResult r;
    r.obs = observe();
    r.reward = terms.reward;
    r.terminated = outcome == Outcome::Goal || outcome == Outcome::Collision;
    r.truncated = outcome == Outcome::Truncated;
    r.info = info_;
    done_ = r.terminated || r.truncated;
    return r;
  }

  Observation observe() const {
    const auto row = render_depth_row(core_.scene(), config_.camera.world_pose(core_.state()), config_.camera,
                                      config_.camera.height / 2);
    return build_observation(row, core_.state(), info_.goal);
  }

  double horizontal_goal_distance(const Vec3& p) const {
    return std::hypot(info_.goal.x() - p.x(), info_.goal.y() - p.y());
  }

  /// A* distance to the goal; positions off the grid count as unreachable.
  std::optional<double> distance_to_goal(const Vec3& p) const {
    if (!grid_.cell_of(p.x(), p.y())) return std::nullopt;
    return astar_distance(grid_, p, info_.goal);
  }

 private:
  std::optional<StepResult> try_start(Scenario sc, std::uint64_t seed) {
    const double inflation = config_.grid_inflation.value_or(core_.config().vehicle.collision_radius);
    const double altitude = core_.config().filter.hold_altitude;
    OccupancyGrid grid = rasterize_scene_to_grid(sc.scene, config_.grid_cell, inflation, altitude);
    const Vec3 spawn(sc.spawn.x(), sc.spawn.y(), altitude);
    if (!grid.cell_of(spawn.x(), spawn.y()) || !grid.cell_of(sc.goal.x(), sc.goal.y())) return std::nullopt;
    const auto d0 = astar_distance(grid, spawn, sc.goal);
    if (!d0) return std::nullopt;

    grid_ = std::move(grid);
    const std::string name = sc.name;
    const Vec3 goal = sc.goal;
    const std::uint64_t episode = core_.load(std::move(sc), seed);
    info_ = EnvInfo{};
    info_.episode_id = episode;
    info_.seed = seed;
    info_.scenario = name;
    info_.goal = goal;
    info_.distance = d0;
    info_.d0 = *d0;
    info_.state = core_.state();
    active_ = true;
    done_ = false;

    StepResult r;
    r.obs = observe();
    r.info = info_;
    return r;
  }

  SimCore& core_;
  EnvConfig config_;
  std::size_t ticks_per_step_ = 50;
  OccupancyGrid grid_;
  EnvInfo info_;
  bool active_ = false;
  bool done_ = false;
};

}  // namespace agrisim
