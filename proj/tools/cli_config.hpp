#pragma once

#include "agrisim/rl_env.hpp"
#include "agrisim/scene_io.hpp"
#include "agrisim/sim_server.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>

// Every tunable is a dotted long option ("--control.k_pos"), and a TOML file
// passed with --config fills the same options from [section] key = value.
// Flags on the command line win over the file.

namespace agrisim::cli {

struct CameraSpec {
  int width = 320;
  int height = 240;
  double hfov_deg = 90.0;
  double max_depth = 30.0;

  CameraModel model() const { return CameraModel::pinhole(width, height, hfov_deg * std::numbers::pi / 180.0, max_depth); }
};

struct AppConfig {
  SimConfig sim;
  EnvConfig env;
  ServeOptions serve;
  CameraSpec camera;         // published by serve
  CameraSpec rl_camera;      // observation render
  std::string scenario;      // empty: the subcommand's default
  std::uint64_t seed = 0;
  std::string scene_path;    // overrides the generated scene
  std::optional<Vec3> spawn;
  double spawn_yaw = 0.0;
  std::optional<Vec3> goal;
  std::string config_path;
  std::string format = "csv";

  /// Copies the camera specs into the models and checks every section.
  /// Throws std::invalid_argument naming the offending key.
  void finalize() {
    serve.camera = camera.model();
    env.camera = rl_camera.model();
    sim.validate();
    env.validate(sim);
    serve.validate(sim);
  }

  /// The scenario to start in: a scene file if given, else a named generator.
  Scenario make_start_scenario(const std::string& fallback) const {
    if (!scene_path.empty()) {
      Scenario s;
      s.name = std::filesystem::path(scene_path).stem().string();
      s.scene = load_scene(scene_path);
      const auto& b = s.scene.bounds();
      s.spawn = spawn.value_or(Vec3(b.min.x() + 1.0, 0.5 * (b.min.y() + b.max.y()), sim.filter.hold_altitude));
      s.spawn_yaw = spawn_yaw;
      s.goal = goal.value_or(Vec3(b.max.x() - 1.0, s.spawn.y(), sim.filter.hold_altitude));
      return s;
    }
    Scenario s = make_scenario(scenario.empty() ? fallback : scenario, seed);
    if (spawn) s.spawn = *spawn;
    if (goal) s.goal = *goal;
    return s;
  }
};

namespace detail {

inline CLI::Option* vec3_option(CLI::App& app, const std::string& name, Vec3& target, const std::string& help) {
  const std::string def = std::to_string(target.x()) + " " + std::to_string(target.y()) + " " + std::to_string(target.z());
  return app
      .add_option_function<std::vector<double>>(
          name, [&target](const std::vector<double>& v) { target = Vec3(v[0], v[1], v[2]); }, help)
      ->expected(3)
      ->default_str(def);
}

inline CLI::Option* optional_vec3_option(CLI::App& app, const std::string& name, std::optional<Vec3>& target,
                                         const std::string& help) {
  return app
      .add_option_function<std::vector<double>>(
          name, [&target](const std::vector<double>& v) { target = Vec3(v[0], v[1], v[2]); }, help)
      ->expected(3);
}

}  // namespace detail

/// Registers the shared configuration flags on the top-level app.
inline void add_config_options(CLI::App& app, AppConfig& c) {
  using detail::vec3_option;
  app.add_option("--config", c.config_path, "TOML configuration file; flags override its values")
      ->check(CLI::ExistingFile);
  app.add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  auto* g = app.add_option_group("vehicle", "Airframe");
  auto& v = c.sim.vehicle;
  g->add_option("--vehicle.mass", v.mass, "kg")->capture_default_str();
  vec3_option(*g, "--vehicle.inertia_diag", v.inertia_diag, "kg m^2, body principal axes");
  g->add_option("--vehicle.arm_length", v.arm_length, "m")->capture_default_str();
  g->add_option("--vehicle.thrust_coeff", v.thrust_coeff, "N s^2/rad^2")->capture_default_str();
  g->add_option("--vehicle.moment_coeff", v.moment_coeff, "N m s^2/rad^2")->capture_default_str();
  g->add_option("--vehicle.rotor_speed_max", v.rotor_speed_max, "rad/s")->capture_default_str();
  g->add_option("--vehicle.motor_time_constant", v.motor_time_constant, "s")->capture_default_str();
  g->add_option("--vehicle.collision_radius", v.collision_radius, "m")->capture_default_str();
  g->add_option("--vehicle.drag_coeff", v.drag_coeff, "N s/m")->capture_default_str();
  g->add_option("--vehicle.gravity", v.gravity, "m/s^2")->capture_default_str();

  g = app.add_option_group("control", "SE(3) controller gains");
  vec3_option(*g, "--control.k_pos", c.sim.gains.k_pos, "1/s^2");
  vec3_option(*g, "--control.k_vel", c.sim.gains.k_vel, "1/s");
  vec3_option(*g, "--control.k_rot", c.sim.gains.k_rot, "1/s^2");
  vec3_option(*g, "--control.k_omega", c.sim.gains.k_omega, "1/s");

  g = app.add_option_group("filter", "Velocity command filter");
  g->add_option("--filter.slew_v_fwd", c.sim.filter.slew_v_fwd, "m/s^2")->capture_default_str();
  g->add_option("--filter.slew_yaw_rate", c.sim.filter.slew_yaw_rate, "rad/s^2")->capture_default_str();
  g->add_option("--filter.lowpass_tau", c.sim.filter.lowpass_tau, "s")->capture_default_str();
  g->add_option("--filter.hold_altitude", c.sim.filter.hold_altitude, "m")->capture_default_str();

  g = app.add_option_group("actions", "Velocity command bounds");
  auto& b = c.sim.action_bounds;
  g->add_option("--actions.v_fwd_min", b.v_fwd_min, "m/s")->capture_default_str();
  g->add_option("--actions.v_fwd_max", b.v_fwd_max, "m/s")->capture_default_str();
  g->add_option("--actions.yaw_rate_min", b.yaw_rate_min, "rad/s")->capture_default_str();
  g->add_option("--actions.yaw_rate_max", b.yaw_rate_max, "rad/s")->capture_default_str();

  g = app.add_option_group("rates", "Loop rates");
  g->add_option("--rates.physics_hz", c.sim.physics_hz, "Hz")->capture_default_str();
  g->add_option("--rates.state_hz", c.sim.state_hz, "WebSocket state broadcast, Hz")->capture_default_str();
  g->add_option("--rates.sensor_hz", c.serve.sensor_hz, "odom/tf/clock topics, Hz")->capture_default_str();
  g->add_option("--rates.camera_hz", c.serve.camera_hz, "camera topics, Hz (0 disables)")->capture_default_str();
  g->add_option("--rates.agent_hz", c.env.agent_hz, "RL step rate, Hz")->capture_default_str();

  g = app.add_option_group("sim", "Command handling");
  g->add_option("--sim.watchdog_s", c.sim.watchdog_s, "s")->capture_default_str();
  g->add_option("--sim.goal_position_tolerance", c.sim.goal_position_tolerance, "m")->capture_default_str();
  g->add_option("--sim.goal_speed_tolerance", c.sim.goal_speed_tolerance, "m/s")->capture_default_str();
  g->add_option("--sim.goto_speed", c.sim.goto_speed, "m/s")->capture_default_str();
  g->add_option("--sim.goto_max_accel", c.sim.goto_max_accel, "m/s^2")->capture_default_str();
  g->add_option("--sim.goto_max_yaw_rate", c.sim.goto_max_yaw_rate, "rad/s")->capture_default_str();

  g = app.add_option_group("reward", "RL reward");
  auto& r = c.env.reward;
  g->add_option("--reward.lambda", r.lambda)->capture_default_str();
  g->add_option("--reward.p_step", r.p_step)->capture_default_str();
  g->add_option("--reward.r_goal", r.r_goal)->capture_default_str();
  g->add_option("--reward.r_collision", r.r_collision)->capture_default_str();
  g->add_option("--reward.goal_radius", r.goal_radius, "m")->capture_default_str();
  g->add_option("--reward.max_steps", r.max_steps)->capture_default_str();

  g = app.add_option_group("rl", "RL environment");
  g->add_option("--rl.grid_cell", c.env.grid_cell, "m")->capture_default_str();
  g->add_option_function<double>(
      "--rl.grid_inflation", [&c](double x) { c.env.grid_inflation = x; }, "m (default: vehicle.collision_radius)");
  g->add_option("--rl.reset_attempts", c.env.reset_attempts)->capture_default_str();
  g->add_option("--rl.camera_width", c.rl_camera.width)->capture_default_str();
  g->add_option("--rl.camera_height", c.rl_camera.height)->capture_default_str();
  g->add_option("--rl.camera_hfov_deg", c.rl_camera.hfov_deg)->capture_default_str();

  g = app.add_option_group("camera", "Published camera");
  g->add_option("--camera.width", c.camera.width)->capture_default_str();
  g->add_option("--camera.height", c.camera.height)->capture_default_str();
  g->add_option("--camera.hfov_deg", c.camera.hfov_deg)->capture_default_str();
  g->add_option("--camera.max_depth", c.camera.max_depth, "m")->capture_default_str();

  g = app.add_option_group("scenario", "World");
  g->add_option("--scenario.name", c.scenario, "vineyard_default | tree_inspection | open_field");
  g->add_option("--scenario.seed", c.seed)->capture_default_str();
  g->add_option("--scenario.scene_path", c.scene_path, "JSON scene file")->check(CLI::ExistingFile);
  detail::optional_vec3_option(*g, "--scenario.spawn", c.spawn, "m");
  g->add_option("--scenario.spawn_yaw", c.spawn_yaw, "rad")->capture_default_str();
  detail::optional_vec3_option(*g, "--scenario.goal", c.goal, "m");

  g = app.add_option_group("server", "WebSocket server");
  g->add_option("--server.address", c.serve.ws.address)->capture_default_str();
  g->add_option("--server.port,--port", c.serve.ws.port, "0 picks a free port")->capture_default_str();
  g->add_option("--server.path", c.serve.ws.path)->capture_default_str();
  g->add_option("--server.max_queue", c.serve.ws.max_queue, "messages per client before disconnect")
      ->capture_default_str();
}

/// Fills options not given on the command line from the TOML file.
/// Unknown keys are errors so typos do not pass silently.
inline void apply_config_file(CLI::App& app, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  const auto items = CLI::ConfigTOML().from_config(in);
  for (const auto& it : items) {
    if (it.name == "++" || it.name == "--") continue;  // section markers
    std::string key;
    for (const auto& p : it.parents) key += p + ".";
    key += it.name;
    CLI::Option* opt = app.get_option_no_throw("--" + key);
    if (!opt || key == "config") throw std::invalid_argument("config: unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    try {
      opt->add_result(it.inputs);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw std::invalid_argument("config: " + key + ": " + e.what());
    }
  }
}

}  // namespace agrisim::cli
