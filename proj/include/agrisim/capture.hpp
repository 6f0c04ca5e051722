#pragma once

#include "agrisim/camera.hpp"
#include "agrisim/missions.hpp"
#include "agrisim/sim_core.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace agrisim {

namespace image_io {

/// Binary PPM (P6), 8-bit RGB.
inline void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
}

/// 16-bit binary PGM (P5, big-endian samples as the format requires).
inline void write_pgm16(const std::filesystem::path& path, const SegImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << img.width << ' ' << img.height << "\n65535\n";
  std::vector<char> bytes(img.data.size() * 2);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    bytes[2 * i] = static_cast<char>(img.data[i] >> 8);
    bytes[2 * i + 1] = static_cast<char>(img.data[i] & 0xFF);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

/// Greyscale PFM, little-endian (negative scale), rows stored bottom to top.
/// No-hit pixels keep their +inf value.
inline void write_pfm(const std::filesystem::path& path, const DepthImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "Pf\n" << img.width << ' ' << img.height << "\n-1.0\n";
  for (int v = img.height - 1; v >= 0; --v) {
    out.write(reinterpret_cast<const char*>(img.data.data() + static_cast<std::size_t>(v) * img.width),
              static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(img.width)));
  }
}

}  // namespace image_io

struct CaptureOptions {
  CameraModel camera = CameraModel::capture_default();
  double goal_timeout_s = 60.0;   // sim seconds per waypoint
  double settle_yaw_tol = 0.2 * std::numbers::pi / 180.0;
  double settle_position_tol = 0.02;
  double settle_rate_tol = 0.02;  // m/s and rad/s
  double settle_timeout_s = 5.0;  // extra sim time allowed after GoalReached
  /// Called after every physics tick, e.g. for real-time pacing or publishing.
  std::function<void(SimCore&)> on_tick;
};

struct CapturedView {
  std::string name;
  Pose camera_pose;  // camera -> world, optical frame
  Vec3 vehicle_position = Vec3::Zero();
  double vehicle_yaw = 0.0;
};

struct CaptureResult {
  std::size_t waypoints = 0;
  std::size_t completed = 0;
  bool complete = false;
  std::string failure;  // empty when complete
  double sim_duration = 0.0;
  std::vector<CapturedView> views;
};

/**
 * Flies to each waypoint in turn, waits for GoalReached and for the vehicle to
 * settle, then renders and stores RGB (flat class colours), depth and
 * segmentation with the exact camera pose. Writes
 *   images/NNN_rgb.ppm, images/NNN_depth.pfm, images/NNN_seg.pgm
 *   poses.txt      name x y z qw qx qy qz (camera to world)
 *   manifest.json  counts, completion state, intrinsics
 * A waypoint that times out or a collision stops the run; what was captured
 * so far stays on disk and the manifest records the failure.
 */
inline CaptureResult run_capture_mission(SimCore& core, const std::vector<CaptureWaypoint>& waypoints,
                                         const std::filesystem::path& out_dir, const CaptureOptions& opt = {}) {
  namespace fs = std::filesystem;
  opt.camera.validate();
  fs::create_directories(out_dir / "images");
  std::ofstream poses(out_dir / "poses.txt");
  if (!poses) throw std::runtime_error("cannot write " + (out_dir / "poses.txt").string());
  poses << "# name x y z qw qx qy qz (camera to world, optical frame: z forward, x right, y down)\n";
  poses.precision(12);

  CaptureResult result;
  result.waypoints = waypoints.size();
  const double t_start = core.time();

  auto step = [&] {
    core.tick();
    if (opt.on_tick) opt.on_tick(core);
  };

  for (std::size_t k = 0; k < waypoints.size() && result.failure.empty(); ++k) {
    const auto& wp = waypoints[k];
    std::uint64_t id = 0;
    try {
      id = core.goto_position(wp.position, wp.yaw);
    } catch (const CommandError& e) {
      result.failure = "waypoint " + std::to_string(k) + ": " + e.code();
      break;
    }
    bool reached = false;
    const double deadline = core.time() + opt.goal_timeout_s;
    while (!reached && core.time() < deadline) {
      step();
      for (const auto& ev : core.drain_events()) {
        if (const auto* g = std::get_if<GoalReachedEvent>(&ev); g && g->goto_id == id) reached = true;
      }
      if (core.crashed()) break;
    }
    if (core.crashed()) {
      result.failure = "waypoint " + std::to_string(k) + ": collision";
      break;
    }
    if (!reached) {
      result.failure = "waypoint " + std::to_string(k) + ": goal_timeout";
      break;
    }
    const double settle_deadline = core.time() + opt.settle_timeout_s;
    auto settled = [&] {
      const auto& s = core.state();
      return core.time() >= core.trajectory().end_time() &&
             (s.position - wp.position).norm() < opt.settle_position_tol &&
             std::abs(wrap_to_pi(yaw_of(s.orientation) - wp.yaw)) < opt.settle_yaw_tol &&
             s.velocity.norm() < opt.settle_rate_tol && s.angular_velocity.norm() < opt.settle_rate_tol;
    };
    while (!settled() && core.time() < settle_deadline) {
      step();
      (void)core.drain_events();
    }

    char stem[16];
    std::snprintf(stem, sizeof stem, "%03zu", k);
    const Pose cam = opt.camera.world_pose(core.state());
    const auto frame = render(core.scene(), cam, opt.camera);
    image_io::write_ppm(out_dir / "images" / (std::string(stem) + "_rgb.ppm"), colorize(core.scene(), frame.seg));
    image_io::write_pfm(out_dir / "images" / (std::string(stem) + "_depth.pfm"), frame.depth);
    image_io::write_pgm16(out_dir / "images" / (std::string(stem) + "_seg.pgm"), frame.seg);

    const std::string name = std::string(stem) + "_rgb.ppm";
    const auto& q = cam.rotation;
    poses << name << ' ' << cam.translation.x() << ' ' << cam.translation.y() << ' ' << cam.translation.z() << ' '
          << q.w() << ' ' << q.x() << ' ' << q.y() << ' ' << q.z() << '\n';
    poses.flush();
    result.views.push_back({name, cam, core.state().position, yaw_of(core.state().orientation)});
    ++result.completed;
  }
  result.complete = result.failure.empty() && result.completed == result.waypoints;
  result.sim_duration = core.time() - t_start;

  nlohmann::json manifest;
  manifest["waypoints"] = result.waypoints;
  manifest["completed"] = result.completed;
  manifest["complete"] = result.complete;
  manifest["failure"] = result.failure.empty() ? nlohmann::json(nullptr) : nlohmann::json(result.failure);
  manifest["scenario"] = core.scenario().name;
  manifest["sim_duration_s"] = result.sim_duration;
  manifest["camera"] = {{"model", "PINHOLE"},
                        {"width", opt.camera.width},
                        {"height", opt.camera.height},
                        {"fx", opt.camera.fx},
                        {"fy", opt.camera.fy},
                        {"cx", opt.camera.cx},
                        {"cy", opt.camera.cy},
                        {"max_depth", opt.camera.max_depth}};
  nlohmann::json images = nlohmann::json::array();
  for (const auto& v : result.views) {
    const std::string stem = v.name.substr(0, 3);
    images.push_back({{"rgb", "images/" + stem + "_rgb.ppm"},
                      {"depth", "images/" + stem + "_depth.pfm"},
                      {"seg", "images/" + stem + "_seg.pgm"}});
  }
  manifest["images"] = images;
  std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << '\n';
  return result;
}

}  // namespace agrisim
