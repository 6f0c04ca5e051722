#include "agrisim/capture.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace agrisim;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("agrisim_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

struct PoseLine {
  std::string name;
  Vec3 t;
  UnitQuaternion q;
};

std::vector<PoseLine> read_poses(const fs::path& path) {
  std::ifstream in(path);
  std::vector<PoseLine> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    PoseLine p;
    double qw, qx, qy, qz;
    ss >> p.name >> p.t.x() >> p.t.y() >> p.t.z() >> qw >> qx >> qy >> qz;
    p.q = UnitQuaternion(qw, qx, qy, qz);
    out.push_back(p);
  }
  return out;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST(Capture, EighteenViewsAroundTree) {
  SimCore core;
  core.reset("tree_inspection", 0);
  const Vec3 center(0, 0, 1.5);
  const auto wps = circular_capture_waypoints(center, 4.0, 1.5, 18);
  const auto dir = fresh_dir("capture18");
  const auto result = run_capture_mission(core, wps, dir);
  EXPECT_TRUE(result.complete) << result.failure;
  ASSERT_EQ(result.completed, 18u);

  const auto poses = read_poses(dir / "poses.txt");
  ASSERT_EQ(poses.size(), 18u);
  for (std::size_t k = 0; k < 18; ++k) {
    char stem[8];
    std::snprintf(stem, sizeof stem, "%03zu", k);
    for (const char* suffix : {"_rgb.ppm", "_depth.pfm", "_seg.pgm"}) {
      EXPECT_TRUE(fs::exists(dir / "images" / (std::string(stem) + suffix))) << stem << suffix;
    }
    const auto& p = poses[k];
    EXPECT_EQ(p.name, std::string(stem) + "_rgb.ppm");
    // Camera sits on the vehicle origin with the default mount.
    EXPECT_LT((p.t - wps[k].position).norm(), 0.1) << k;
    const Vec3 forward = p.q * Vec3(0, 0, 1);
    const double yaw = std::atan2(forward.y(), forward.x());
    EXPECT_LT(std::abs(wrap_to_pi(yaw - wps[k].yaw)), 2.0 * std::numbers::pi / 180.0) << k;
    // Boresight ray passes the tree centre.
    const Vec3 r = center - p.t;
    EXPECT_GT(r.dot(forward), 0.0);
    EXPECT_LT((r - r.dot(forward) * forward).norm(), 0.05) << k;
  }

  // Image headers are well formed and sized for the capture camera.
  std::ifstream ppm(dir / "images" / "000_rgb.ppm", std::ios::binary);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  ppm >> magic >> w >> h >> maxval;
  EXPECT_EQ(magic, "P6");
  EXPECT_EQ(w, 640);
  EXPECT_EQ(h, 480);
  EXPECT_EQ(fs::file_size(dir / "images" / "000_seg.pgm"), 17u + 640u * 480u * 2u);

  const auto manifest = read_json(dir / "manifest.json");
  EXPECT_EQ(manifest["waypoints"], 18);
  EXPECT_EQ(manifest["completed"], 18);
  EXPECT_EQ(manifest["complete"], true);
  EXPECT_EQ(manifest["camera"]["width"], 640);
  EXPECT_EQ(manifest["images"].size(), 18u);
  fs::remove_all(dir);
}

TEST(Capture, EmptyWaypointListGivesValidManifest) {
  SimCore core;
  const auto dir = fresh_dir("capture0");
  const auto result = run_capture_mission(core, {}, dir);
  EXPECT_TRUE(result.complete);
  EXPECT_EQ(result.completed, 0u);
  EXPECT_TRUE(read_poses(dir / "poses.txt").empty());
  const auto manifest = read_json(dir / "manifest.json");
  EXPECT_EQ(manifest["waypoints"], 0);
  EXPECT_EQ(manifest["completed"], 0);
  EXPECT_TRUE(manifest["failure"].is_null());
  fs::remove_all(dir);
}

TEST(Capture, TimeoutAbortsWithPartialDataset) {
  SimCore core;
  core.reset("open_field", 0);
  const std::vector<CaptureWaypoint> wps{{Vec3(0, 0, 1.5), 0.0}, {Vec3(15, 0, 1.5), 0.0}, {Vec3(0, 0, 1.5), 0.0}};
  CaptureOptions opt;
  opt.goal_timeout_s = 3.0;
  opt.camera = CameraModel::pinhole(64, 48, std::numbers::pi / 2, 30.0);
  const auto dir = fresh_dir("capture_timeout");
  const auto result = run_capture_mission(core, wps, dir, opt);
  EXPECT_FALSE(result.complete);
  EXPECT_EQ(result.completed, 1u);
  EXPECT_NE(result.failure.find("goal_timeout"), std::string::npos);
  const auto manifest = read_json(dir / "manifest.json");
  EXPECT_EQ(manifest["complete"], false);
  EXPECT_EQ(manifest["completed"], 1);
  EXPECT_EQ(read_poses(dir / "poses.txt").size(), 1u);
  fs::remove_all(dir);
}

TEST(Capture, OutOfBoundsWaypointStopsRun) {
  SimCore core;
  core.reset("tree_inspection", 0);
  const auto dir = fresh_dir("capture_oob");
  const auto result = run_capture_mission(core, {{Vec3(50, 0, 1.5), 0.0}}, dir);
  EXPECT_FALSE(result.complete);
  EXPECT_NE(result.failure.find("out_of_bounds"), std::string::npos);
  fs::remove_all(dir);
}
