// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Oracles come from tests/ so the checks stay independent of
// the code under test.

#include "agrisim/capture.hpp"
#include "agrisim/control.hpp"
#include "agrisim/dynamics.hpp"
#include "agrisim/grid.hpp"
#include "agrisim/latency.hpp"
#include "agrisim/missions.hpp"
#include "agrisim/rl_env.hpp"
#include "agrisim/sim_server.hpp"
#include "agrisim/trajectory.hpp"
#include "agrisim/vineyard.hpp"

#include "cdr_fixtures.hpp"
#include "grid_oracle.hpp"
#include "trajectory_oracles.hpp"

#include <CLI11.hpp>

#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

using namespace agrisim;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  /// Records a failed condition; the first few reasons are kept.
  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass || failures < 3) detail << (detail.tellp() > 0 ? "; " : "") << what;
    pass = false;
    ++failures;
  }
  int failures = 0;
};

struct Criterion {
  std::string name;
  std::function<void(Verdict&)> run;
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

// ---- latency ----

void latency(Verdict& v, bool realtime) {
  const auto results = measure_latency(default_latency_streams(), 60.0, 30.0, realtime ? Pacing::RealTime : Pacing::Lockstep);
  for (const auto& r : results) {
    v.require(r.n == 1800, r.stream + " n=" + std::to_string(r.n));
    v.require(r.dropped == 0, r.stream + " dropped=" + std::to_string(r.dropped));
    if (r.stream == "odom") v.require(r.mean_ms < 5.0, "odom mean " + fmt(r.mean_ms) + " ms");
    if (r.stream == "depth") v.require(r.mean_ms < 1000.0 / 30.0, "depth mean " + fmt(r.mean_ms) + " ms");
    if (v.pass) v.detail << r.stream << "=" << fmt(r.mean_ms, 3) << "ms ";
  }
}

// ---- min-snap ----

std::vector<Waypoint> random_waypoints(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-5, 5), yaw(-3, 3);
  std::vector<Waypoint> out;
  for (int i = 0; i < n; ++i) {
    Waypoint w{Vec3(u(rng), u(rng), u(rng) + 6), std::nullopt};
    if (i % 2 == 0) w.yaw = yaw(rng);
    out.push_back(w);
  }
  return out;
}

std::vector<double> random_durations(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.5, 4.0);
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(u(rng));
  return out;
}

void min_snap(Verdict& v) {
  const auto expected = oracle::hermite7({0, 0, 0, 0}, {1, 0, 0, 0}, 1.0);
  const std::array<double, 8> target{0, 0, 0, 0, 35, -84, 70, -20};
  const std::vector<Waypoint> line{{Vec3::Zero(), std::nullopt}, {Vec3(1, 0, 0), std::nullopt}};
  const auto traj = min_snap_trajectory(line, std::vector<double>{1.0});
  const auto& c = traj.segments()[0].axes[0];
  for (std::size_t k = 0; k < 8; ++k) {
    v.require(std::abs(expected[k] - target[k]) < 1e-6, "oracle c" + std::to_string(k));
    v.require(std::abs(c[static_cast<Eigen::Index>(k)] - expected[k]) < 1e-6, "c" + std::to_string(k) + "=" + fmt(c[static_cast<Eigen::Index>(k)]));
  }

  std::mt19937_64 rng(23);
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const int m = 2 + inst % 7;
    const auto wps = random_waypoints(rng, m + 1);
    const auto t = min_snap_trajectory(wps, random_durations(rng, m));
    for (int i = 0; i + 1 < m; ++i) {
      const auto l = t.left_limit(static_cast<std::size_t>(i));
      const auto r = t.right_limit(static_cast<std::size_t>(i));
      worst = std::max({worst, (l.position - wps[static_cast<std::size_t>(i + 1)].position).norm(),
                        (l.position - r.position).norm(), (l.velocity - r.velocity).norm(),
                        (l.acceleration - r.acceleration).norm(), (l.jerk - r.jerk).norm()});
    }
  }
  v.require(worst < 1e-6, "continuity residual " + fmt(worst));

  const auto fd = min_snap_trajectory(random_waypoints(rng, 5), random_durations(rng, 4));
  std::uniform_real_distribution<double> ut(1e-3, fd.total_duration() - 1e-3);
  const double h = 1e-5;
  double fd_worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double t = ut(rng);
    const auto r = fd.evaluate(t), plus = fd.evaluate(t + h), minus = fd.evaluate(t - h);
    fd_worst = std::max({fd_worst, ((plus.position - minus.position) / (2 * h) - r.velocity).norm(),
                         ((plus.velocity - minus.velocity) / (2 * h) - r.acceleration).norm(),
                         ((plus.acceleration - minus.acceleration) / (2 * h) - r.jerk).norm()});
  }
  v.require(fd_worst < 1e-4, "finite difference " + fmt(fd_worst));
  if (v.pass) v.detail << "continuity=" << fmt(worst, 2) << " fd=" << fmt(fd_worst, 2);
}

// ---- SE(3) ----

MultirotorState fly(MultirotorState s, const std::function<FlatOutputRef(double)>& ref, double duration,
                    const std::function<void(const MultirotorState&, const FlatOutputRef&)>& observe = {}) {
  constexpr double dt = 0.002;
  const VehicleParams p;
  const Se3Gains g;
  const QuadrotorModel model(p);
  const int steps = static_cast<int>(std::round(duration / dt));
  for (int i = 0; i < steps; ++i) {
    const auto cmd = se3_control(s, ref(s.time), g, p);
    s = model.step(s, model.mixer().mix(cmd.thrust, cmd.moments).speeds, dt);
    if (observe) observe(s, ref(s.time));
  }
  return s;
}

void se3(Verdict& v) {
  const VehicleParams p;
  const auto hover = MultirotorState::hover(p, Vec3(1, -2, 3));
  const auto cmd = se3_control(hover, FlatOutputRef::hold(Vec3(1, -2, 3), 0.0), Se3Gains{}, p);
  v.require(std::abs(cmd.thrust - p.mass * p.gravity) <= 1e-9, "hover thrust " + fmt(cmd.thrust, 12));
  v.require(cmd.moments.norm() <= 1e-9, "hover moments " + fmt(cmd.moments.norm()));

  const Vec3 target(0, 0, 2);
  double worst = 0.0;
  for (const Vec3& offset : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, -1), Vec3(0.6, -0.6, 0.529)}) {
    const auto s = fly(MultirotorState::hover(p, target + offset.normalized()),
                       [&](double) { return FlatOutputRef::hold(target, 0.0); }, 5.0);
    worst = std::max(worst, (s.position - target).norm());
  }
  v.require(worst < 0.01, "offset error at 5 s " + fmt(worst));

  const double radius = 2.0, speed = 0.5;
  const int per_lap = 24;
  std::vector<Waypoint> wps;
  std::vector<Vec3> pts;
  for (int k = 0; k <= 2 * per_lap; ++k) {
    const double a = 2 * std::numbers::pi * k / per_lap;
    wps.push_back({Vec3(radius * std::cos(a), radius * std::sin(a), 2.0), std::nullopt});
    pts.push_back(wps.back().position);
  }
  const auto traj = min_snap_trajectory(wps, allocate_segment_times(pts, speed));
  const double lap = 2 * std::numbers::pi * radius / speed;
  double sq = 0.0;
  int n = 0;
  fly(MultirotorState::hover(p, wps.front().position), [&](double t) { return traj.evaluate(t); }, traj.total_duration(),
      [&](const MultirotorState& st, const FlatOutputRef& r) {
        if (st.time > lap) {
          sq += (st.position - r.position).squaredNorm();
          ++n;
        }
      });
  const double rms = n ? std::sqrt(sq / n) : std::numeric_limits<double>::infinity();
  v.require(rms < 0.15, "circle rms " + fmt(rms));
  if (v.pass) v.detail << "offset_err=" << fmt(worst, 3) << "m circle_rms=" << fmt(rms, 3) << "m";
}

// ---- A* ----

void astar(Verdict& v) {
  std::mt19937_64 rng(2024);
  std::bernoulli_distribution fill(0.25);
  std::uniform_int_distribution<int> coord(0, 19);
  int solvable = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto g = OccupancyGrid::empty(Eigen::Vector2d::Zero(), 0.5, 20, 20);
    for (auto& c : g.occupancy) c = fill(rng) ? 1 : 0;
    Cell s, t;
    do { s = {coord(rng), coord(rng)}; } while (g.occupied(s));
    do { t = {coord(rng), coord(rng)}; } while (g.occupied(t));
    const auto ref = oracle::dijkstra(g, s, t);
    const auto got = astar_distance(g, Vec3(g.center(s).x(), g.center(s).y(), 0), Vec3(g.center(t).x(), g.center(t).y(), 0));
    v.require(ref.has_value() == got.has_value(), "solvability differs, trial " + std::to_string(trial));
    if (!ref || !got) continue;
    ++solvable;
    const double want = 0.5 * (static_cast<double>(ref->first) + std::numbers::sqrt2 * static_cast<double>(ref->second));
    v.require(*got == want, "trial " + std::to_string(trial) + ": " + fmt(*got, 17) + " vs " + fmt(want, 17));
  }

  const auto g = OccupancyGrid::empty(Eigen::Vector2d::Zero(), 0.5, 30, 30);
  auto at = [&](int x, int y) { return Vec3(0.25 + 0.5 * x, 0.25 + 0.5 * y, 1.5); };
  v.require(astar_distance(g, at(2, 3), at(12, 3)) == 5.0, "octile straight");
  v.require(astar_distance(g, at(2, 3), at(12, 13)) == 0.5 * (10 * std::numbers::sqrt2), "octile diagonal");
  v.require(astar_distance(g, at(2, 3), at(12, 7)) == 0.5 * (6 + 4 * std::numbers::sqrt2), "octile mixed");
  v.require(astar_distance(g, at(4, 4), at(4, 4)) == 0.0, "octile zero");
  if (v.pass) v.detail << solvable << "/100 solvable grids equal";
}

// ---- RL contract ----

void rl(Verdict& v) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto camera = CameraModel::rl_default();
  int queries = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto sc = vineyard_scenario(seed);
    const auto& b = sc.scene.bounds();
    for (int i = 0; i < 1000; ++i) {
      MultirotorState s;
      s.position = Vec3(b.min.x() + (b.max.x() - b.min.x()) * (0.5 + 0.5 * u(rng)),
                        b.min.y() + (b.max.y() - b.min.y()) * (0.5 + 0.5 * u(rng)), 0.3 + 2.5 * (0.5 + 0.5 * u(rng)));
      s.orientation = UnitQuaternion(Eigen::Vector4d(u(rng), u(rng), u(rng), u(rng)).normalized());
      s.velocity = 8.0 * Vec3(u(rng), u(rng), u(rng));
      s.angular_velocity = 6.0 * Vec3(u(rng), u(rng), u(rng));
      const Vec3 goal(20 * u(rng), 20 * u(rng), 1.5);
      const auto obs = build_observation(render_depth_row(sc.scene, camera.world_pose(s), camera, camera.height / 2), s, goal);
      v.require(obs.size() == 35, "obs size " + std::to_string(obs.size()));
      for (std::size_t k = 0; k < obs.size(); ++k) {
        const double lo = k < 32 ? 0.0 : -1.0;
        v.require(obs[k] >= lo && obs[k] <= 1.0, "obs[" + std::to_string(k) + "]=" + fmt(obs[k]));
      }
      ++queries;
    }
  }
  v.require(queries == 10000, "queries");

  const RewardConfig cfg;
  const double r1 = compute_reward(3.0, 2.5, Outcome::Running, cfg).reward;
  const double r2 = compute_reward(2.0, 2.0, Outcome::Goal, cfg).reward;
  const double r3 = compute_reward(4.0, 4.2, Outcome::Collision, cfg).reward;
  v.require(std::abs(r1 - 0.49) < 1e-12, "reward progress " + fmt(r1, 17));
  v.require(std::abs(r2 - 99.99) < 1e-12, "reward goal " + fmt(r2, 17));
  v.require(std::abs(r3 + 30.21) < 1e-12, "reward collision " + fmt(r3, 17));

  std::mt19937_64 actions(123);
  std::uniform_real_distribution<double> av(-0.5, 3.0), aw(-0.6, 0.6);
  int telescoped = 0, skipped = 0;
  double worst = 0.0;
  for (int episode = 0; episode < 20; ++episode) {
    SimCore core;
    RlEnv env(core);
    const auto start = env.reset(static_cast<std::uint64_t>(episode), "vineyard_default");
    double sum = 0.0;
    bool fallback = false;
    StepResult r = start;
    for (int i = 0; i < 80 && !(r.terminated || r.truncated); ++i) {
      r = env.step(av(actions), aw(actions));
      sum += r.info.progress;
      fallback = fallback || r.info.unreachable;
    }
    if (fallback || !r.info.distance) {
      ++skipped;
      continue;
    }
    worst = std::max(worst, std::abs(sum - (start.info.d0 - *r.info.distance)));
    ++telescoped;
  }
  v.require(worst < 1e-9, "telescoping residual " + fmt(worst));
  v.require(telescoped >= 15, "only " + std::to_string(telescoped) + " episodes without unreachable steps");

  auto rollout = [](std::uint64_t seed) {
    SimCore core;
    RlEnv env(core);
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> dv(-2.0, 3.0), dw(-1.5, 1.5);
    std::vector<double> trace;
    auto r = env.reset(seed, "vineyard_default");
    trace.insert(trace.end(), r.obs.begin(), r.obs.end());
    for (int i = 0; i < 60 && !(r.terminated || r.truncated); ++i) {
      r = env.step(dv(g), dw(g));
      trace.push_back(r.reward);
      trace.insert(trace.end(), r.obs.begin(), r.obs.end());
    }
    return trace;
  };
  const auto a = rollout(9), b = rollout(9);
  v.require(a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0, "seed 9 rollouts differ");
  if (v.pass) {
    v.detail << "queries=" << queries << " telescoping=" << fmt(worst, 2) << " over " << telescoped << " episodes";
    if (skipped) v.detail << " (" << skipped << " with unreachable steps)";
  }
}

// ---- metrics ----

void metrics(Verdict& v) {
  const Scene scene(orchard_classes(), {SceneObject::cylinder(Vec3(0, 0, 1.5), 0.5, 3.0, kTrunkClass, "trunk")}, std::nullopt,
                    {Vec3(-10, -10, 0), Vec3(10, 10, 5)});
  TrajectoryLog line;
  line.append({0.0, Vec3(-5, 1.589, 1.5), 0.0});
  line.append({1.0, Vec3(5, 1.589, 1.5), 0.0});
  const double clearance = obstacle_clearance(line, scene);
  v.require(std::abs(clearance - 1.089) < 1e-3, "clearance " + fmt(clearance));

  const Vec3 goal(12.0, 3.0, 1.5);
  const Vec3 dir = Vec3(2, -1, 0.5).normalized();
  TrajectoryLog run;
  run.append({0.0, Vec3(0, 3, 1.5), 0.0});
  run.append({1.0, goal - 0.008 * dir, 0.0});
  const double gc = goal_convergence(run, goal);
  v.require(std::abs(gc - 0.008) <= 1e-12, "goal_convergence " + fmt(gc, 17));
  TrajectoryLog exact;
  exact.append({0.0, goal, 0.0});
  v.require(goal_convergence(exact, goal) == 0.0, "goal_convergence at goal");
  if (v.pass) v.detail << "clearance=" << fmt(clearance, 6) << "m";
}

// ---- capture ----

void capture(Verdict& v) {
  namespace fs = std::filesystem;
  SimCore core;
  core.reset("tree_inspection", 0);
  const Vec3 center(0, 0, 1.5);
  const auto wps = circular_capture_waypoints(center, 4.0, 1.5, 18);
  const auto dir = fs::temp_directory_path() / ("agrisim_acceptance_capture_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  const auto result = run_capture_mission(core, wps, dir);
  v.require(result.complete, "incomplete: " + result.failure);
  v.require(result.views.size() == 18, std::to_string(result.views.size()) + " views");
  double pos_err = 0.0, yaw_err = 0.0, bore = 0.0;
  for (std::size_t k = 0; k < result.views.size() && k < wps.size(); ++k) {
    const auto& pose = result.views[k].camera_pose;
    const Vec3 forward = pose.rotation * Vec3(0, 0, 1);
    pos_err = std::max(pos_err, (pose.translation - wps[k].position).norm());
    yaw_err = std::max(yaw_err, std::abs(wrap_to_pi(std::atan2(forward.y(), forward.x()) - wps[k].yaw)));
    const Vec3 r = center - pose.translation;
    v.require(r.dot(forward) > 0.0, "view " + std::to_string(k) + " faces away");
    bore = std::max(bore, (r - r.dot(forward) * forward).norm());
    for (const char* suffix : {"_rgb.ppm", "_depth.pfm", "_seg.pgm"}) {
      char stem[8];
      std::snprintf(stem, sizeof stem, "%03zu", k);
      v.require(fs::exists(dir / "images" / (std::string(stem) + suffix)), std::string(stem) + suffix + " missing");
    }
  }
  v.require(pos_err < 0.1, "position error " + fmt(pos_err));
  v.require(yaw_err < 2.0 * std::numbers::pi / 180.0, "yaw error " + fmt(yaw_err * 180.0 / std::numbers::pi) + " deg");
  v.require(bore < 0.05, "boresight miss " + fmt(bore));
  fs::remove_all(dir);
  if (v.pass) {
    v.detail << "pos_err=" << fmt(pos_err, 3) << "m yaw_err=" << fmt(yaw_err * 180.0 / std::numbers::pi, 3)
             << "deg boresight=" << fmt(bore, 3) << "m";
  }
}

// ---- CDR ----

template <typename M>
void golden(Verdict& v, const std::string& name, const M& m) {
  const auto bytes = fixtures::fixture(name);
  v.require(msg::encode(m) == bytes, name + " encode differs");
  v.require(msg::decode<M>(bytes) == m, name + " decode differs");
}

void cdr_fixtures(Verdict& v) {
  golden(v, "odometry", fixtures::fixture_odometry());
  golden(v, "image_depth", fixtures::fixture_depth_image());
  golden(v, "image_seg", fixtures::fixture_seg_image());
  golden(v, "camera_info", fixtures::fixture_camera_info());
  golden(v, "tf", fixtures::fixture_tf());
  golden(v, "clock", msg::Clock{{1, 2}});

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-50, 50);
  int trips = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto odom = fixtures::random_odometry(rng);
    v.require(msg::decode<msg::Odometry>(msg::encode(odom)) == odom, "odometry round trip " + std::to_string(i));

    msg::Image img;
    img.header = {{i, 7}, fixtures::random_string(rng)};
    img.width = static_cast<std::uint32_t>(rng() % 9);
    img.height = static_cast<std::uint32_t>(rng() % 9);
    img.encoding = (i % 2) ? "32FC1" : "mono16";
    img.step = img.width * msg::bytes_per_pixel(img.encoding);
    img.data.resize(static_cast<std::size_t>(img.step) * img.height);
    for (auto& byte : img.data) byte = static_cast<std::uint8_t>(rng());
    v.require(msg::decode<msg::Image>(msg::encode(img)) == img, "image round trip " + std::to_string(i));

    auto info = fixtures::fixture_camera_info();
    info.d.resize(rng() % 8);
    for (double& d : info.d) d = u(rng);
    for (double& k : info.k) k = u(rng);
    v.require(msg::decode<msg::CameraInfo>(msg::encode(info)) == info, "camera_info round trip " + std::to_string(i));

    msg::TFMessage tf;
    tf.transforms.resize(rng() % 4);
    for (auto& t : tf.transforms) {
      t.header = {{i, 1}, fixtures::random_string(rng)};
      t.child_frame_id = fixtures::random_string(rng);
      t.transform = {{u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng), u(rng)}};
    }
    v.require(msg::decode<msg::TFMessage>(msg::encode(tf)) == tf, "tf round trip " + std::to_string(i));
    ++trips;
  }
  if (v.pass) v.detail << "6 fixtures, " << trips << " random round trips";
}

// ---- robustness ----

void robustness(Verdict& v) {
  namespace beast = boost::beast;
  namespace websocket = beast::websocket;
  using tcp = boost::asio::ip::tcp;

  SimCore core;
  RlEnv env(core);
  Bus bus;
  ServeOptions opt;
  opt.ws.port = 0;
  opt.camera_hz = 0.0;
  SimServer server(core, env, bus, opt);
  std::atomic<bool> stop{false};
  std::thread loop([&] { server.run(stop); });

  boost::asio::io_context io;
  websocket::stream<tcp::socket> ws(io);
  tcp::resolver resolver(io);
  boost::asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(server.port())));
  ws.handshake("127.0.0.1", "/sim");
  ws.text(true);
  ws.write(boost::asio::buffer(std::string(R"({"type":"handshake","client_kind":"scripted"})")));

  // Half random bytes (binary frames), half JSON of the wrong shape.
  const std::vector<std::string> shapes{"", "{", "[]", "null", "42", R"({"type":7})", R"({"kind":"goto"})",
                                        R"({"type":"goto"})", R"({"type":"goto","position":[1,2]})",
                                        R"({"type":"goto","position":["a",0,0]})", R"({"type":"velocity","v_fwd":"fast"})",
                                        R"({"type":"env_step","action":[1]})", R"({"type":"reset","seed":-1})",
                                        R"({"type":"warp"})", R"({"type":"reset","scenario":"moon"})"};
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(1, 200), byte(0, 255);
  for (int i = 0; i < 1000; ++i) {
    if (i % 2 == 0) {
      std::string s(static_cast<std::size_t>(len(rng)), '\0');
      for (auto& ch : s) ch = static_cast<char>(byte(rng));
      ws.binary(true);
      ws.write(boost::asio::buffer(s));
    } else {
      ws.text(true);
      ws.write(boost::asio::buffer(shapes[static_cast<std::size_t>(i / 2) % shapes.size()]));
    }
  }
  ws.text(true);
  ws.write(boost::asio::buffer(std::string(R"({"type":"ping","id":"after"})")));

  int errors = 0, unstructured = 0;
  bool pong = false;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(20);
  while (!pong && std::chrono::steady_clock::now() < deadline) {
    beast::flat_buffer buf;
    boost::system::error_code ec;
    ws.read(buf, ec);
    if (ec) break;
    try {
      const auto m = nlohmann::json::parse(beast::buffers_to_string(buf.data()));
      const std::string type = m.at("type");
      if (type == "error") {
        if (m.at("code").is_string() && m.at("detail").is_string()) ++errors;
        else ++unstructured;
      }
      if (type == "pong" && m.value("id", "") == "after") pong = true;
    } catch (const std::exception&) {
      ++unstructured;
    }
  }
  stop = true;
  loop.join();
  v.require(errors == 1000, std::to_string(errors) + " structured errors");
  v.require(unstructured == 0, std::to_string(unstructured) + " unstructured replies");
  v.require(pong, "no pong after the malformed burst");
  if (v.pass) v.detail << errors << " structured errors, server alive";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runs the acceptance criteria and prints one PASS/FAIL line each"};
  std::vector<std::string> only;
  bool realtime = false;
  app.add_option("--only", only, "Run only these criteria");
  app.add_flag("--realtime-latency", realtime, "Pace the latency bench at 30 Hz wall clock (60 s) instead of lockstep");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {"latency", [&](Verdict& v) { latency(v, realtime); }},
      {"min_snap", min_snap},
      {"se3_closed_loop", se3},
      {"astar_oracle", astar},
      {"rl_contract", rl},
      {"metrics", metrics},
      {"capture", capture},
      {"cdr", cdr_fixtures},
      {"robustness", robustness},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (v.pass ? "PASS " : "FAIL ") << c.name << " (" << fmt(secs, 3) << " s) " << v.detail.str() << std::endl;
    if (!v.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
