#include "cli_config.hpp"

#include "agrisim/capture.hpp"
#include "agrisim/latency.hpp"
#include "agrisim/missions.hpp"
#include "agrisim/tcp_fanout.hpp"

#include <atomic>
#include <csignal>
#include <iomanip>
#include <iostream>
#include <thread>

using namespace agrisim;
using json = nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

/// Prints one record as a CSV header + row or as a JSON object line.
void emit(const std::string& format, const std::vector<std::pair<std::string, json>>& fields) {
  if (format == "json") {
    json j = json::object();
    for (const auto& [k, v] : fields) j[k] = v;
    std::cout << j.dump() << std::endl;
    return;
  }
  for (std::size_t i = 0; i < fields.size(); ++i) std::cout << (i ? "," : "") << fields[i].first;
  std::cout << '\n';
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto& v = fields[i].second;
    std::cout << (i ? "," : "") << (v.is_string() ? v.get<std::string>() : v.is_null() ? "" : v.dump());
  }
  std::cout << std::endl;
}

struct ServeArgs {
  double duration = 0.0;
  bool fast = false;
  int fanout_port = -1;
};

int cmd_serve(cli::AppConfig& cfg, const ServeArgs& a) {
  cfg.serve.realtime = !a.fast;
  SimCore core(cfg.sim, cfg.make_start_scenario("vineyard_default"));
  RlEnv env(core, cfg.env);
  Bus bus;
  std::optional<TcpFanout> fanout;
  if (a.fanout_port >= 0) fanout.emplace(bus, "rt/*", static_cast<unsigned short>(a.fanout_port));
  SimServer server(core, env, bus, cfg.serve);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::vector<std::pair<std::string, json>> hello{{"event", "listening"},
                                                  {"address", cfg.serve.ws.address},
                                                  {"port", server.port()},
                                                  {"path", cfg.serve.ws.path},
                                                  {"scenario", core.scenario().name}};
  if (fanout) hello.emplace_back("fanout_port", fanout->port());
  emit(cfg.format, hello);

  std::thread timer;
  if (a.duration > 0.0) {
    timer = std::thread([d = a.duration] {
      const auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(d);
      while (!g_stop && std::chrono::steady_clock::now() < until) std::this_thread::sleep_for(std::chrono::milliseconds(10));
      g_stop = true;
    });
  }
  server.run(g_stop);
  if (timer.joinable()) timer.join();
  if (fanout) fanout->stop();
  const auto& st = core.state();
  emit(cfg.format, {{"event", "stopped"},
                    {"ticks", server.ticks()},
                    {"sim_time", core.time()},
                    {"x", st.position.x()},
                    {"y", st.position.y()},
                    {"z", st.position.z()},
                    {"yaw", yaw_of(st.orientation)}});
  return 0;
}

struct CaptureArgs {
  Vec3 center{0.0, 0.0, 1.5};
  double radius = 4.0;
  double altitude = 1.5;
  int n = 18;
  std::string out;
  bool fast = false;
  cli::CameraSpec camera{640, 480, 90.0, 30.0};
  double goal_timeout = 60.0;
};

int cmd_capture(cli::AppConfig& cfg, const CaptureArgs& a) {
  SimCore core(cfg.sim, cfg.make_start_scenario("tree_inspection"));
  const auto ground = core.scene().ground_z();
  const double clearance = cfg.sim.vehicle.collision_radius;
  if (ground && a.altitude <= *ground + clearance) {
    throw std::invalid_argument("capture.altitude must be above the ground plus the collision radius (" +
                                std::to_string(*ground + clearance) + " m)");
  }
  if (!(a.radius > 0.0)) throw std::invalid_argument("capture.radius must be positive");
  if (a.n < 0) throw std::invalid_argument("capture.n must be >= 0");
  const auto waypoints = circular_capture_waypoints(a.center, a.radius, a.altitude, a.n);
  for (const auto& w : waypoints) {
    if (!core.scene().bounds().contains(w.position)) {
      throw std::invalid_argument("capture ring leaves the scene bounds; reduce capture.radius or move capture.center");
    }
  }

  CaptureOptions opt;
  opt.camera = a.camera.model();
  opt.goal_timeout_s = a.goal_timeout;
  const auto wall0 = std::chrono::steady_clock::now();
  const double sim0 = core.time();
  if (!a.fast) {
    opt.on_tick = [&](SimCore& c) {
      std::this_thread::sleep_until(wall0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                std::chrono::duration<double>(c.time() - sim0)));
    };
  }
  const auto r = run_capture_mission(core, waypoints, a.out, opt);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  emit(cfg.format, {{"waypoints", r.waypoints},
                    {"completed", r.completed},
                    {"complete", r.complete},
                    {"sim_duration_s", r.sim_duration},
                    {"wall_duration_s", wall},
                    {"out_dir", a.out},
                    {"failure", r.failure.empty() ? json(nullptr) : json(r.failure)}});
  return r.complete ? 0 : kExitRuntime;
}

struct BenchArgs {
  double duration = 60.0;
  double rate = 30.0;
  bool fast = false;
  bool null_stream = false;
};

int cmd_latency(cli::AppConfig& cfg, const BenchArgs& a) {
  auto streams = default_latency_streams();
  if (a.null_stream) streams.insert(streams.begin(), {"null", StreamKind::Null, 0, 0});
  const auto results = measure_latency(streams, a.duration, a.rate, a.fast ? Pacing::Lockstep : Pacing::RealTime);
  const double budget = 1000.0 / a.rate;
  if (cfg.format == "json") {
    json rows = json::array();
    for (const auto& r : results) {
      rows.push_back({{"stream", r.stream},
                      {"mean_ms", r.mean_ms},
                      {"std_ms", r.std_ms},
                      {"n", r.n},
                      {"dropped", r.dropped},
                      {"budget_ms", budget},
                      {"within_budget", r.mean_ms < budget}});
    }
    std::cout << json{{"duration_s", a.duration}, {"rate_hz", a.rate}, {"streams", rows}}.dump() << std::endl;
  } else {
    std::cout << "stream,mean_ms,std_ms,n,dropped,budget_ms,within_budget\n" << std::setprecision(6);
    for (const auto& r : results) {
      std::cout << r.stream << ',' << r.mean_ms << ',' << r.std_ms << ',' << r.n << ',' << r.dropped << ',' << budget
                << ',' << (r.mean_ms < budget ? "true" : "false") << '\n';
    }
    std::cout.flush();
  }
  return 0;
}

struct MetricsArgs {
  std::string log;
  std::optional<Vec3> goal;
};

int cmd_metrics(cli::AppConfig& cfg, const MetricsArgs& a) {
  std::ifstream in(a.log);
  if (!in) throw std::runtime_error("cannot open " + a.log);
  const auto log = TrajectoryLog::parse_csv(in);
  if (log.empty()) throw std::runtime_error("log has no samples");
  if (cfg.scene_path.empty() && cfg.scenario.empty()) {
    throw std::invalid_argument("metrics needs --scenario.scene_path or --scenario.name");
  }
  const Scenario sc = cfg.make_start_scenario("open_field");
  const Vec3 goal = a.goal.value_or(sc.goal);
  emit(cfg.format, {{"flight_time_s", flight_time(log)},
                    {"goal_convergence_m", goal_convergence(log, goal)},
                    {"obstacle_clearance_m", obstacle_clearance(log, sc.scene)},
                    {"samples", log.samples().size()}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Headless multirotor simulator for orchard and vineyard scenes"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  cli::AppConfig cfg;
  cli::add_config_options(app, cfg);

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Run the simulator with the WebSocket server and topic publishers");
  serve->add_option("--duration", serve_args.duration, "Stop after this many wall-clock seconds (0: until SIGINT)")
      ->capture_default_str();
  serve->add_flag("--fast", serve_args.fast, "Tick as fast as possible instead of real time");
  serve->add_option("--fanout-port", serve_args.fanout_port, "Forward rt/* topics over TCP on this port (-1: off)")
      ->capture_default_str();

  CaptureArgs cap;
  auto* capture = app.add_subcommand("capture", "Fly a circular capture mission and write a pose-tagged dataset");
  capture->add_option_function<std::vector<double>>(
             "--center", [&cap](const std::vector<double>& v) { cap.center = Vec3(v[0], v[1], v[2]); },
             "Target the camera looks at, m")
      ->expected(3)
      ->default_str("0 0 1.5");
  capture->add_option("--radius", cap.radius, "m")->capture_default_str();
  capture->add_option("--altitude", cap.altitude, "m")->capture_default_str();
  capture->add_option("-n,--count", cap.n, "Number of views")->capture_default_str();
  capture->add_option("--out", cap.out, "Output directory")->required();
  capture->add_flag("--fast", cap.fast, "Do not pace the simulation to wall-clock time");
  capture->add_option("--width", cap.camera.width)->capture_default_str();
  capture->add_option("--height", cap.camera.height)->capture_default_str();
  capture->add_option("--hfov-deg", cap.camera.hfov_deg)->capture_default_str();
  capture->add_option("--goal-timeout", cap.goal_timeout, "Seconds of sim time per waypoint")->capture_default_str();

  BenchArgs bench;
  auto* latency = app.add_subcommand("latency-bench", "Measure publish-to-decode latency per stream");
  latency->add_option("--duration", bench.duration, "s")->capture_default_str();
  latency->add_option("--rate", bench.rate, "Hz")->capture_default_str();
  latency->add_flag("--fast", bench.fast, "Publish the next tick as soon as the previous one is received");
  latency->add_flag("--null", bench.null_stream, "Add a header-only stream measuring the transport floor");

  MetricsArgs met;
  auto* metrics = app.add_subcommand("metrics", "Trajectory metrics for a logged flight");
  metrics->add_option("--log", met.log, "CSV log with columns t,x,y,z,yaw")->required()->check(CLI::ExistingFile);
  metrics
      ->add_option_function<std::vector<double>>(
          "--goal", [&met](const std::vector<double>& v) { met.goal = Vec3(v[0], v[1], v[2]); },
          "Goal position, m (default: the scenario goal)")
      ->expected(3);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (!cfg.config_path.empty()) cli::apply_config_file(app, cfg.config_path);
    cfg.finalize();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*serve) return cmd_serve(cfg, serve_args);
    if (*capture) return cmd_capture(cfg, cap);
    if (*latency) return cmd_latency(cfg, bench);
    if (*metrics) return cmd_metrics(cfg, met);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
