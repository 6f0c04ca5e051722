#pragma once

#include "agrisim/bus.hpp"
#include "agrisim/messages.hpp"
#include "agrisim/protocol.hpp"
#include "agrisim/ws_server.hpp"

#include <atomic>
#include <chrono>
#include <cmath>

// The serve loop: one thread owns the simulator, drains WebSocket input once
// per physics tick, ticks, and publishes rt/* topics on the bus.

namespace agrisim {

struct ServeOptions {
  WsServerOptions ws;
  double sensor_hz = 30.0;  // odom, tf, clock
  double camera_hz = 30.0;  // depth, seg, rgb, camera_info; 0 disables rendering
  CameraModel camera = CameraModel::rl_default();
  bool realtime = true;     // false: tick as fast as possible

  void validate(const SimConfig& sim) const {
    if (!(sensor_hz > 0.0)) throw std::invalid_argument("rates.sensor_hz must be > 0");
    if (sensor_hz > sim.physics_hz) throw std::invalid_argument("rates.sensor_hz must not exceed rates.physics_hz");
    if (!(camera_hz >= 0.0) || camera_hz > sim.physics_hz) {
      throw std::invalid_argument("rates.camera_hz must be in [0, rates.physics_hz]");
    }
    camera.validate();
  }
};

class SimServer {
 public:
  SimServer(SimCore& core, RlEnv& env, Bus& bus, ServeOptions opt = {})
      : core_(core), env_(env), bus_(bus), opt_((opt.validate(core.config()), std::move(opt))), router_(core_, env_),
        ws_(opt_.ws) {}

  unsigned short port() const { return ws_.port(); }
  const protocol::Router& router() const { return router_; }
  std::uint64_t ticks() const { return ticks_.load(); }

  /// Runs until `stop` becomes true, then sends every identified session a
  /// final state message and closes the connections.
  void run(const std::atomic<bool>& stop) {
    using clock = std::chrono::steady_clock;
    const auto dt = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(core_.config().dt()));
    auto next = clock::now();
    while (!stop.load()) {
      auto wait = std::chrono::microseconds(0);
      if (router_.lockstep()) {
        wait = std::chrono::milliseconds(2);
      } else if (opt_.realtime) {
        wait = std::max(std::chrono::microseconds(0),
                        std::chrono::duration_cast<std::chrono::microseconds>(next - clock::now()));
      }
      for (auto& ev : ws_.poll(wait)) dispatch(ev);

      if (router_.lockstep()) {
        next = clock::now();
        continue;
      }
      if (opt_.realtime && clock::now() < next) continue;
      deliver(router_.tick(), 0);
      ++ticks_;
      publish_sensors();
      next += dt;
      if (clock::now() - next > std::chrono::milliseconds(250)) next = clock::now();  // don't chase a long stall
    }
    deliver(router_.flush(), 0);
    json final_state = protocol::state_json(core_.state());
    final_state["type"] = "state";
    final_state["mode"] = mode_name(core_.mode());
    final_state["final"] = true;
    ws_.send(identified(), final_state.dump());
    ws_.stop();
  }

 private:
  using json = protocol::json;

  void dispatch(const WsInbound& ev) {
    switch (ev.kind) {
      case WsInbound::Kind::Open: router_.connect(ev.session); break;
      case WsInbound::Kind::Close: router_.disconnect(ev.session); break;
      case WsInbound::Kind::Message:
        deliver(router_.handle(ev.session, ev.text), ev.session);
        // env_step advances time inside the handler; keep topics flowing.
        publish_sensors();
        break;
    }
  }

  std::vector<std::uint64_t> identified() const {
    std::vector<std::uint64_t> ids;
    for (const auto& [id, s] : router_.sessions()) {
      if (s.kind) ids.push_back(id);
    }
    return ids;
  }

  void deliver(const protocol::Output& out, std::uint64_t from) {
    std::optional<std::vector<std::uint64_t>> everyone;
    for (const auto& m : out.messages) {
      if (m.to) {
        ws_.send(*m.to, m.text);
      } else {
        if (!everyone) everyone = identified();
        ws_.send(*everyone, m.text);
      }
    }
    if (out.close && from != 0) ws_.close(from);
  }

  /// Publishes when the tick count crosses a sensor or camera period boundary.
  void publish_sensors() {
    const auto k = core_.tick_count();
    const double hz = core_.config().physics_hz;
    const auto sensor_slot = static_cast<std::int64_t>(std::floor(static_cast<double>(k) * opt_.sensor_hz / hz));
    const auto stamp = msg::Time::from_seconds(core_.time());
    if (sensor_slot != last_sensor_slot_) {
      last_sensor_slot_ = sensor_slot;
      const auto& st = core_.state();
      bus_.publish(std::string(topics::kOdom), msg::encode(msg::build_odometry(st, stamp)));
      bus_.publish(std::string(topics::kTf), msg::encode(msg::build_tf(st, opt_.camera, stamp)));
      bus_.publish(std::string(topics::kClock), msg::encode(msg::build_clock(stamp)));
    }
    if (opt_.camera_hz <= 0.0) return;
    const auto camera_slot = static_cast<std::int64_t>(std::floor(static_cast<double>(k) * opt_.camera_hz / hz));
    if (camera_slot == last_camera_slot_) return;
    last_camera_slot_ = camera_slot;
    const auto frame = render(core_.scene(), opt_.camera.world_pose(core_.state()), opt_.camera);
    bus_.publish(std::string(topics::kDepth), msg::encode(msg::build_depth_image(frame.depth, stamp)));
    bus_.publish(std::string(topics::kSeg), msg::encode(msg::build_seg_image(frame.seg, stamp)));
    bus_.publish(std::string(topics::kRgb), msg::encode(msg::build_rgb_image(colorize(core_.scene(), frame.seg), stamp)));
    bus_.publish(std::string(topics::kCameraInfo), msg::encode(msg::build_camera_info(opt_.camera, stamp)));
  }

  SimCore& core_;
  RlEnv& env_;
  Bus& bus_;
  ServeOptions opt_;
  protocol::Router router_;
  WsServer ws_;
  std::atomic<std::uint64_t> ticks_{0};
  std::int64_t last_sensor_slot_ = -1;
  std::int64_t last_camera_slot_ = -1;
};

}  // namespace agrisim
