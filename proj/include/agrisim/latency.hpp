#pragma once

#include "agrisim/bus.hpp"
#include "agrisim/messages.hpp"
#include "agrisim/tcp_fanout.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

// End-to-end latency probe: build + encode at publish time, transport through
// the bus and a loopback TCP hop, decode at the subscriber. Latency is
// decode-done minus build-start on one monotonic clock.

namespace agrisim {

enum class StreamKind {
  Null,      // encapsulation header only; measures the transport floor
  Odometry,
  Rgb,
  Depth,
};

struct StreamConfig {
  std::string name;
  StreamKind kind = StreamKind::Odometry;
  int width = 0;
  int height = 0;
};

/// Odometry, 320x240 raw RGB (stand-in for the compressed stream), and
/// 640x480 float depth.
inline std::vector<StreamConfig> default_latency_streams() {
  return {{"odom", StreamKind::Odometry, 0, 0}, {"rgb", StreamKind::Rgb, 320, 240}, {"depth", StreamKind::Depth, 640, 480}};
}

enum class Pacing {
  RealTime,  // ticks at wall-clock rate
  Lockstep,  // next tick as soon as the previous tick's samples arrived
};

struct LatencyResult {
  std::string stream;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  std::size_t n = 0;
  std::size_t published = 0;
  std::size_t dropped = 0;
  std::vector<double> samples_ms;
};

namespace detail {

struct StreamSource {
  StreamConfig config;
  std::string key;
  DepthImage depth;
  RgbImage rgb;
};

inline std::vector<std::uint8_t> build_payload(const StreamSource& s, std::size_t tick) {
  const auto stamp = msg::Time::from_seconds(static_cast<double>(tick) / 30.0);
  switch (s.config.kind) {
    case StreamKind::Null: return {cdr::kEncapsulationLE.begin(), cdr::kEncapsulationLE.end()};
    case StreamKind::Odometry: {
      MultirotorState st;
      st.position = Vec3(0.01 * static_cast<double>(tick), 1.0, 1.5);
      st.velocity = Vec3(0.3, 0.0, 0.0);
      return msg::encode(msg::build_odometry(st, stamp));
    }
    case StreamKind::Rgb: return msg::encode(msg::build_rgb_image(s.rgb, stamp));
    case StreamKind::Depth: return msg::encode(msg::build_depth_image(s.depth, stamp));
  }
  return {};
}

inline void decode_payload(StreamKind kind, const std::vector<std::uint8_t>& bytes) {
  switch (kind) {
    case StreamKind::Null: cdr::Reader(bytes).finish(); break;
    case StreamKind::Odometry: (void)msg::decode<msg::Odometry>(bytes); break;
    case StreamKind::Rgb:
    case StreamKind::Depth: (void)msg::decode<msg::Image>(bytes); break;
  }
}

}  // namespace detail

inline std::vector<LatencyResult> measure_latency(const std::vector<StreamConfig>& streams, double duration_s,
                                                  double rate_hz, Pacing pacing = Pacing::RealTime) {
  if (!(duration_s > 0.0) || !(rate_hz > 0.0)) throw std::invalid_argument("latency: duration and rate must be > 0");
  const auto ticks = static_cast<std::size_t>(std::llround(duration_s * rate_hz));

  std::vector<detail::StreamSource> sources;
  std::map<std::string, std::size_t> by_key;
  for (const auto& c : streams) {
    detail::StreamSource s{c, "bench/" + c.name, {}, {}};
    const auto pixels = static_cast<std::size_t>(c.width) * static_cast<std::size_t>(c.height);
    if (c.kind == StreamKind::Depth) {
      s.depth = {c.width, c.height, std::vector<float>(pixels)};
      for (std::size_t i = 0; i < pixels; ++i) s.depth.data[i] = 0.5f + static_cast<float>(i % 997) * 0.01f;
    }
    if (c.kind == StreamKind::Rgb) {
      s.rgb = {c.width, c.height, std::vector<std::uint8_t>(3 * pixels)};
      for (std::size_t i = 0; i < s.rgb.data.size(); ++i) s.rgb.data[i] = static_cast<std::uint8_t>(i * 31);
    }
    by_key[s.key] = sources.size();
    sources.push_back(std::move(s));
  }

  Bus bus;
  TcpFanout fanout(bus, "bench/*");
  TcpSubscriber client(fanout.port());
  while (fanout.client_count() == 0) std::this_thread::sleep_for(std::chrono::milliseconds(1));

  std::vector<std::vector<double>> latencies(sources.size());
  std::atomic<std::size_t> received{0};
  std::mutex mu;
  std::condition_variable cv;
  std::thread receiver([&] {
    while (auto s = client.read()) {
      const auto it = by_key.find(s->key);
      if (it == by_key.end()) continue;
      detail::decode_payload(sources[it->second].config.kind, *s->payload);
      const std::int64_t done = monotonic_ns();
      latencies[it->second].push_back(static_cast<double>(done - s->publish_timestamp) * 1e-6);
      {
        std::lock_guard lock(mu);
        ++received;
      }
      cv.notify_all();
    }
  });

  const auto start = std::chrono::steady_clock::now();
  const auto period = std::chrono::duration<double>(1.0 / rate_hz);
  for (std::size_t tick = 0; tick < ticks; ++tick) {
    if (pacing == Pacing::RealTime) {
      std::this_thread::sleep_until(start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                static_cast<double>(tick) * period));
    }
    for (const auto& src : sources) {
      const std::int64_t t0 = monotonic_ns();
      bus.publish(src.key, detail::build_payload(src, tick), t0);
    }
    if (pacing == Pacing::Lockstep) {
      std::unique_lock lock(mu);
      cv.wait_for(lock, std::chrono::seconds(5), [&] { return received >= (tick + 1) * sources.size(); });
    }
  }
  {
    std::unique_lock lock(mu);
    cv.wait_for(lock, std::chrono::seconds(5), [&] { return received >= ticks * sources.size(); });
  }
  fanout.stop();
  client.close();
  receiver.join();

  std::vector<LatencyResult> out;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    LatencyResult r;
    r.stream = sources[i].config.name;
    r.samples_ms = std::move(latencies[i]);
    r.n = r.samples_ms.size();
    r.published = ticks;
    r.dropped = ticks - r.n;
    double sum = 0.0;
    for (double v : r.samples_ms) sum += v;
    r.mean_ms = r.n ? sum / static_cast<double>(r.n) : 0.0;
    double sq = 0.0;
    for (double v : r.samples_ms) sq += (v - r.mean_ms) * (v - r.mean_ms);
    r.std_ms = r.n > 1 ? std::sqrt(sq / static_cast<double>(r.n - 1)) : 0.0;
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_latency_csv(std::ostream& os, const std::vector<LatencyResult>& results) {
  os << "stream,mean_ms,std_ms,n\n";
  for (const auto& r : results) os << r.stream << ',' << r.mean_ms << ',' << r.std_ms << ',' << r.n << '\n';
}

}  // namespace agrisim
