#pragma once

#include "agrisim/scene.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace agrisim {

struct CaptureWaypoint {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;  // camera boresight toward the target
};

/// n viewpoints on a horizontal circle, at angles 2 pi k / n, each facing the centre.
inline std::vector<CaptureWaypoint> circular_capture_waypoints(const Vec3& center, double radius, double altitude,
                                                               int n) {
  if (!(radius > 0.0)) throw std::invalid_argument("capture radius must be > 0");
  if (n < 0) throw std::invalid_argument("capture waypoint count must be >= 0");
  std::vector<CaptureWaypoint> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n;
    const Vec3 p(center.x() + radius * std::cos(a), center.y() + radius * std::sin(a), altitude);
    out.push_back({p, std::atan2(center.y() - p.y(), center.x() - p.x())});
  }
  return out;
}

struct LogSample {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
};

class LogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Executed trajectory, strictly increasing in time.
class TrajectoryLog {
 public:
  std::string scenario;
  Vec3 goal = Vec3::Zero();

  void append(const LogSample& s) {
    if (!std::isfinite(s.t) || !s.position.allFinite() || !std::isfinite(s.yaw)) {
      throw LogError("log sample must be finite");
    }
    if (!samples_.empty() && !(s.t > samples_.back().t)) throw LogError("log times must be strictly increasing");
    samples_.push_back(s);
  }

  const std::vector<LogSample>& samples() const { return samples_; }
  bool empty() const { return samples_.empty(); }
  std::size_t size() const { return samples_.size(); }

  /// CSV with header `t,x,y,z,yaw`. Errors name the 1-based line.
  static TrajectoryLog parse_csv(std::istream& in) {
    TrajectoryLog log;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      if (!header_seen) {
        header_seen = true;
        std::string compact;
        for (char c : line) {
          if (c != ' ' && c != '\t') compact.push_back(c);
        }
        if (compact == "t,x,y,z,yaw") continue;
      }
      double v[5];
      std::size_t pos = 0;
      for (int i = 0; i < 5; ++i) {
        const std::size_t end = line.find(',', pos);
        if ((i < 4) != (end != std::string::npos)) {
          throw LogError("row " + std::to_string(line_no) + ": expected 5 comma-separated fields");
        }
        std::string field = line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
        const auto first = field.find_first_not_of(" \t");
        const auto last = field.find_last_not_of(" \t");
        field = first == std::string::npos ? "" : field.substr(first, last - first + 1);
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v[i]);
        if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
          throw LogError("row " + std::to_string(line_no) + ": invalid number '" + field + "'");
        }
        pos = end + 1;
      }
      try {
        log.append({v[0], Vec3(v[1], v[2], v[3]), v[4]});
      } catch (const LogError& e) {
        throw LogError("row " + std::to_string(line_no) + ": " + e.what());
      }
    }
    return log;
  }

  static TrajectoryLog parse_csv(const std::string& text) {
    std::istringstream in(text);
    return parse_csv(in);
  }

  void write_csv(std::ostream& os) const {
    os << "t,x,y,z,yaw\n";
    os.precision(17);
    for (const auto& s : samples_) {
      os << s.t << ',' << s.position.x() << ',' << s.position.y() << ',' << s.position.z() << ',' << s.yaw << '\n';
    }
  }

 private:
  std::vector<LogSample> samples_;
};

inline double goal_convergence(const TrajectoryLog& log, const Vec3& goal) {
  if (log.empty()) throw LogError("goal_convergence: empty log");
  return (log.samples().back().position - goal).norm();
}

inline constexpr double kClearanceStep = 0.05;  // m

/// Minimum distance to any scene object, with the path resampled every
/// kClearanceStep metres between consecutive samples.
inline double obstacle_clearance(const TrajectoryLog& log, const Scene& scene) {
  if (log.empty()) throw LogError("obstacle_clearance: empty log");
  const auto& s = log.samples();
  double best = scene.min_distance(s.front().position);
  for (std::size_t i = 1; i < s.size(); ++i) {
    const Vec3 a = s[i - 1].position;
    const Vec3 b = s[i].position;
    const int steps = std::max(1, static_cast<int>(std::ceil((b - a).norm() / kClearanceStep)));
    for (int k = 1; k <= steps; ++k) {
      best = std::min(best, scene.min_distance(a + (b - a) * (static_cast<double>(k) / steps)));
    }
  }
  return best;
}

inline double flight_time(const TrajectoryLog& log) {
  if (log.empty()) throw LogError("flight_time: empty log");
  return log.samples().back().t - log.samples().front().t;
}

}  // namespace agrisim
