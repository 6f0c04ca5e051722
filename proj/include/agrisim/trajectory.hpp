#pragma once

#include "agrisim/frames.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace agrisim {

/// Reference flat outputs for the tracking controller.
struct FlatOutputRef {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  Vec3 jerk = Vec3::Zero();
  Vec3 snap = Vec3::Zero();
  double yaw = 0.0;
  double yaw_rate = 0.0;

  static FlatOutputRef hold(const Vec3& position, double yaw) {
    FlatOutputRef r;
    r.position = position;
    r.yaw = yaw;
    return r;
  }

  bool finite() const {
    return position.allFinite() && velocity.allFinite() && acceleration.allFinite() && jerk.allFinite() &&
           snap.allFinite() && std::isfinite(yaw) && std::isfinite(yaw_rate);
  }
};

struct Waypoint {
  Vec3 position = Vec3::Zero();
  std::optional<double> yaw;
};

/// Polynomial coefficients in local segment time, lowest order first.
using PositionPoly = std::array<double, 8>;
using YawPoly = std::array<double, 4>;

struct TrajectorySegment {
  double duration = 0.0;
  std::array<PositionPoly, 3> axes{};
  YawPoly yaw{};
};

namespace poly {

/// d^order/dt^order of sum c_k t^k.
template <std::size_t N>
double eval(const std::array<double, N>& c, double t, int order) {
  double result = 0.0;
  for (int k = static_cast<int>(N) - 1; k >= order; --k) {
    double factor = 1.0;
    for (int j = 0; j < order; ++j) factor *= static_cast<double>(k - j);
    result = result * t + factor * c[static_cast<std::size_t>(k)];
  }
  return result;
}

/// Row of the map coefficients -> d^order/dt^order at normalised time tau, for degree N-1.
inline double basis(int k, double tau, int order) {
  if (k < order) return 0.0;
  double factor = 1.0;
  for (int j = 0; j < order; ++j) factor *= static_cast<double>(k - j);
  return factor * std::pow(tau, k - order);
}

}  // namespace poly

/**
 * Piecewise degree-7 position / degree-3 yaw trajectory. Immutable after
 * construction. Evaluation outside [start, start + total] holds the boundary
 * position/yaw with zero derivatives.
 */
class PiecewiseTrajectory {
 public:
  PiecewiseTrajectory() = default;
  PiecewiseTrajectory(std::vector<TrajectorySegment> segments, double start_time)
      : segments_(std::move(segments)), start_time_(start_time) {
    if (segments_.empty()) throw std::invalid_argument("PiecewiseTrajectory: no segments");
    for (const auto& s : segments_) {
      if (!(s.duration > 0.0)) throw std::invalid_argument("PiecewiseTrajectory: durations must be positive");
    }
  }

  const std::vector<TrajectorySegment>& segments() const { return segments_; }
  double start_time() const { return start_time_; }
  double total_duration() const {
    double t = 0.0;
    for (const auto& s : segments_) t += s.duration;
    return t;
  }
  double end_time() const { return start_time_ + total_duration(); }
  bool empty() const { return segments_.empty(); }

  FlatOutputRef evaluate(double t) const {
    if (segments_.empty()) return {};
    double local = t - start_time_;
    if (local <= 0.0) return boundary(segments_.front(), 0.0);
    for (const auto& seg : segments_) {
      if (local <= seg.duration) return at(seg, local);
      local -= seg.duration;
    }
    return boundary(segments_.back(), segments_.back().duration);
  }

  /// Left/right limits at the interior boundary between segment i and i+1.
  FlatOutputRef left_limit(std::size_t i) const { return at(segments_.at(i), segments_.at(i).duration); }
  FlatOutputRef right_limit(std::size_t i) const { return at(segments_.at(i + 1), 0.0); }

  /// Integral of squared snap summed over axes, evaluated analytically.
  double snap_cost() const {
    double total = 0.0;
    for (const auto& seg : segments_) {
      for (const auto& c : seg.axes) total += segment_snap_cost(c, seg.duration);
    }
    return total;
  }

  static double segment_snap_cost(const PositionPoly& c, double duration) {
    // snap = sum_{k>=4} k!/(k-4)! c_k t^(k-4)
    std::array<double, 4> s{};
    for (int k = 4; k < 8; ++k) s[k - 4] = static_cast<double>(k * (k - 1) * (k - 2) * (k - 3)) * c[k];
    double cost = 0.0;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) cost += s[i] * s[j] * std::pow(duration, i + j + 1) / (i + j + 1);
    }
    return cost;
  }

 private:
  static FlatOutputRef at(const TrajectorySegment& seg, double t) {
    FlatOutputRef r;
    for (int a = 0; a < 3; ++a) {
      const auto& c = seg.axes[static_cast<std::size_t>(a)];
      r.position[a] = poly::eval(c, t, 0);
      r.velocity[a] = poly::eval(c, t, 1);
      r.acceleration[a] = poly::eval(c, t, 2);
      r.jerk[a] = poly::eval(c, t, 3);
      r.snap[a] = poly::eval(c, t, 4);
    }
    r.yaw = poly::eval(seg.yaw, t, 0);
    r.yaw_rate = poly::eval(seg.yaw, t, 1);
    return r;
  }

  static FlatOutputRef boundary(const TrajectorySegment& seg, double t) {
    FlatOutputRef r;
    for (int a = 0; a < 3; ++a) r.position[a] = poly::eval(seg.axes[static_cast<std::size_t>(a)], t, 0);
    r.yaw = poly::eval(seg.yaw, t, 0);
    return r;
  }

  std::vector<TrajectorySegment> segments_;
  double start_time_ = 0.0;
};

inline constexpr double kMinSegmentTime = 0.5;

// Peaks of |s'| and |s''| for the unit rest-to-rest min-snap profile
// s(u) = 35u^4 - 84u^5 + 70u^6 - 20u^7 on u in [0, 1]. A move of size d over T
// seconds peaks at d*kRestToRestPeakRate/T and d*kRestToRestPeakAccel/T^2.
inline constexpr double kRestToRestPeakRate = 2.1875;
inline constexpr double kRestToRestPeakAccel = 7.513188404391611;

/// duration_i = max(|w_{i+1} - w_i| / avg_speed, 0.5 s).
inline std::vector<double> allocate_segment_times(std::span<const Vec3> waypoints, double avg_speed) {
  if (waypoints.size() < 2) throw std::invalid_argument("allocate_segment_times: need at least 2 waypoints");
  if (!(avg_speed > 0.0)) throw std::invalid_argument("allocate_segment_times: avg_speed must be positive");
  std::vector<double> out;
  out.reserve(waypoints.size() - 1);
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    out.push_back(std::max((waypoints[i + 1] - waypoints[i]).norm() / avg_speed, kMinSegmentTime));
  }
  return out;
}

namespace detail {

/**
 * Solves the piecewise polynomial of degree 2r-1 minimising the integral of
 * the squared r-th derivative through `values`, with derivatives 1..r-1 zero
 * at both ends. With only positions pinned at interior knots, optimality is
 * equivalent to continuity of derivatives 1..2r-2 there, which makes the
 * whole problem one square linear system. Time is normalised per segment for
 * conditioning; the returned coefficients are in local seconds.
 */
template <int R>
std::vector<std::array<double, 2 * R>> solve_min_derivative_spline(std::span<const double> values,
                                                                   std::span<const double> durations) {
  constexpr int n = 2 * R;  // coefficients per segment
  const int m = static_cast<int>(durations.size());
  const int size = n * m;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(size);
  int row = 0;

  // Normalised time tau = t / T: d^k/dt^k = T^-k d^k/dtau^k.
  auto put = [&](int seg, double tau, int order, double weight) {
    const double scale = std::pow(durations[static_cast<std::size_t>(seg)], -order);
    for (int k = 0; k < n; ++k) a(row, seg * n + k) += weight * scale * poly::basis(k, tau, order);
  };

  put(0, 0.0, 0, 1.0);
  b[row++] = values[0];
  for (int order = 1; order < R; ++order) {
    put(0, 0.0, order, 1.0);
    b[row++] = 0.0;
  }
  for (int s = 0; s < m; ++s) {
    put(s, 1.0, 0, 1.0);
    b[row++] = values[static_cast<std::size_t>(s + 1)];
    if (s + 1 < m) {
      put(s + 1, 0.0, 0, 1.0);
      b[row++] = values[static_cast<std::size_t>(s + 1)];
      for (int order = 1; order <= 2 * R - 2; ++order) {
        put(s, 1.0, order, 1.0);
        put(s + 1, 0.0, order, -1.0);
        b[row++] = 0.0;
      }
    }
  }
  for (int order = 1; order < R; ++order) {
    put(m - 1, 1.0, order, 1.0);
    b[row++] = 0.0;
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw std::invalid_argument("min_snap_trajectory: singular constraint system");
  const Eigen::VectorXd x = lu.solve(b);

  std::vector<std::array<double, n>> out(static_cast<std::size_t>(m));
  for (int s = 0; s < m; ++s) {
    const double duration = durations[static_cast<std::size_t>(s)];
    for (int k = 0; k < n; ++k) {
      out[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] = x[s * n + k] / std::pow(duration, k);
    }
  }
  return out;
}

/// Fills unspecified yaws by linear interpolation in time between specified ones, unwrapped.
inline std::vector<double> yaw_targets(std::span<const Waypoint> waypoints, std::span<const double> durations) {
  const std::size_t n = waypoints.size();
  std::vector<double> times(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) times[i] = times[i - 1] + durations[i - 1];

  std::vector<std::size_t> known;
  for (std::size_t i = 0; i < n; ++i) {
    if (waypoints[i].yaw) known.push_back(i);
  }
  std::vector<double> out(n, 0.0);
  if (known.empty()) return out;

  // Unwrap the specified yaws so consecutive targets take the short way round.
  std::vector<double> unwrapped(known.size());
  unwrapped[0] = *waypoints[known[0]].yaw;
  for (std::size_t k = 1; k < known.size(); ++k) {
    unwrapped[k] = unwrapped[k - 1] + wrap_to_pi(*waypoints[known[k]].yaw - unwrapped[k - 1]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i <= known.front()) {
      out[i] = unwrapped.front();
    } else if (i >= known.back()) {
      out[i] = unwrapped.back();
    } else {
      std::size_t k = 0;
      while (known[k + 1] < i) ++k;
      const double t0 = times[known[k]];
      const double t1 = times[known[k + 1]];
      const double alpha = (times[i] - t0) / (t1 - t0);
      out[i] = unwrapped[k] + alpha * (unwrapped[k + 1] - unwrapped[k]);
    }
  }
  return out;
}

}  // namespace detail

/**
 * Minimum-snap trajectory through the waypoints (degree 7 per axis), with a
 * minimum-acceleration cubic for yaw. Rest at both ends.
 */
inline PiecewiseTrajectory min_snap_trajectory(std::span<const Waypoint> waypoints, std::span<const double> durations,
                                               double start_time = 0.0) {
  if (waypoints.size() < 2 || waypoints.size() != durations.size() + 1) {
    throw std::invalid_argument("min_snap_trajectory: waypoint count must equal durations count + 1");
  }
  for (double d : durations) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw std::invalid_argument("min_snap_trajectory: singular constraint system (non-positive duration)");
    }
  }
  for (const auto& w : waypoints) {
    if (!w.position.allFinite() || (w.yaw && !std::isfinite(*w.yaw))) {
      throw std::invalid_argument("min_snap_trajectory: non-finite waypoint");
    }
  }

  std::vector<TrajectorySegment> segments(durations.size());
  for (std::size_t s = 0; s < durations.size(); ++s) segments[s].duration = durations[s];

  std::vector<double> values(waypoints.size());
  for (int axis = 0; axis < 3; ++axis) {
    for (std::size_t i = 0; i < waypoints.size(); ++i) values[i] = waypoints[i].position[axis];
    const auto coeffs = detail::solve_min_derivative_spline<4>(values, durations);
    for (std::size_t s = 0; s < segments.size(); ++s) segments[s].axes[static_cast<std::size_t>(axis)] = coeffs[s];
  }
  const auto yaw_values = detail::yaw_targets(waypoints, durations);
  const auto yaw_coeffs = detail::solve_min_derivative_spline<2>(yaw_values, durations);
  for (std::size_t s = 0; s < segments.size(); ++s) segments[s].yaw = yaw_coeffs[s];

  return PiecewiseTrajectory(std::move(segments), start_time);
}

inline FlatOutputRef eval_trajectory(const PiecewiseTrajectory& traj, double t) { return traj.evaluate(t); }

}  // namespace agrisim
