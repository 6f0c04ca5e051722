#include "agrisim/control.hpp"
#include "agrisim/dynamics.hpp"
#include "agrisim/trajectory.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <numbers>
#include <random>

using namespace agrisim;

namespace {

constexpr double kDt = 0.002;

/// Closed loop: vehicle model as plant, SE(3) controller, motor mixing.
MultirotorState fly(MultirotorState s, const std::function<FlatOutputRef(double)>& ref, double duration,
                    const std::function<void(const MultirotorState&, const FlatOutputRef&)>& observe = {}) {
  const VehicleParams p;
  const Se3Gains g;
  const QuadrotorModel model(p);
  const int steps = static_cast<int>(std::round(duration / kDt));
  for (int i = 0; i < steps; ++i) {
    const FlatOutputRef r = ref(s.time);
    const auto cmd = se3_control(s, r, g, p);
    const auto mix = model.mixer().mix(cmd.thrust, cmd.moments);
    s = model.step(s, mix.speeds, kDt);
    if (observe) observe(s, ref(s.time));
  }
  return s;
}

}  // namespace

TEST(Se3Control, HoverEquilibrium) {
  const VehicleParams p;
  const auto s = MultirotorState::hover(p, Vec3(1, -2, 3));
  const auto cmd = se3_control(s, FlatOutputRef::hold(Vec3(1, -2, 3), 0.0), Se3Gains{}, p);
  EXPECT_NEAR(cmd.thrust, p.mass * p.gravity, 1e-9);
  EXPECT_NEAR(cmd.moments.norm(), 0.0, 1e-9);
}

TEST(Se3Control, HoverEquilibriumWithYaw) {
  const VehicleParams p;
  const auto s = MultirotorState::hover(p, Vec3(0, 0, 2), 1.2);
  const auto cmd = se3_control(s, FlatOutputRef::hold(Vec3(0, 0, 2), 1.2), Se3Gains{}, p);
  EXPECT_NEAR(cmd.thrust, p.mass * p.gravity, 1e-9);
  EXPECT_NEAR(cmd.moments.norm(), 0.0, 1e-9);
}

TEST(Se3Control, BelowReferenceClimbs) {
  const VehicleParams p;
  const auto s = MultirotorState::hover(p, Vec3(0, 0, 1));
  const auto cmd = se3_control(s, FlatOutputRef::hold(Vec3(0, 0, 2), 0.0), Se3Gains{}, p);
  EXPECT_GT(cmd.thrust, p.mass * p.gravity);
  EXPECT_NEAR(cmd.moments.norm(), 0.0, 1e-9);
}

TEST(Se3Control, ThrustNeverNegative) {
  const VehicleParams p;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 2000; ++i) {
    MultirotorState s;
    s.position = 10 * Vec3(u(rng), u(rng), u(rng));
    s.velocity = 5 * Vec3(u(rng), u(rng), u(rng));
    s.orientation = UnitQuaternion(u(rng), u(rng), u(rng), u(rng)).normalized();
    s.angular_velocity = 3 * Vec3(u(rng), u(rng), u(rng));
    FlatOutputRef r = FlatOutputRef::hold(10 * Vec3(u(rng), u(rng), u(rng)), 3 * u(rng));
    r.acceleration = 20 * Vec3(u(rng), u(rng), u(rng));
    r.jerk = 5 * Vec3(u(rng), u(rng), u(rng));
    const auto cmd = se3_control(s, r, Se3Gains{}, p);
    ASSERT_GE(cmd.thrust, 0.0);
    ASSERT_TRUE(cmd.moments.allFinite());
  }
}

TEST(Se3Control, DegenerateForceKeepsAttitude) {
  const VehicleParams p;
  auto s = MultirotorState::hover(p, Vec3::Zero(), 0.4);
  FlatOutputRef r = FlatOutputRef::hold(Vec3::Zero(), 0.0);
  r.acceleration = Vec3(0, 0, -p.gravity);  // free-fall reference: f_des = 0
  const auto cmd = se3_control(s, r, Se3Gains{}, p);
  EXPECT_TRUE(cmd.desired_attitude.isApprox(s.orientation.toRotationMatrix(), 1e-12));
  EXPECT_NEAR(cmd.moments.norm(), 0.0, 1e-12);
}

TEST(Se3Control, ClosedLoopFromOneMetreOffset) {
  const VehicleParams p;
  const Vec3 target(0, 0, 2);
  for (const Vec3& offset : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, -1), Vec3(0.6, -0.6, 0.529)}) {
    auto s = MultirotorState::hover(p, target + offset.normalized());
    s = fly(s, [&](double) { return FlatOutputRef::hold(target, 0.0); }, 5.0);
    EXPECT_LT((s.position - target).norm(), 0.01) << offset.transpose();
  }
}

TEST(Se3Control, CircleTrackingRms) {
  const VehicleParams p;
  const double radius = 2.0;
  const double speed = 0.5;
  const int per_lap = 24;
  const int laps = 2;
  std::vector<Waypoint> wps;
  for (int k = 0; k <= per_lap * laps; ++k) {
    const double a = 2 * std::numbers::pi * k / per_lap;
    wps.push_back({Vec3(radius * std::cos(a), radius * std::sin(a), 2.0), std::nullopt});
  }
  std::vector<Vec3> pts;
  for (const auto& w : wps) pts.push_back(w.position);
  const auto durations = allocate_segment_times(pts, speed);
  const auto traj = min_snap_trajectory(wps, durations);
  const double lap_time = 2 * std::numbers::pi * radius / speed;

  double sq = 0.0;
  int n = 0;
  auto s = MultirotorState::hover(p, wps.front().position);
  fly(s, [&](double t) { return traj.evaluate(t); }, traj.total_duration(),
      [&](const MultirotorState& st, const FlatOutputRef& r) {
        if (st.time > lap_time) {
          sq += (st.position - r.position).squaredNorm();
          ++n;
        }
      });
  ASSERT_GT(n, 0);
  const double rms = std::sqrt(sq / n);
  EXPECT_LT(rms, 0.15);
  RecordProperty("rms", std::to_string(rms));
}

TEST(Se3Gains, Validation) {
  Se3Gains g;
  EXPECT_NO_THROW(g.validate());
  g.k_pos.x() = -1;
  try {
    g.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("k_pos"), std::string::npos);
  }
}

TEST(VelocityMode, ZeroCommandIsFixedPoint) {
  const auto f0 = VelocityFilterState::at(Vec3(1, 2, 0), 0.3, 1.5);
  const auto r = velocity_mode_step(f0, 0.0, 0.0, 1.0 / 30.0);
  EXPECT_EQ(r.filter.virtual_position, Vec3(1, 2, 1.5));
  EXPECT_EQ(r.filter.virtual_yaw, 0.3);
  EXPECT_EQ(r.reference.velocity, Vec3::Zero());
}

TEST(VelocityMode, SlewLimitBoundsFirstStage) {
  const auto f0 = VelocityFilterState::at(Vec3::Zero(), 0.0, 1.5);
  const auto r = velocity_mode_step(f0, 3.0, 0.0, 1.0 / 30.0);
  EXPECT_NEAR(r.filter.slewed_v_fwd, 4.0 / 30.0, 1e-12);
  EXPECT_LE(r.filter.filtered_v_fwd, 4.0 / 30.0);
}

TEST(VelocityMode, ConstantCommandConvergesAndHeadingIntegrates) {
  const double dt = 1.0 / 30.0;
  const VelocityFilterConfig cfg;
  auto f = VelocityFilterState::at(Vec3::Zero(), 0.0, cfg.hold_altitude);
  double heading = 0.0;
  // Closed form of the slew + first-order filter for the yaw-rate channel.
  double slewed = 0.0;
  double filtered = 0.0;
  const double alpha = dt / (cfg.lowpass_tau + dt);
  for (int i = 0; i < 100; ++i) {
    f = velocity_mode_step(f, 2.0, 0.8, dt, cfg).filter;
    slewed = std::min(0.8, slewed + cfg.slew_yaw_rate * dt);
    filtered += alpha * (slewed - filtered);
    heading += filtered * dt;
  }
  EXPECT_NEAR(f.filtered_v_fwd, 2.0, 0.02);
  EXPECT_NEAR(f.filtered_yaw_rate, 0.8, 0.008);
  EXPECT_NEAR(f.virtual_yaw, heading, 1e-9);
  EXPECT_DOUBLE_EQ(f.virtual_position.z(), cfg.hold_altitude);
}

TEST(VelocityMode, YawIsContinuous) {
  const double dt = 0.002;
  const ActionBounds bounds;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> v(-5, 5);
  auto f = VelocityFilterState::at(Vec3::Zero(), 0.0, 1.5);
  for (int i = 0; i < 5000; ++i) {
    const auto next = velocity_mode_step(f, bounds.clamp_v_fwd(v(rng)), bounds.clamp_yaw_rate(v(rng)), dt).filter;
    ASSERT_LE(std::abs(next.virtual_yaw - f.virtual_yaw), bounds.max_abs_yaw_rate() * dt + 1e-15);
    f = next;
  }
}

TEST(VelocityMode, ClosedLoopFollowsVirtualSetpoint) {
  const VehicleParams p;
  const VelocityFilterConfig cfg;
  auto f = VelocityFilterState::at(Vec3(0, 0, 0), 0.0, cfg.hold_altitude);
  auto s = MultirotorState::hover(p, Vec3(0, 0, cfg.hold_altitude));
  FlatOutputRef current = FlatOutputRef::hold(s.position, 0.0);
  s = fly(s,
          [&](double) {
            const auto r = velocity_mode_step(f, 1.0, 0.2, kDt, cfg);
            f = r.filter;
            current = r.reference;
            return current;
          },
          6.0);
  EXPECT_LT((s.position - f.virtual_position).norm(), 0.2);
  EXPECT_NEAR(s.position.z(), cfg.hold_altitude, 0.05);
}
