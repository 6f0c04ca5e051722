#pragma once

#include "agrisim/frames.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

// Analytic primitives used for scene geometry: ray intersection, exact signed
// distance, and horizontal cross-sections. All shapes are axis aligned.

namespace agrisim {

enum class Shape { Sphere, VerticalCylinder, Ellipsoid, Box };

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Aabb& o) {
    min = min.cwiseMin(o.min);
    max = max.cwiseMax(o.max);
  }
  bool contains(const Vec3& p) const { return (p.array() >= min.array()).all() && (p.array() <= max.array()).all(); }
  bool contains(const Aabb& o) const { return contains(o.min) && contains(o.max); }
  Vec3 centroid() const { return 0.5 * (min + max); }
  bool operator==(const Aabb&) const = default;

  /// Slab test; returns the entry/exit parameters clipped to [t_min, t_max].
  std::optional<std::pair<double, double>> intersect(const Vec3& origin, const Vec3& inv_dir, double t_min,
                                                     double t_max) const {
    for (int a = 0; a < 3; ++a) {
      double t0 = (min[a] - origin[a]) * inv_dir[a];
      double t1 = (max[a] - origin[a]) * inv_dir[a];
      if (inv_dir[a] < 0.0) std::swap(t0, t1);
      // NaN from 0 * inf means the ray lies in the slab plane; treat as inside.
      if (!std::isnan(t0)) t_min = std::max(t_min, t0);
      if (!std::isnan(t1)) t_max = std::min(t_max, t1);
      if (t_max < t_min) return std::nullopt;
    }
    return std::make_pair(t_min, t_max);
  }
};

inline constexpr double kRayEpsilon = 1e-9;

namespace geom {

namespace detail {

inline double robust_length(double a, double b) {
  return std::hypot(a, b);
}
inline double robust_length(double a, double b, double c) {
  return std::hypot(a, b, c);
}

/// Bisection for the ellipse root (Eberly); r0 = (e0/e1)^2.
inline double ellipse_root(double r0, double z0, double z1, double g) {
  const double n0 = r0 * z0;
  double s0 = z1 - 1.0;
  double s1 = (g < 0.0) ? 0.0 : robust_length(n0, z1) - 1.0;
  double s = 0.0;
  for (int i = 0; i < 1100; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double ratio0 = n0 / (s + r0);
    const double ratio1 = z1 / (s + 1.0);
    const double gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
    if (gs > 0.0) {
      s0 = s;
    } else if (gs < 0.0) {
      s1 = s;
    } else {
      break;
    }
  }
  return s;
}

/// Unsigned distance from (y0, y1) >= 0 to the ellipse with semi-axes e0 >= e1 > 0.
inline double point_ellipse_quadrant(double e0, double e1, double y0, double y1) {
  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / e0;
      const double z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g != 0.0) {
        const double r0 = (e0 / e1) * (e0 / e1);
        const double sbar = ellipse_root(r0, z0, z1, g);
        const double x0 = r0 * y0 / (sbar + r0);
        const double x1 = y1 / (sbar + 1.0);
        return std::hypot(x0 - y0, x1 - y1);
      }
      return 0.0;
    }
    return std::abs(y1 - e1);
  }
  const double numer0 = e0 * y0;
  const double denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const double xde0 = numer0 / denom0;
    const double x0 = e0 * xde0;
    const double x1 = e1 * std::sqrt(std::max(0.0, 1.0 - xde0 * xde0));
    return std::hypot(x0 - y0, x1);
  }
  return std::abs(y0 - e0);
}

inline double ellipsoid_root(double r0, double r1, double z0, double z1, double z2, double g) {
  const double n0 = r0 * z0;
  const double n1 = r1 * z1;
  double s0 = z2 - 1.0;
  double s1 = (g < 0.0) ? 0.0 : robust_length(n0, n1, z2) - 1.0;
  double s = 0.0;
  for (int i = 0; i < 1100; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double ratio0 = n0 / (s + r0);
    const double ratio1 = n1 / (s + r1);
    const double ratio2 = z2 / (s + 1.0);
    const double gs = ratio0 * ratio0 + ratio1 * ratio1 + ratio2 * ratio2 - 1.0;
    if (gs > 0.0) {
      s0 = s;
    } else if (gs < 0.0) {
      s1 = s;
    } else {
      break;
    }
  }
  return s;
}

/// Unsigned distance from y >= 0 (componentwise) to the ellipsoid e0 >= e1 >= e2 > 0.
inline double point_ellipsoid_octant(double e0, double e1, double e2, double y0, double y1, double y2) {
  if (y2 > 0.0) {
    if (y1 > 0.0) {
      if (y0 > 0.0) {
        const double z0 = y0 / e0;
        const double z1 = y1 / e1;
        const double z2 = y2 / e2;
        const double g = z0 * z0 + z1 * z1 + z2 * z2 - 1.0;
        if (g != 0.0) {
          const double r0 = (e0 / e2) * (e0 / e2);
          const double r1 = (e1 / e2) * (e1 / e2);
          const double sbar = ellipsoid_root(r0, r1, z0, z1, z2, g);
          const double x0 = r0 * y0 / (sbar + r0);
          const double x1 = r1 * y1 / (sbar + r1);
          const double x2 = y2 / (sbar + 1.0);
          return std::hypot(x0 - y0, x1 - y1, x2 - y2);
        }
        return 0.0;
      }
      return point_ellipse_quadrant(e1, e2, y1, y2);
    }
    if (y0 > 0.0) return point_ellipse_quadrant(e0, e2, y0, y2);
    return std::abs(y2 - e2);
  }
  const double denom0 = e0 * e0 - e2 * e2;
  const double denom1 = e1 * e1 - e2 * e2;
  const double numer0 = e0 * y0;
  const double numer1 = e1 * y1;
  if (numer0 < denom0 && numer1 < denom1) {
    const double xde0 = numer0 / denom0;
    const double xde1 = numer1 / denom1;
    const double discr = 1.0 - xde0 * xde0 - xde1 * xde1;
    if (discr > 0.0) {
      const double x0 = e0 * xde0;
      const double x1 = e1 * xde1;
      const double x2 = e2 * std::sqrt(discr);
      return std::hypot(x0 - y0, x1 - y1, x2);
    }
  }
  return point_ellipse_quadrant(e0, e1, y0, y1);
}

}  // namespace detail

/// Signed distance to an axis-aligned ellipse (negative inside).
inline double ellipse_sdf(const Eigen::Vector2d& p, const Eigen::Vector2d& semi) {
  double y0 = std::abs(p.x());
  double y1 = std::abs(p.y());
  double e0 = semi.x();
  double e1 = semi.y();
  if (e0 < e1) {
    std::swap(e0, e1);
    std::swap(y0, y1);
  }
  const double d = detail::point_ellipse_quadrant(e0, e1, y0, y1);
  const double inside = (p.x() / semi.x()) * (p.x() / semi.x()) + (p.y() / semi.y()) * (p.y() / semi.y());
  return inside < 1.0 ? -d : d;
}

/// Signed distance to an axis-aligned ellipsoid centred at the origin.
inline double ellipsoid_sdf(const Vec3& p, const Vec3& semi) {
  std::array<std::pair<double, double>, 3> axes{{{semi.x(), std::abs(p.x())},
                                                 {semi.y(), std::abs(p.y())},
                                                 {semi.z(), std::abs(p.z())}}};
  std::sort(axes.begin(), axes.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const double d = detail::point_ellipsoid_octant(axes[0].first, axes[1].first, axes[2].first, axes[0].second,
                                                  axes[1].second, axes[2].second);
  const double inside = p.cwiseQuotient(semi).squaredNorm();
  return inside < 1.0 ? -d : d;
}

inline double box_sdf(const Vec3& p, const Vec3& half) {
  const Vec3 q = p.cwiseAbs() - half;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

inline double rect_sdf(const Eigen::Vector2d& p, const Eigen::Vector2d& half) {
  const Eigen::Vector2d q = p.cwiseAbs() - half;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

inline double capped_cylinder_sdf(const Vec3& p, double radius, double half_height) {
  const double qx = std::hypot(p.x(), p.y()) - radius;
  const double qz = std::abs(p.z()) - half_height;
  return std::min(std::max(qx, qz), 0.0) + std::hypot(std::max(qx, 0.0), std::max(qz, 0.0));
}

/// Smallest root t > eps of a t^2 + 2 b t + c = 0.
inline std::optional<double> smallest_positive_root(double a, double b, double c) {
  if (a <= 0.0) return std::nullopt;
  const double disc = b * b - a * c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  // Numerically stable pair of roots.
  const double q = (b > 0.0) ? -(b + sq) : -(b - sq);
  double t0 = (q != 0.0) ? q / a : 0.0;
  double t1 = (q != 0.0) ? c / q : 0.0;
  if (q == 0.0) t0 = t1 = 0.0;
  if (t0 > t1) std::swap(t0, t1);
  if (t0 > kRayEpsilon) return t0;
  if (t1 > kRayEpsilon) return t1;
  return std::nullopt;
}

inline std::optional<double> ray_ellipsoid(const Vec3& origin, const Vec3& dir, const Vec3& center, const Vec3& semi) {
  const Vec3 o = (origin - center).cwiseQuotient(semi);
  const Vec3 d = dir.cwiseQuotient(semi);
  return smallest_positive_root(d.squaredNorm(), o.dot(d), o.squaredNorm() - 1.0);
}

inline std::optional<double> ray_sphere(const Vec3& origin, const Vec3& dir, const Vec3& center, double radius) {
  const Vec3 o = origin - center;
  return smallest_positive_root(dir.squaredNorm(), o.dot(dir), o.squaredNorm() - radius * radius);
}

inline std::optional<double> ray_cylinder(const Vec3& origin, const Vec3& dir, const Vec3& center, double radius,
                                          double height) {
  const Vec3 o = origin - center;
  const double half = 0.5 * height;
  std::optional<double> best;
  auto consider = [&](double t) {
    if (t > kRayEpsilon && (!best || t < *best)) best = t;
  };
  // Lateral surface.
  const double a = dir.x() * dir.x() + dir.y() * dir.y();
  if (a > 0.0) {
    const double b = o.x() * dir.x() + o.y() * dir.y();
    const double c = o.x() * o.x() + o.y() * o.y() - radius * radius;
    const double disc = b * b - a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / a, (-b + sq) / a}) {
        const double z = o.z() + t * dir.z();
        if (std::abs(z) <= half) consider(t);
      }
    }
  }
  // Caps.
  if (dir.z() != 0.0) {
    for (double zc : {-half, half}) {
      const double t = (zc - o.z()) / dir.z();
      const double x = o.x() + t * dir.x();
      const double y = o.y() + t * dir.y();
      if (x * x + y * y <= radius * radius) consider(t);
    }
  }
  return best;
}

inline std::optional<double> ray_box(const Vec3& origin, const Vec3& dir, const Vec3& center, const Vec3& half) {
  const Aabb box{center - half, center + half};
  const Vec3 inv = dir.cwiseInverse();
  const auto range = box.intersect(origin, inv, -std::numeric_limits<double>::infinity(),
                                   std::numeric_limits<double>::infinity());
  if (!range) return std::nullopt;
  if (range->first > kRayEpsilon) return range->first;
  if (range->second > kRayEpsilon) return range->second;
  return std::nullopt;
}

}  // namespace geom

}  // namespace agrisim
