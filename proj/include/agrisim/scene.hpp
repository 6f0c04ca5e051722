#pragma once

#include "agrisim/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agrisim {

using ClassId = std::uint16_t;
using Rgb8 = std::array<std::uint8_t, 3>;

inline constexpr ClassId kBackgroundClass = 0;

struct SemanticClass {
  ClassId id = 0;
  std::string name;
  Rgb8 color{0, 0, 0};
  bool operator==(const SemanticClass&) const = default;
};

inline std::string_view shape_name(Shape s) {
  switch (s) {
    case Shape::Sphere: return "sphere";
    case Shape::VerticalCylinder: return "vertical_cylinder";
    case Shape::Ellipsoid: return "ellipsoid";
    case Shape::Box: return "box";
  }
  return "?";
}

inline std::optional<Shape> shape_from_name(std::string_view n) {
  for (Shape s : {Shape::Sphere, Shape::VerticalCylinder, Shape::Ellipsoid, Shape::Box}) {
    if (shape_name(s) == n) return s;
  }
  return std::nullopt;
}

/// Number of entries in `dims` for each shape: radius; radius + height;
/// semi-axes; full side lengths.
inline std::size_t shape_dim_count(Shape s) {
  switch (s) {
    case Shape::Sphere: return 1;
    case Shape::VerticalCylinder: return 2;
    case Shape::Ellipsoid:
    case Shape::Box: return 3;
  }
  return 0;
}

struct SceneObject {
  Shape shape = Shape::Sphere;
  Vec3 center = Vec3::Zero();
  std::vector<double> dims;
  ClassId class_id = 0;
  std::string class_name;

  static SceneObject sphere(const Vec3& c, double r, ClassId id, std::string name) {
    return {Shape::Sphere, c, {r}, id, std::move(name)};
  }
  static SceneObject cylinder(const Vec3& c, double r, double h, ClassId id, std::string name) {
    return {Shape::VerticalCylinder, c, {r, h}, id, std::move(name)};
  }
  static SceneObject ellipsoid(const Vec3& c, const Vec3& semi, ClassId id, std::string name) {
    return {Shape::Ellipsoid, c, {semi.x(), semi.y(), semi.z()}, id, std::move(name)};
  }
  static SceneObject box(const Vec3& c, const Vec3& size, ClassId id, std::string name) {
    return {Shape::Box, c, {size.x(), size.y(), size.z()}, id, std::move(name)};
  }

  Vec3 dims3() const { return Vec3(dims.at(0), dims.at(1), dims.at(2)); }

  Aabb bounds() const {
    Vec3 half;
    switch (shape) {
      case Shape::Sphere: half = Vec3::Constant(dims[0]); break;
      case Shape::VerticalCylinder: half = Vec3(dims[0], dims[0], 0.5 * dims[1]); break;
      case Shape::Ellipsoid: half = dims3(); break;
      case Shape::Box: half = 0.5 * dims3(); break;
    }
    return {center - half, center + half};
  }

  /// Exact signed distance (negative inside).
  double sdf(const Vec3& p) const {
    const Vec3 q = p - center;
    switch (shape) {
      case Shape::Sphere: return q.norm() - dims[0];
      case Shape::VerticalCylinder: return geom::capped_cylinder_sdf(q, dims[0], 0.5 * dims[1]);
      case Shape::Ellipsoid: return geom::ellipsoid_sdf(q, dims3());
      case Shape::Box: return geom::box_sdf(q, 0.5 * dims3());
    }
    return std::numeric_limits<double>::infinity();
  }

  std::optional<double> intersect(const Vec3& origin, const Vec3& dir) const {
    switch (shape) {
      case Shape::Sphere: return geom::ray_sphere(origin, dir, center, dims[0]);
      case Shape::VerticalCylinder: return geom::ray_cylinder(origin, dir, center, dims[0], dims[1]);
      case Shape::Ellipsoid: return geom::ray_ellipsoid(origin, dir, center, dims3());
      case Shape::Box: return geom::ray_box(origin, dir, center, 0.5 * dims3());
    }
    return std::nullopt;
  }

  /// Signed 2-D distance from (x, y) to the horizontal slice of the object at
  /// height z, or nullopt if the plane misses the object.
  std::optional<double> slice_sdf(double x, double y, double z) const {
    const Eigen::Vector2d q(x - center.x(), y - center.y());
    const double dz = z - center.z();
    switch (shape) {
      case Shape::Sphere: {
        const double r = dims[0];
        if (std::abs(dz) >= r) return std::nullopt;
        return q.norm() - std::sqrt(r * r - dz * dz);
      }
      case Shape::VerticalCylinder:
        if (std::abs(dz) > 0.5 * dims[1]) return std::nullopt;
        return q.norm() - dims[0];
      case Shape::Ellipsoid: {
        const double c = dims[2];
        if (std::abs(dz) >= c) return std::nullopt;
        const double s = std::sqrt(1.0 - (dz / c) * (dz / c));
        return geom::ellipse_sdf(q, Eigen::Vector2d(dims[0] * s, dims[1] * s));
      }
      case Shape::Box:
        if (std::abs(dz) > 0.5 * dims[2]) return std::nullopt;
        return geom::rect_sdf(q, Eigen::Vector2d(0.5 * dims[0], 0.5 * dims[1]));
    }
    return std::nullopt;
  }

  bool operator==(const SceneObject& o) const {
    return shape == o.shape && center == o.center && dims == o.dims && class_id == o.class_id &&
           class_name == o.class_name;
  }
};

struct RayHit {
  double distance = std::numeric_limits<double>::infinity();
  ClassId class_id = kBackgroundClass;
  /// Index of the object hit; equal to the object count for the ground plane.
  std::size_t object_index = 0;
};

struct CollisionResult {
  bool collided = false;
  std::optional<ClassId> class_id;
};

class SceneError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Immutable collection of primitives with a BVH for ray queries. Safe to
/// query concurrently.
class Scene {
 public:
  Scene() = default;

  Scene(std::vector<SemanticClass> classes, std::vector<SceneObject> objects, std::optional<double> ground_z,
        Aabb bounds)
      : classes_(std::move(classes)), objects_(std::move(objects)), ground_z_(ground_z), bounds_(bounds) {
    validate();
    build_bvh();
  }

  const std::vector<SemanticClass>& classes() const { return classes_; }
  const std::vector<SceneObject>& objects() const { return objects_; }
  std::optional<double> ground_z() const { return ground_z_; }
  const Aabb& bounds() const { return bounds_; }
  ClassId ground_class() const { return ground_class_; }

  const SemanticClass* find_class(ClassId id) const {
    for (const auto& c : classes_) {
      if (c.id == id) return &c;
    }
    return nullptr;
  }
  const SemanticClass* find_class(std::string_view name) const {
    for (const auto& c : classes_) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  /// Nearest intersection with t > 0 across objects and the ground plane.
  /// `direction` must be unit length within 1e-6.
  std::optional<RayHit> raycast(const Vec3& origin, const Vec3& direction,
                                double max_distance = std::numeric_limits<double>::infinity()) const {
    if (std::abs(direction.norm() - 1.0) > 1e-6) throw std::invalid_argument("raycast direction must be unit length");
    RayHit best;
    best.distance = max_distance;
    bool found = false;
    auto accept = [&](double t, std::size_t index, ClassId cls) {
      if (t < best.distance || (found && t == best.distance && index < best.object_index)) {
        best = {t, cls, index};
        found = true;
      }
    };
    if (!nodes_.empty()) {
      const Vec3 inv = direction.cwiseInverse();
      std::size_t stack[64];
      std::size_t top = 0;
      stack[top++] = 0;
      while (top > 0) {
        const Node& n = nodes_[stack[--top]];
        const auto range = n.box.intersect(origin, inv, 0.0, best.distance);
        if (!range) continue;
        if (n.count > 0) {
          for (std::size_t k = n.first; k < n.first + n.count; ++k) {
            const std::size_t i = order_[k];
            if (const auto t = objects_[i].intersect(origin, direction)) accept(*t, i, objects_[i].class_id);
          }
        } else {
          stack[top++] = n.right;
          stack[top++] = n.left;
        }
      }
    }
    if (ground_z_ && direction.z() != 0.0) {
      const double t = (*ground_z_ - origin.z()) / direction.z();
      if (t > kRayEpsilon) accept(t, objects_.size(), ground_class_);
    }
    if (!found) return std::nullopt;
    return best;
  }

  /// Minimum signed distance over all objects; the ground is excluded.
  double min_distance(const Vec3& p) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& o : objects_) d = std::min(d, o.sdf(p));
    return d;
  }

  /// Sphere-vs-scene test. Objects are checked in index order, then the ground.
  CollisionResult check_collision(const Vec3& p, double radius) const {
    if (!(radius > 0.0)) throw std::invalid_argument("collision radius must be > 0");
    for (const auto& o : objects_) {
      const Aabb b = o.bounds();
      if ((p.array() < b.min.array() - radius).any() || (p.array() > b.max.array() + radius).any()) continue;
      if (o.sdf(p) < radius) return {true, o.class_id};
    }
    if (ground_z_ && p.z() - *ground_z_ < radius) return {true, ground_class_};
    return {};
  }

  bool operator==(const Scene& o) const {
    return classes_ == o.classes_ && objects_ == o.objects_ && ground_z_ == o.ground_z_ && bounds_ == o.bounds_;
  }

 private:
  struct Node {
    Aabb box;
    std::size_t left = 0, right = 0;
    std::size_t first = 0, count = 0;
  };

  void validate() {
    for (std::size_t i = 0; i < classes_.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (classes_[i].id == classes_[j].id || classes_[i].name == classes_[j].name) {
          throw SceneError("classes[" + std::to_string(i) + "]: duplicate class id or name '" + classes_[i].name +
                           "'");
        }
      }
      if (classes_[i].id == kBackgroundClass) {
        throw SceneError("classes[" + std::to_string(i) + "]: id 0 is reserved for background");
      }
    }
    if (!bounds_.min.allFinite() || !bounds_.max.allFinite() || (bounds_.max.array() < bounds_.min.array()).any()) {
      throw SceneError("bounds: min must be <= max and finite");
    }
    if (ground_z_) {
      if (!std::isfinite(*ground_z_)) throw SceneError("ground_z must be finite");
      const auto* g = find_class("ground");
      if (!g) throw SceneError("ground_z is set but no class named 'ground' is declared");
      ground_class_ = g->id;
    }
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      const auto& o = objects_[i];
      const std::string where = "objects[" + std::to_string(i) + "]";
      if (o.dims.size() != shape_dim_count(o.shape)) {
        throw SceneError(where + ": " + std::string(shape_name(o.shape)) + " needs " +
                         std::to_string(shape_dim_count(o.shape)) + " dims, got " + std::to_string(o.dims.size()));
      }
      for (double d : o.dims) {
        if (!(d > 0.0) || !std::isfinite(d)) throw SceneError(where + ": dims must be strictly positive");
      }
      if (!o.center.allFinite()) throw SceneError(where + ": center must be finite");
      if (!bounds_.contains(o.center)) throw SceneError(where + ": center lies outside scene bounds");
      const auto* c = find_class(o.class_name);
      if (!c) throw SceneError(where + ": unknown class '" + o.class_name + "'");
      if (c->id != o.class_id) throw SceneError(where + ": class id does not match class '" + o.class_name + "'");
    }
  }

  void build_bvh() {
    if (objects_.empty()) return;
    order_.resize(objects_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    boxes_.reserve(objects_.size());
    for (const auto& o : objects_) boxes_.push_back(o.bounds());
    nodes_.reserve(2 * objects_.size());
    build(0, objects_.size(), 0);
  }

  std::size_t build(std::size_t first, std::size_t count, int depth) {
    Node n;
    Aabb centroids;
    for (std::size_t k = first; k < first + count; ++k) {
      n.box.extend(boxes_[order_[k]]);
      const Vec3 c = boxes_[order_[k]].centroid();
      centroids.extend({c, c});
    }
    const std::size_t index = nodes_.size();
    nodes_.push_back(n);
    if (count <= 4 || depth > 40) {
      nodes_[index].first = first;
      nodes_[index].count = count;
      return index;
    }
    int axis = 0;
    (centroids.max - centroids.min).maxCoeff(&axis);
    const std::size_t mid = first + count / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(first), order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(first + count), [&](std::size_t a, std::size_t b) {
                       const double ca = boxes_[a].centroid()[axis];
                       const double cb = boxes_[b].centroid()[axis];
                       return ca < cb || (ca == cb && a < b);
                     });
    const std::size_t left = build(first, mid - first, depth + 1);
    const std::size_t right = build(mid, first + count - mid, depth + 1);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
  }

  std::vector<SemanticClass> classes_;
  std::vector<SceneObject> objects_;
  std::optional<double> ground_z_;
  Aabb bounds_{Vec3::Zero(), Vec3::Zero()};
  ClassId ground_class_ = kBackgroundClass;

  std::vector<Node> nodes_;
  std::vector<std::size_t> order_;
  std::vector<Aabb> boxes_;
};

}  // namespace agrisim
