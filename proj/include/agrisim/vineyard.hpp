#pragma once

#include "agrisim/scene.hpp"

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agrisim {

/// SplitMix64. Used instead of <random> distributions so that generated
/// scenes are bit-identical across standard library implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

 private:
  std::uint64_t state_;
};

inline constexpr ClassId kGroundClass = 1;
inline constexpr ClassId kTrunkClass = 2;
inline constexpr ClassId kCanopyClass = 3;

inline std::vector<SemanticClass> orchard_classes() {
  return {{kGroundClass, "ground", {110, 85, 60}},
          {kTrunkClass, "trunk", {95, 60, 30}},
          {kCanopyClass, "canopy", {45, 150, 55}}};
}

struct VineyardLayout {
  double trunk_radius = 0.08;
  double trunk_height = 1.0;
  double canopy_center_height = 1.5;
  double canopy_half_height = 0.6;
  /// Along-row canopy semi-axis as a fraction of tree spacing.
  double canopy_length_fraction = 0.45;
  /// Cross-row canopy semi-axis: min(max_half_width, fraction * row spacing).
  double canopy_width_fraction = 0.2;
  double canopy_max_half_width = 0.6;
  double jitter_fraction = 0.1;
  /// Free space left around the planted area, in metres.
  double margin_along = 6.0;
  double ceiling = 5.0;
  double ground_z = 0.0;

  double max_canopy_half_width(double row_spacing) const {
    return std::min(canopy_max_half_width, canopy_width_fraction * row_spacing);
  }
};

/// Rows run along +x at y = r * row_spacing; tree k of a row sits near
/// x = k * tree_spacing. Each plant is a trunk cylinder plus a canopy ellipsoid,
/// emitted in that order.
inline Scene generate_vineyard(int rows, int trees_per_row, double row_spacing, double tree_spacing,
                               std::uint64_t seed, const VineyardLayout& layout = {}) {
  if (rows < 1 || trees_per_row < 1) throw std::invalid_argument("vineyard: rows and trees_per_row must be >= 1");
  if (!(row_spacing > 0.0) || !(tree_spacing > 0.0)) throw std::invalid_argument("vineyard: spacings must be > 0");

  SplitMix64 rng(seed);
  const double gz = layout.ground_z;
  const double half_width = layout.max_canopy_half_width(row_spacing);
  std::vector<SceneObject> objects;
  objects.reserve(static_cast<std::size_t>(2 * rows * trees_per_row));
  for (int r = 0; r < rows; ++r) {
    const double y = r * row_spacing;
    for (int k = 0; k < trees_per_row; ++k) {
      const double jitter = layout.jitter_fraction * tree_spacing;
      const double x = k * tree_spacing + rng.uniform(-jitter, jitter);
      objects.push_back(SceneObject::cylinder(Vec3(x, y, gz + 0.5 * layout.trunk_height), layout.trunk_radius,
                                              layout.trunk_height, kTrunkClass, "trunk"));
      const Vec3 semi(layout.canopy_length_fraction * tree_spacing * rng.uniform(0.9, 1.0),
                      half_width * rng.uniform(0.9, 1.0), layout.canopy_half_height * rng.uniform(0.9, 1.0));
      objects.push_back(
          SceneObject::ellipsoid(Vec3(x, y, gz + layout.canopy_center_height), semi, kCanopyClass, "canopy"));
    }
  }
  const double x_max = (trees_per_row - 1) * tree_spacing;
  const double y_max = (rows - 1) * row_spacing;
  const Aabb bounds{Vec3(-layout.margin_along, -row_spacing, gz),
                    Vec3(x_max + layout.margin_along, y_max + row_spacing, gz + layout.ceiling)};
  return Scene(orchard_classes(), std::move(objects), gz, bounds);
}

struct Scenario {
  std::string name;
  Scene scene;
  Vec3 spawn = Vec3::Zero();
  double spawn_yaw = 0.0;
  Vec3 goal = Vec3::Zero();
  /// Lateral corridor centres (y) between adjacent rows; empty for non-row scenes.
  std::vector<double> corridors;
};

struct VineyardParams {
  int rows = 4;
  int trees_per_row = 10;
  double row_spacing = 3.0;
  double tree_spacing = 1.5;
};

inline constexpr double kFlightAltitude = 1.5;

/// Spawn at the entrance of one inter-row corridor and the goal beyond the far
/// end of another, both chosen from the seed.
inline Scenario vineyard_scenario(std::uint64_t seed, const VineyardParams& p = {}) {
  Scenario s;
  s.name = "vineyard_default";
  s.scene = generate_vineyard(p.rows, p.trees_per_row, p.row_spacing, p.tree_spacing, seed);
  for (int r = 0; r + 1 < p.rows; ++r) s.corridors.push_back((r + 0.5) * p.row_spacing);
  if (s.corridors.empty()) s.corridors.push_back(-0.5 * p.row_spacing);
  SplitMix64 rng(seed ^ 0x5CE7A210ull);
  const double start_y = s.corridors[rng.below(s.corridors.size())];
  const double goal_y = s.corridors[rng.below(s.corridors.size())];
  const double x_end = (p.trees_per_row - 1) * p.tree_spacing;
  s.spawn = Vec3(-3.0, start_y, kFlightAltitude);
  s.spawn_yaw = 0.0;
  s.goal = Vec3(x_end + 3.0, goal_y, kFlightAltitude);
  return s;
}

/// One tree at the origin with its canopy centred at flight altitude, for
/// orbit captures.
inline Scenario tree_inspection_scenario() {
  Scenario s;
  s.name = "tree_inspection";
  std::vector<SceneObject> objects{
      SceneObject::cylinder(Vec3(0, 0, 0.5), 0.12, 1.0, kTrunkClass, "trunk"),
      SceneObject::ellipsoid(Vec3(0, 0, kFlightAltitude), Vec3(0.9, 0.9, 0.7), kCanopyClass, "canopy")};
  s.scene = Scene(orchard_classes(), std::move(objects), 0.0, Aabb{Vec3(-10, -10, 0), Vec3(10, 10, 6)});
  s.spawn = Vec3(4.0, 0.0, kFlightAltitude);
  s.spawn_yaw = std::numbers::pi;
  s.goal = s.spawn;
  return s;
}

inline Scenario open_field_scenario() {
  Scenario s;
  s.name = "open_field";
  s.scene = Scene(orchard_classes(), {}, 0.0, Aabb{Vec3(-20, -20, 0), Vec3(20, 20, 10)});
  s.spawn = Vec3(0, 0, kFlightAltitude);
  s.goal = Vec3(10, 0, kFlightAltitude);
  return s;
}

inline const std::vector<std::string_view>& scenario_names() {
  static const std::vector<std::string_view> names{"vineyard_default", "tree_inspection", "open_field"};
  return names;
}

class UnknownScenario : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline Scenario make_scenario(std::string_view name, std::uint64_t seed) {
  if (name == "vineyard_default") return vineyard_scenario(seed);
  if (name == "tree_inspection") return tree_inspection_scenario();
  if (name == "open_field") return open_field_scenario();
  throw UnknownScenario("unknown scenario '" + std::string(name) + "'");
}

}  // namespace agrisim
