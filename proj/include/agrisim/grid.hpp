#pragma once

#include "agrisim/scene.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace agrisim {

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

/// Planar occupancy over the scene footprint; cell (0, 0) has its lower-left
/// corner at `origin`.
struct OccupancyGrid {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double cell_size = 0.5;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> occupancy;

  static OccupancyGrid empty(Eigen::Vector2d origin, double cell_size, int width, int height) {
    if (!(cell_size > 0.0)) throw std::invalid_argument("grid cell_size must be > 0");
    if (width <= 0 || height <= 0) throw std::invalid_argument("grid dimensions must be positive");
    return {origin, cell_size, width, height,
            std::vector<std::uint8_t>(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0)};
  }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) + c.x; }
  bool occupied(Cell c) const { return occupancy[index(c)] != 0; }
  void set(Cell c, bool occ) { occupancy[index(c)] = occ ? 1 : 0; }

  Eigen::Vector2d center(Cell c) const {
    return origin + cell_size * Eigen::Vector2d(c.x + 0.5, c.y + 0.5);
  }

  std::optional<Cell> cell_of(double x, double y) const {
    const Cell c{static_cast<int>(std::floor((x - origin.x()) / cell_size)),
                 static_cast<int>(std::floor((y - origin.y()) / cell_size))};
    if (!in_bounds(c)) return std::nullopt;
    return c;
  }

  std::size_t occupied_count() const {
    std::size_t n = 0;
    for (auto v : occupancy) n += v != 0;
    return n;
  }
};

/// A cell is occupied when its centre is within `inflation` of the
/// horizontal slice of any object at `altitude`.
inline OccupancyGrid rasterize_scene_to_grid(const Scene& scene, double cell_size, double inflation, double altitude) {
  if (!(cell_size > 0.0)) throw std::invalid_argument("grid cell_size must be > 0");
  if (!(inflation >= 0.0)) throw std::invalid_argument("grid inflation must be >= 0");
  const auto& b = scene.bounds();
  const int w = std::max(1, static_cast<int>(std::ceil((b.max.x() - b.min.x()) / cell_size)));
  const int h = std::max(1, static_cast<int>(std::ceil((b.max.y() - b.min.y()) / cell_size)));
  auto grid = OccupancyGrid::empty(Eigen::Vector2d(b.min.x(), b.min.y()), cell_size, w, h);
  // Absorbs rounding when a centre lies exactly at the inflation distance.
  const double limit = inflation + 1e-12;
  for (const auto& o : scene.objects()) {
    const Aabb ob = o.bounds();
    if (altitude < ob.min.z() || altitude > ob.max.z()) continue;
    const int x0 = std::max(0, static_cast<int>(std::floor((ob.min.x() - limit - grid.origin.x()) / cell_size)));
    const int x1 = std::min(w - 1, static_cast<int>(std::floor((ob.max.x() + limit - grid.origin.x()) / cell_size)));
    const int y0 = std::max(0, static_cast<int>(std::floor((ob.min.y() - limit - grid.origin.y()) / cell_size)));
    const int y1 = std::min(h - 1, static_cast<int>(std::floor((ob.max.y() + limit - grid.origin.y()) / cell_size)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Cell c{x, y};
        if (grid.occupied(c)) continue;
        const auto p = grid.center(c);
        if (const auto d = o.slice_sdf(p.x(), p.y(), altitude); d && *d <= limit) grid.set(c, true);
      }
    }
  }
  return grid;
}

/// Path cost as counts of straight and diagonal moves; compared by value.
struct MoveCount {
  std::int64_t straight = 0;
  std::int64_t diagonal = 0;
  double value() const { return static_cast<double>(straight) + std::numbers::sqrt2 * static_cast<double>(diagonal); }
};

inline constexpr int kSnapRadiusCells = 3;

/// Nearest free cell within kSnapRadiusCells (Euclidean in cells; ties by
/// row, then column).
inline std::optional<Cell> snap_to_free(const OccupancyGrid& g, Cell c) {
  if (!g.occupied(c)) return c;
  std::optional<Cell> best;
  int best_d2 = 0;
  for (int dy = -kSnapRadiusCells; dy <= kSnapRadiusCells; ++dy) {
    for (int dx = -kSnapRadiusCells; dx <= kSnapRadiusCells; ++dx) {
      const Cell n{c.x + dx, c.y + dy};
      if (!g.in_bounds(n) || g.occupied(n)) continue;
      const int d2 = dx * dx + dy * dy;
      if (!best || d2 < best_d2) {
        best = n;
        best_d2 = d2;
      }
    }
  }
  return best;
}

/// Visits the 8-connected neighbours of `c` that are free, skipping diagonal
/// moves that would cut an occupied corner.
template <typename F>
void for_each_neighbor(const OccupancyGrid& g, Cell c, F&& f) {
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const Cell n{c.x + dx, c.y + dy};
      if (!g.in_bounds(n) || g.occupied(n)) continue;
      const bool diagonal = dx != 0 && dy != 0;
      if (diagonal && (g.occupied({c.x + dx, c.y}) || g.occupied({c.x, c.y + dy}))) continue;
      f(n, diagonal);
    }
  }
}

/// Shortest-path move counts between two free cells, or nullopt if unreachable.
inline std::optional<MoveCount> astar_moves(const OccupancyGrid& g, Cell start, Cell goal) {
  if (start == goal) return MoveCount{};
  const std::size_t n = g.occupancy.size();
  std::vector<MoveCount> best(n);
  std::vector<std::uint8_t> seen(n, 0);
  auto heuristic = [&](Cell c) {
    const auto dx = std::abs(c.x - goal.x), dy = std::abs(c.y - goal.y);
    return static_cast<double>(std::max(dx, dy) - std::min(dx, dy)) + std::numbers::sqrt2 * std::min(dx, dy);
  };
  struct Entry {
    double f;
    double g;
    Cell cell;
    bool operator>(const Entry& o) const {
      if (f != o.f) return f > o.f;
      return g < o.g;  // prefer deeper nodes on ties
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  best[g.index(start)] = {};
  seen[g.index(start)] = 1;
  open.push({heuristic(start), 0.0, start});
  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    const auto& cur = best[g.index(e.cell)];
    if (e.g > cur.value()) continue;  // stale entry
    if (e.cell == goal) return cur;
    const MoveCount base = cur;
    for_each_neighbor(g, e.cell, [&](Cell nb, bool diagonal) {
      MoveCount next = base;
      (diagonal ? next.diagonal : next.straight) += 1;
      const std::size_t i = g.index(nb);
      if (!seen[i] || next.value() < best[i].value()) {
        seen[i] = 1;
        best[i] = next;
        open.push({next.value() + heuristic(nb), next.value(), nb});
      }
    });
  }
  return std::nullopt;
}

/// A* path length in metres between two world points (z ignored). Points
/// outside the grid are a precondition violation; an unreachable goal is
/// reported as nullopt.
inline std::optional<double> astar_distance(const OccupancyGrid& g, const Vec3& start, const Vec3& goal) {
  const auto s = g.cell_of(start.x(), start.y());
  const auto t = g.cell_of(goal.x(), goal.y());
  if (!s || !t) throw std::out_of_range("astar_distance: start or goal outside the grid");
  const auto s_free = snap_to_free(g, *s);
  const auto t_free = snap_to_free(g, *t);
  if (!s_free || !t_free) return std::nullopt;
  const auto moves = astar_moves(g, *s_free, *t_free);
  if (!moves) return std::nullopt;
  return g.cell_size * moves->value();
}

}  // namespace agrisim
