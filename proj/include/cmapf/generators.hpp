#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "cmapf/error.hpp"
#include "cmapf/map_spec.hpp"
#include "cmapf/map_text.hpp"
#include "cmapf/perlin.hpp"
#include "cmapf/rng.hpp"

namespace cmapf {

// Every generator splits its key into (layout, placement) = (split 0, split 1).

inline std::size_t obstacle_cell_count(double density, std::size_t rows, std::size_t cols) {
  // The epsilon absorbs products such as 0.3 * 400 landing just below an integer.
  return static_cast<std::size_t>(std::floor(density * static_cast<double>(rows * cols) + 1e-9));
}

inline BoolGrid random_obstacle_grid(const GeneratorConfig& cfg, RandomStream& rs) {
  const std::size_t total = cfg.rows * cfg.cols;
  const std::size_t count = std::min(total, obstacle_cell_count(cfg.obstacle_density, cfg.rows, cfg.cols));
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  BoolGrid grid(cfg.rows, cfg.cols);
  // Partial Fisher-Yates: the first `count` slots are a uniform sample.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rs.below(total - i));
    std::swap(order[i], order[j]);
    grid.cells[order[i]] = 1;
  }
  return grid;
}

inline GeneratedMap gen_random_grid(const GeneratorConfig& cfg, RngKey key) {
  if (cfg.obstacle_density < 0.0 || cfg.obstacle_density > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "obstacle_density must lie in [0, 1]");
  }
  RandomStream rs(split(key, 0));
  GeneratedMap out;
  out.map = map_from_grid(random_obstacle_grid(cfg, rs), cfg.cell_size, cfg.granularity, "random_grid");
  out.placement = place_agents(out.map, cfg, split(key, 1));
  return out;
}

namespace detail {

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
  std::vector<std::size_t> parent;
};

inline std::size_t random_odd(RandomStream& rs, std::size_t lo, std::size_t hi) {
  // odd values in [lo, hi]; lo and hi odd, lo <= hi
  return lo + 2 * static_cast<std::size_t>(rs.below((hi - lo) / 2 + 1));
}

}  // namespace detail

/// Rooms-and-corridors maze on the odd-coordinate lattice:
///  1. place non-overlapping odd-sized rectangular rooms (at least one);
///  2. fill every remaining lattice cell with randomized-DFS corridors;
///  3. collect connector walls (a wall cell between two different regions),
///     shuffle them and open one per region merge until the regions form a
///     spanning tree;
///  4. open every remaining connector independently with probability
///     extra_connection_probability.
inline BoolGrid maze_obstacle_grid(const GeneratorConfig& cfg, RandomStream& rs) {
  const std::size_t H = cfg.rows;
  const std::size_t W = cfg.cols;
  if (H < 7 || W < 7) throw Error(ErrorCode::InvalidArgument, "maze_grid needs at least 7x7 cells");
  if (cfg.extra_connection_probability < 0.0 || cfg.extra_connection_probability > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "extra_connection_probability must lie in [0, 1]");
  }
  constexpr long kWall = -1;
  std::vector<long> region(H * W, kWall);
  const auto at = [&](std::size_t r, std::size_t c) -> long& { return region[r * W + c]; };
  long next_region = 0;

  // Largest odd coordinate usable inside the outer wall.
  const std::size_t max_r = (H - 2) % 2 == 1 ? H - 2 : H - 3;
  const std::size_t max_c = (W - 2) % 2 == 1 ? W - 2 : W - 3;

  struct Room {
    std::size_t r, c, h, w;
  };
  std::vector<Room> rooms;
  const std::size_t size_lo = std::max<std::size_t>(3, cfg.room_min | 1u);
  const std::size_t size_hi_cfg = std::max(size_lo, cfg.room_max % 2 == 1 ? cfg.room_max : cfg.room_max - 1);
  for (std::size_t attempt = 0; attempt < cfg.room_attempts && rooms.size() < cfg.max_rooms; ++attempt) {
    const std::size_t h_hi = std::min(size_hi_cfg, max_r);
    const std::size_t w_hi = std::min(size_hi_cfg, max_c);
    if (h_hi < size_lo || w_hi < size_lo) break;
    const std::size_t h = detail::random_odd(rs, size_lo, h_hi);
    const std::size_t w = detail::random_odd(rs, size_lo, w_hi);
    const std::size_t r = detail::random_odd(rs, 1, max_r - h + 1);
    const std::size_t c = detail::random_odd(rs, 1, max_c - w + 1);
    const bool overlaps = std::any_of(rooms.begin(), rooms.end(), [&](const Room& o) {
      return r <= o.r + o.h && o.r <= r + h && c <= o.c + o.w && o.c <= c + w;
    });
    if (overlaps) continue;
    rooms.push_back({r, c, h, w});
  }
  if (rooms.empty()) rooms.push_back({1, 1, 3, 3});
  for (const Room& room : rooms) {
    for (std::size_t r = room.r; r < room.r + room.h; ++r) {
      for (std::size_t c = room.c; c < room.c + room.w; ++c) at(r, c) = next_region;
    }
    ++next_region;
  }

  // Corridors.
  for (std::size_t r0 = 1; r0 <= max_r; r0 += 2) {
    for (std::size_t c0 = 1; c0 <= max_c; c0 += 2) {
      if (at(r0, c0) != kWall) continue;
      const long id = next_region++;
      at(r0, c0) = id;
      std::vector<GridCell> stack{{r0, c0}};
      while (!stack.empty()) {
        const GridCell cur = stack.back();
        GridCell options[4];
        std::size_t n_options = 0;
        if (cur.row >= 3 && at(cur.row - 2, cur.col) == kWall) options[n_options++] = {cur.row - 2, cur.col};
        if (cur.row + 2 <= max_r && at(cur.row + 2, cur.col) == kWall) options[n_options++] = {cur.row + 2, cur.col};
        if (cur.col >= 3 && at(cur.row, cur.col - 2) == kWall) options[n_options++] = {cur.row, cur.col - 2};
        if (cur.col + 2 <= max_c && at(cur.row, cur.col + 2) == kWall) options[n_options++] = {cur.row, cur.col + 2};
        if (n_options == 0) {
          stack.pop_back();
          continue;
        }
        const GridCell nxt = options[rs.below(n_options)];
        at((cur.row + nxt.row) / 2, (cur.col + nxt.col) / 2) = id;
        at(nxt.row, nxt.col) = id;
        stack.push_back(nxt);
      }
    }
  }

  struct Connector {
    std::size_t r, c;
    long a, b;
  };
  std::vector<Connector> connectors;
  for (std::size_t r = 1; r + 1 < H; ++r) {
    for (std::size_t c = 1; c + 1 < W; ++c) {
      if (at(r, c) != kWall) continue;
      const long left = at(r, c - 1), right = at(r, c + 1), up = at(r - 1, c), down = at(r + 1, c);
      if (left != kWall && right != kWall && left != right) {
        connectors.push_back({r, c, left, right});
      } else if (up != kWall && down != kWall && up != down) {
        connectors.push_back({r, c, up, down});
      }
    }
  }
  rs.shuffle(connectors);
  detail::DisjointSets sets(static_cast<std::size_t>(next_region));
  std::vector<const Connector*> extras;
  for (const Connector& k : connectors) {
    if (sets.unite(static_cast<std::size_t>(k.a), static_cast<std::size_t>(k.b))) {
      at(k.r, k.c) = k.a;
    } else {
      extras.push_back(&k);
    }
  }
  for (const Connector* k : extras) {
    if (rs.bernoulli(cfg.extra_connection_probability)) at(k->r, k->c) = k->a;
  }

  BoolGrid grid(H, W);
  for (std::size_t i = 0; i < H * W; ++i) grid.cells[i] = region[i] == kWall ? 1 : 0;
  return grid;
}

inline GeneratedMap gen_maze_grid(const GeneratorConfig& cfg, RngKey key) {
  RandomStream rs(split(key, 0));
  GeneratedMap out;
  out.map = map_from_grid(maze_obstacle_grid(cfg, rs), cfg.cell_size, cfg.granularity, "maze_grid");
  out.placement = place_agents(out.map, cfg, split(key, 1));
  return out;
}

/// Labels 4-connected free components; returns the cells of the largest one
/// (the first found in row-major order on ties).
inline std::vector<GridCell> largest_free_component(const BoolGrid& grid) {
  std::vector<long> label(grid.height * grid.width, -1);
  std::vector<GridCell> best;
  long next = 0;
  for (std::size_t r0 = 0; r0 < grid.height; ++r0) {
    for (std::size_t c0 = 0; c0 < grid.width; ++c0) {
      if (grid.at(r0, c0) || label[r0 * grid.width + c0] >= 0) continue;
      std::vector<GridCell> comp;
      std::queue<GridCell> q;
      q.push({r0, c0});
      label[r0 * grid.width + c0] = next;
      while (!q.empty()) {
        const GridCell cur = q.front();
        q.pop();
        comp.push_back(cur);
        const long dr[4] = {-1, 1, 0, 0};
        const long dc[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const long nr = static_cast<long>(cur.row) + dr[k];
          const long nc = static_cast<long>(cur.col) + dc[k];
          if (!grid.in_bounds(nr, nc)) continue;
          const auto ur = static_cast<std::size_t>(nr);
          const auto uc = static_cast<std::size_t>(nc);
          if (grid.at(ur, uc) || label[ur * grid.width + uc] >= 0) continue;
          label[ur * grid.width + uc] = next;
          q.push({ur, uc});
        }
      }
      ++next;
      if (comp.size() > best.size()) best = std::move(comp);
    }
  }
  std::sort(best.begin(), best.end(),
            [](GridCell a, GridCell b) { return a.row < b.row || (a.row == b.row && a.col < b.col); });
  return best;
}

inline BoolGrid cave_obstacle_grid(const GeneratorConfig& cfg, RandomStream& rs) {
  const PerlinNoise noise(rs);
  const double ox = rs.uniform(0.0, 256.0);
  const double oy = rs.uniform(0.0, 256.0);
  BoolGrid grid(cfg.rows, cfg.cols);
  for (std::size_t r = 0; r < cfg.rows; ++r) {
    for (std::size_t c = 0; c < cfg.cols; ++c) {
      const double v = noise((static_cast<double>(c) + 0.5) * cfg.noise_frequency + ox,
                             (static_cast<double>(r) + 0.5) * cfg.noise_frequency + oy);
      grid.set(r, c, v > cfg.noise_threshold);
    }
  }
  return grid;
}

inline GeneratedMap gen_caves(const GeneratorConfig& cfg, RngKey key) {
  if (cfg.noise_threshold < -1.0 || cfg.noise_threshold > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "noise threshold must lie in [-1, 1]");
  }
  RandomStream rs(split(key, 0));
  BoolGrid grid = cave_obstacle_grid(cfg, rs);
  std::vector<GridCell> placeable = largest_free_component(grid);
  if (placeable.size() < cfg.num_agents * 4) {
    throw Error(ErrorCode::DegenerateMap, "largest free region has " + std::to_string(placeable.size()) +
                                              " cells, need " + std::to_string(cfg.num_agents * 4));
  }
  GeneratedMap out;
  out.map = map_from_grid(std::move(grid), cfg.cell_size, cfg.granularity, "caves_cont");
  out.map.start_cells = placeable;
  out.map.goal_cells = std::move(placeable);
  out.placement = place_agents(out.map, cfg, split(key, 1));
  return out;
}

/// Slot i takes layout i % layouts.size() and placement key split(key, i),
/// so a slot's placement does not depend on the batch size.
inline std::vector<GeneratedMap> gen_batched(const std::vector<MapSpec>& layouts, const GeneratorConfig& cfg,
                                             RngKey key, std::size_t batch_size) {
  if (layouts.empty()) throw Error(ErrorCode::InvalidArgument, "batched generation needs at least one layout");
  std::vector<GeneratedMap> out;
  out.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const MapSpec& map = layouts[i % layouts.size()];
    try {
      out.push_back({map, place_agents(map, cfg, split(key, i))});
    } catch (const Error& e) {
      throw e.with_context("slot " + std::to_string(i));
    }
  }
  return out;
}

/// Geometry of the give-way scenario (world units).
struct GiveWayLayout {
  static constexpr double kCorridorLength = 3.0;
  static constexpr double kCorridorHalfWidth = 0.28;
  static constexpr double kWallRadius = 0.05;
  static constexpr double kChamberCenterX = 1.5;
  static constexpr double kChamberHalfWidth = 0.3;
  static constexpr double kChamberDepth = 0.6;
  static constexpr double kEntranceHalfWidth = 0.15;
  static constexpr double kSmallRadius = 0.1;
  static constexpr double kLargeRadius = 0.2;
};

/// A closed corridor along y = 0 with a chamber above its middle. The
/// chamber entrance admits the small agent (0) but not the large one (1);
/// the corridor is too narrow for both to pass side by side. The agents
/// start at opposite ends with swapped goals.
inline GeneratedMap gen_hetero_give_way(const GeneratorConfig& cfg) {
  using L = GiveWayLayout;
  constexpr double step = L::kWallRadius;  // chain spacing: touching-overlapping circles
  const double wall_y = L::kCorridorHalfWidth + L::kWallRadius;
  const double chamber_x0 = L::kChamberCenterX - L::kChamberHalfWidth - L::kWallRadius;
  const double chamber_x1 = L::kChamberCenterX + L::kChamberHalfWidth + L::kWallRadius;
  const double chamber_top = wall_y + L::kChamberDepth + L::kWallRadius;
  std::vector<Circle> lm;
  const auto chain = [&](Vec2 a, Vec2 b, bool skip_entrance) {
    const double len = norm(b - a);
    const auto n = static_cast<long>(std::llround(len / step));
    for (long i = 0; i <= n; ++i) {
      const Vec2 p = a + (b - a) * (static_cast<double>(i) / static_cast<double>(n));
      if (skip_entrance && std::abs(p.x - L::kChamberCenterX) < L::kEntranceHalfWidth + L::kWallRadius - 1e-9) {
        continue;
      }
      lm.push_back({p, L::kWallRadius});
    }
  };
  const double x_end = L::kCorridorLength;
  chain({0.0, -wall_y}, {x_end, -wall_y}, false);                 // bottom wall
  chain({0.0, wall_y}, {chamber_x0, wall_y}, false);              // top wall, left part
  chain({chamber_x0 + step, wall_y}, {chamber_x1 - step, wall_y}, true);  // chamber floor with entrance
  chain({chamber_x1, wall_y}, {x_end, wall_y}, false);            // top wall, right part
  chain({-L::kWallRadius, -wall_y}, {-L::kWallRadius, wall_y}, false);       // left cap
  chain({x_end + L::kWallRadius, -wall_y}, {x_end + L::kWallRadius, wall_y}, false);  // right cap
  chain({chamber_x0, wall_y + step}, {chamber_x0, chamber_top}, false);      // chamber sides
  chain({chamber_x1, wall_y + step}, {chamber_x1, chamber_top}, false);
  chain({chamber_x0 + step, chamber_top}, {chamber_x1 - step, chamber_top}, false);  // chamber roof

  GeneratedMap out;
  MapSpec& m = out.map;
  m.landmarks = std::move(lm);
  const double margin = 2.0 * L::kWallRadius;
  m.bounds = {{-margin - L::kWallRadius, -wall_y - margin}, {x_end + margin + L::kWallRadius, chamber_top + margin}};
  m.cell_size = cfg.cell_size;
  m.layout_id = "hetero_give_way";
  PlacementSpec& p = out.placement;
  p.agent_radii = {L::kSmallRadius, L::kLargeRadius};
  p.agent_models = {DynamicsModel::Holonomic, DynamicsModel::Holonomic};
  p.agent_starts = {{0.3, 0.0}, {x_end - 0.3, 0.0}};
  p.goals = {p.agent_starts[1], p.agent_starts[0]};
  return out;
}

/// Builds maps for an environment. Text layouts are parsed once here.
class MapSource {
 public:
  explicit MapSource(GeneratorConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.kind == MapKind::StringGrid || cfg_.kind == MapKind::BatchedStringGrid ||
        cfg_.kind == MapKind::MovingAI) {
      if (cfg_.layouts.empty()) {
        throw Error(ErrorCode::InvalidArgument, std::string(to_string(cfg_.kind)) + " needs at least one layout");
      }
      for (std::size_t i = 0; i < cfg_.layouts.size(); ++i) {
        std::string name = i < cfg_.layout_names.size() ? cfg_.layout_names[i]
                                                         : std::string(to_string(cfg_.kind)) + "#" + std::to_string(i);
        try {
          layouts_.push_back(cfg_.kind == MapKind::MovingAI ? parse_movingai(cfg_.layouts[i], cfg_, name)
                                                            : parse_string_grid(cfg_.layouts[i], cfg_, name));
        } catch (const Error& e) {
          throw e.with_context("layout " + name);
        }
      }
    }
  }

  const GeneratorConfig& config() const { return cfg_; }
  const std::vector<MapSpec>& layouts() const { return layouts_; }

  /// `slot` selects the layout for text-based kinds (slot % layouts).
  GeneratedMap generate(RngKey key, std::size_t slot = 0) const {
    switch (cfg_.kind) {
      case MapKind::RandomGrid: return gen_random_grid(cfg_, key);
      case MapKind::MazeGrid: return gen_maze_grid(cfg_, key);
      case MapKind::Caves: return gen_caves(cfg_, key);
      case MapKind::HeteroGiveWay: return gen_hetero_give_way(cfg_);
      case MapKind::StringGrid:
      case MapKind::BatchedStringGrid:
      case MapKind::MovingAI: {
        const MapSpec& map = layouts_[slot % layouts_.size()];
        return {map, place_agents(map, cfg_, split(split(key, 1), slot))};
      }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown map kind");
  }

 private:
  GeneratorConfig cfg_;
  std::vector<MapSpec> layouts_;
};

}  // namespace cmapf
