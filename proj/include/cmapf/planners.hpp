#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cmapf/error.hpp"
#include "cmapf/geometry.hpp"
#include "cmapf/map_spec.hpp"
#include "cmapf/rng.hpp"
#include "cmapf/spatial_hash.hpp"
#include "cmapf/world.hpp"

namespace cmapf {

struct PlannerParams {
  std::size_t iterations = 3000;
  double step_size = 0.2;
  double goal_bias = 0.05;
  double goal_tolerance = 0.1;
  double rewire_gamma = 0.0;  // <= 0: 1.5 x bounds diagonal
};

inline constexpr std::size_t kRrtIterations = 50000;
inline constexpr std::size_t kRrtStarIterations = 3000;

inline PlannerParams default_planner_params(const MapSpec& map, double agent_radius, double goal_radius,
                                            std::size_t iterations) {
  PlannerParams p;
  p.iterations = iterations;
  p.step_size = 2.0 * agent_radius;
  p.goal_tolerance = goal_radius;
  p.rewire_gamma = 1.5 * map.bounds.diagonal();
  return p;
}

struct Path {
  std::vector<Vec2> waypoints;
  double cost = 0.0;

  friend bool operator==(const Path&, const Path&) = default;
};

inline double path_length(const std::vector<Vec2>& pts) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += norm(pts[i] - pts[i - 1]);
  return total;
}

/// Landmarks grown by the agent radius; the agent is planned as a point
/// confined to the bounds shrunk by its radius.
class InflatedMap {
 public:
  InflatedMap(const MapSpec& map, double agent_radius) : radius_(agent_radius) {
    double max_r = 0.0;
    for (const Circle& c : map.landmarks) {
      circles_.push_back({c.center, c.radius + agent_radius});
      max_r = std::max(max_r, c.radius + agent_radius);
    }
    hash_ = SpatialHash(std::max(map.cell_size, 2.0 * max_r));
    hash_.build(circles_);
    region_ = {{map.bounds.min.x + agent_radius, map.bounds.min.y + agent_radius},
               {map.bounds.max.x - agent_radius, map.bounds.max.y - agent_radius}};
  }

  const Bounds& region() const { return region_; }
  const std::vector<Circle>& circles() const { return circles_; }
  double agent_radius() const { return radius_; }

  bool point_free(Vec2 p) const { return segment_free(p, p); }

  /// Both endpoints inside the region and clearance > 0 to every inflated landmark.
  bool segment_free(Vec2 a, Vec2 b) const {
    if (!region_.contains(a) || !region_.contains(b)) return false;
    hash_.query({(a + b) * 0.5, norm(b - a) * 0.5}, 1e-9, scratch_);
    for (const std::uint32_t j : scratch_) {
      if (!(segment_circle_clearance(a, b, circles_[j]) > 0.0)) return false;
    }
    return true;
  }

 private:
  double radius_;
  std::vector<Circle> circles_;
  SpatialHash hash_;
  Bounds region_;
  mutable std::vector<std::uint32_t> scratch_;
};

/// Smallest clearance of any path segment against any inflated landmark,
/// checked against every landmark (no broad phase). +inf without landmarks.
inline double min_path_clearance(const MapSpec& map, double agent_radius, const Path& path) {
  double best = std::numeric_limits<double>::infinity();
  for (const Circle& c : map.landmarks) {
    const Circle inflated{c.center, c.radius + agent_radius};
    if (path.waypoints.size() == 1) {
      best = std::min(best, segment_circle_clearance(path.waypoints[0], path.waypoints[0], inflated));
    }
    for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
      best = std::min(best, segment_circle_clearance(path.waypoints[i - 1], path.waypoints[i], inflated));
    }
  }
  return best;
}

/// Uniform-grid index over tree nodes for nearest and radius queries.
class PointIndex {
 public:
  PointIndex(const Bounds& b, double cell) : origin_(b.min), cell_(cell) {
    nx_ = static_cast<std::size_t>(std::max(1.0, std::ceil(b.width() / cell))) + 1;
    ny_ = static_cast<std::size_t>(std::max(1.0, std::ceil(b.height() / cell))) + 1;
    cells_.resize(nx_ * ny_);
  }

  void insert(std::uint32_t id, Vec2 p) { cells_[cell_index(p)].push_back(id); }

  /// Lowest (distance, id) among inserted points; the index must be non-empty.
  std::uint32_t nearest(Vec2 q, const std::vector<Vec2>& pts) const {
    const auto [cx, cy] = cell_xy(q);
    std::uint32_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    const long max_ring = static_cast<long>(std::max(nx_, ny_));
    for (long ring = 0; ring <= max_ring; ++ring) {
      for (long y = cy - ring; y <= cy + ring; ++y) {
        if (y < 0 || y >= static_cast<long>(ny_)) continue;
        const bool edge_row = y == cy - ring || y == cy + ring;
        for (long x = cx - ring; x <= cx + ring; x += (edge_row || ring == 0) ? 1 : 2 * ring) {
          if (x < 0 || x >= static_cast<long>(nx_)) continue;
          for (const std::uint32_t id : cells_[static_cast<std::size_t>(y) * nx_ + static_cast<std::size_t>(x)]) {
            const double d2 = norm2(pts[id] - q);
            if (d2 < best_d2 || (d2 == best_d2 && id < best)) {
              best_d2 = d2;
              best = id;
            }
          }
        }
      }
      const double reach = static_cast<double>(ring) * cell_;
      if (best_d2 < reach * reach) break;
    }
    return best;
  }

  /// Ids with |p - q| <= r, ascending.
  void within(Vec2 q, double r, const std::vector<Vec2>& pts, std::vector<std::uint32_t>& out) const {
    out.clear();
    const auto [x0, y0] = cell_xy(q - Vec2{r, r});
    const auto [x1, y1] = cell_xy(q + Vec2{r, r});
    for (long y = y0; y <= y1; ++y) {
      for (long x = x0; x <= x1; ++x) {
        for (const std::uint32_t id : cells_[static_cast<std::size_t>(y) * nx_ + static_cast<std::size_t>(x)]) {
          if (norm2(pts[id] - q) <= r * r) out.push_back(id);
        }
      }
    }
    std::sort(out.begin(), out.end());
  }

 private:
  std::pair<long, long> cell_xy(Vec2 p) const {
    const auto clampi = [](double v, std::size_t n) {
      return static_cast<long>(std::clamp(std::floor(v), 0.0, static_cast<double>(n - 1)));
    };
    return {clampi((p.x - origin_.x) / cell_, nx_), clampi((p.y - origin_.y) / cell_, ny_)};
  }
  std::size_t cell_index(Vec2 p) const {
    const auto [x, y] = cell_xy(p);
    return static_cast<std::size_t>(y) * nx_ + static_cast<std::size_t>(x);
  }

  Vec2 origin_;
  double cell_;
  std::size_t nx_ = 1, ny_ = 1;
  std::vector<std::vector<std::uint32_t>> cells_;
};

namespace detail {

inline void check_planner_inputs(const InflatedMap& space, Vec2 start, Vec2 goal, const PlannerParams& p) {
  if (p.iterations < 1) throw Error(ErrorCode::InvalidArgument, "planner iterations must be >= 1");
  if (!(p.goal_bias >= 0.0 && p.goal_bias <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "goal_bias must lie in [0, 1]");
  }
  if (!(p.step_size > 0.0)) throw Error(ErrorCode::InvalidArgument, "step_size must be > 0");
  if (!space.point_free(start)) throw Error(ErrorCode::InvalidEndpoint, "start is in collision");
  if (!space.point_free(goal)) throw Error(ErrorCode::InvalidEndpoint, "goal is in collision");
}

inline Vec2 sample_point(RandomStream& rs, const Bounds& region, Vec2 goal, double goal_bias) {
  if (rs.uniform() < goal_bias) return goal;
  return {rs.uniform(region.min.x, region.max.x), rs.uniform(region.min.y, region.max.y)};
}

inline Vec2 steer(Vec2 from, Vec2 to, double step) {
  const Vec2 d = to - from;
  const double len = norm(d);
  if (len <= step) return to;
  return from + d * (step / len);
}

inline Path trace_back(const std::vector<Vec2>& pts, const std::vector<std::uint32_t>& parent, std::uint32_t leaf,
                       Vec2 goal, bool append_goal) {
  Path path;
  for (std::uint32_t n = leaf;; n = parent[n]) {
    path.waypoints.push_back(pts[n]);
    if (n == 0) break;
  }
  std::reverse(path.waypoints.begin(), path.waypoints.end());
  if (append_goal) path.waypoints.push_back(goal);
  path.cost = path_length(path.waypoints);
  return path;
}

inline constexpr std::uint32_t kNoNode = std::numeric_limits<std::uint32_t>::max();

}  // namespace detail

/// RRT: returns the first path found. A node within step_size of the goal
/// with a free connecting segment ends the search and the path ends exactly
/// at the goal.
inline Path rrt_plan(const MapSpec& map, Vec2 start, Vec2 goal, double agent_radius, const PlannerParams& p,
                     RngKey key) {
  const InflatedMap space(map, agent_radius);
  detail::check_planner_inputs(space, start, goal, p);
  if (start == goal) return {{start}, 0.0};
  if (norm(goal - start) <= p.step_size && space.segment_free(start, goal)) {
    return {{start, goal}, norm(goal - start)};
  }
  RandomStream rs(key);
  std::vector<Vec2> pts{start};
  std::vector<std::uint32_t> parent{0};
  PointIndex index(space.region(), std::max(p.step_size, 1e-3) * 2.0);
  index.insert(0, start);
  for (std::size_t it = 0; it < p.iterations; ++it) {
    const Vec2 target = detail::sample_point(rs, space.region(), goal, p.goal_bias);
    const std::uint32_t near = index.nearest(target, pts);
    const Vec2 node = detail::steer(pts[near], target, p.step_size);
    if (node == pts[near] || !space.segment_free(pts[near], node)) continue;
    const auto id = static_cast<std::uint32_t>(pts.size());
    pts.push_back(node);
    parent.push_back(near);
    index.insert(id, node);
    const double to_goal = norm(goal - node);
    if (to_goal <= p.step_size && space.segment_free(node, goal)) {
      return detail::trace_back(pts, parent, id, goal, node != goal);
    }
    if (to_goal <= p.goal_tolerance) return detail::trace_back(pts, parent, id, goal, false);
  }
  throw Error(ErrorCode::NoPathFound, "rrt: no path after " + std::to_string(p.iterations) + " iterations");
}

/// RRT*: choose-parent and rewire within min(4 step, gamma sqrt(ln n / n)),
/// always running the full budget; returns the cheapest goal connection.
inline Path rrt_star_plan(const MapSpec& map, Vec2 start, Vec2 goal, double agent_radius, const PlannerParams& p,
                          RngKey key) {
  const InflatedMap space(map, agent_radius);
  detail::check_planner_inputs(space, start, goal, p);
  if (start == goal) return {{start}, 0.0};
  const double gamma = p.rewire_gamma > 0.0 ? p.rewire_gamma : 1.5 * map.bounds.diagonal();
  RandomStream rs(key);
  std::vector<Vec2> pts{start};
  std::vector<std::uint32_t> parent{0};
  std::vector<double> cost{0.0};
  std::vector<std::vector<std::uint32_t>> children(1);
  std::vector<std::uint32_t> goal_links;  // nodes with a free segment to the goal
  if (norm(goal - start) <= p.step_size && space.segment_free(start, goal)) goal_links.push_back(0);
  PointIndex index(space.region(), std::max(p.step_size, 1e-3) * 2.0);
  index.insert(0, start);
  std::vector<std::uint32_t> near;
  std::vector<std::uint32_t> stack;

  const auto reparent = [&](std::uint32_t n, std::uint32_t new_parent, double new_cost) {
    auto& siblings = children[parent[n]];
    siblings.erase(std::find(siblings.begin(), siblings.end(), n));
    parent[n] = new_parent;
    children[new_parent].push_back(n);
    cost[n] = new_cost;
    stack.assign(children[n].begin(), children[n].end());
    while (!stack.empty()) {
      const std::uint32_t c = stack.back();
      stack.pop_back();
      cost[c] = cost[parent[c]] + norm(pts[c] - pts[parent[c]]);
      stack.insert(stack.end(), children[c].begin(), children[c].end());
    }
  };

  for (std::size_t it = 0; it < p.iterations; ++it) {
    const Vec2 target = detail::sample_point(rs, space.region(), goal, p.goal_bias);
    const std::uint32_t nearest = index.nearest(target, pts);
    const Vec2 node = detail::steer(pts[nearest], target, p.step_size);
    if (node == pts[nearest] || !space.segment_free(pts[nearest], node)) continue;

    const auto n = static_cast<double>(pts.size() + 1);
    const double radius = std::min(4.0 * p.step_size, gamma * std::sqrt(std::log(n) / n));
    index.within(node, radius, pts, near);

    std::uint32_t best_parent = nearest;
    double best_cost = cost[nearest] + norm(node - pts[nearest]);
    for (const std::uint32_t j : near) {
      if (j == nearest) continue;
      const double c = cost[j] + norm(node - pts[j]);
      if (c < best_cost && space.segment_free(pts[j], node)) {
        best_cost = c;
        best_parent = j;
      }
    }
    const auto id = static_cast<std::uint32_t>(pts.size());
    pts.push_back(node);
    parent.push_back(best_parent);
    cost.push_back(best_cost);
    children.emplace_back();
    children[best_parent].push_back(id);
    index.insert(id, node);

    for (const std::uint32_t j : near) {
      if (j == best_parent || j == 0) continue;
      const double c = best_cost + norm(pts[j] - node);
      if (c < cost[j] && space.segment_free(node, pts[j])) reparent(j, id, c);
    }
    if (norm(goal - node) <= p.step_size && space.segment_free(node, goal)) goal_links.push_back(id);
  }

  std::uint32_t best = detail::kNoNode;
  double best_total = std::numeric_limits<double>::infinity();
  for (const std::uint32_t j : goal_links) {
    const double total = cost[j] + norm(goal - pts[j]);
    if (total < best_total) {
      best_total = total;
      best = j;
    }
  }
  if (best == detail::kNoNode) {
    for (std::uint32_t j = 0; j < pts.size(); ++j) {
      if (norm(goal - pts[j]) <= p.goal_tolerance && cost[j] < best_total) {
        best_total = cost[j];
        best = j;
      }
    }
    if (best == detail::kNoNode) {
      throw Error(ErrorCode::NoPathFound, "rrt*: no path after " + std::to_string(p.iterations) + " iterations");
    }
    return detail::trace_back(pts, parent, best, goal, false);
  }
  return detail::trace_back(pts, parent, best, goal, pts[best] != goal);
}

struct PdParams {
  double kp = 20.0;
  double kd = 2.0;
  double waypoint_tolerance = 0.1;
};

struct PdCommand {
  Vec2 force;
  std::size_t cursor = 0;
};

/// Advances the cursor past waypoints within tolerance and steers toward
/// the current one; inside tolerance of the last waypoint only damps.
inline PdCommand pd_follow(const AgentKinematics& agent, const Path& path, std::size_t cursor, const PdParams& p) {
  if (path.waypoints.empty()) return {-p.kd * agent.velocity, cursor};
  const std::size_t last = path.waypoints.size() - 1;
  cursor = std::min(cursor, last);
  while (cursor < last && norm(path.waypoints[cursor] - agent.position) <= p.waypoint_tolerance) ++cursor;
  if (cursor == last && norm(path.waypoints[last] - agent.position) <= p.waypoint_tolerance) {
    return {-p.kd * agent.velocity, cursor};
  }
  return {p.kp * (path.waypoints[cursor] - agent.position) - p.kd * agent.velocity, cursor};
}

/// k points at arc lengths L/k, 2L/k, ..., L (the last is the path end).
inline std::vector<Vec2> resample_by_arc_length(const std::vector<Vec2>& pts, std::size_t k) {
  std::vector<Vec2> out;
  if (pts.empty() || k == 0) return out;
  const double total = path_length(pts);
  std::size_t seg = 1;
  double walked = 0.0;  // arc length at pts[seg - 1]
  for (std::size_t j = 1; j <= k; ++j) {
    if (j == k || total == 0.0) {
      out.push_back(j == k ? pts.back() : pts.front());
      continue;
    }
    const double s = total * static_cast<double>(j) / static_cast<double>(k);
    while (seg < pts.size() - 1 && walked + norm(pts[seg] - pts[seg - 1]) < s) {
      walked += norm(pts[seg] - pts[seg - 1]);
      ++seg;
    }
    const double len = norm(pts[seg] - pts[seg - 1]);
    const double t = len > 0.0 ? std::clamp((s - walked) / len, 0.0, 1.0) : 0.0;
    out.push_back(pts[seg - 1] + (pts[seg] - pts[seg - 1]) * t);
  }
  return out;
}

struct GuidanceFeatures {
  std::vector<Vec2> waypoints;  // ego-relative
  double cost_to_go = 1.0;

  friend bool operator==(const GuidanceFeatures&, const GuidanceFeatures&) = default;
};

/// A plan made once per episode; features are re-expressed per position.
struct GuidancePlan {
  bool found = false;
  Path path;
  std::vector<Vec2> samples;  // absolute, arc-length resampled
  double cost_norm = 1.0;

  GuidanceFeatures features_at(Vec2 position) const {
    GuidanceFeatures f;
    f.waypoints.assign(samples.size(), Vec2{});
    if (!found) return f;
    for (std::size_t i = 0; i < samples.size(); ++i) f.waypoints[i] = samples[i] - position;
    f.cost_to_go = cost_norm;
    return f;
  }
};

inline GuidancePlan make_guidance_plan(const MapSpec& map, Vec2 start, Vec2 goal, double agent_radius,
                                       std::size_t k, const PlannerParams& p, RngKey key) {
  GuidancePlan plan;
  plan.samples.assign(k, Vec2{});
  try {
    plan.path = rrt_star_plan(map, start, goal, agent_radius, p, key);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoPathFound && e.code() != ErrorCode::InvalidEndpoint) throw;
    return plan;
  }
  plan.found = true;
  plan.samples = resample_by_arc_length(plan.path.waypoints, k);
  const double diag = map.bounds.diagonal();
  plan.cost_norm = diag > 0.0 ? std::clamp(plan.path.cost / diag, 0.0, 1.0) : 0.0;
  return plan;
}

/// Planned start -> goal (the workspace is undirected, so this equals the
/// reversed goal -> start plan in cost). Failure gives zero waypoints and cost 1.
inline GuidanceFeatures rrt_star_guidance(const MapSpec& map, Vec2 start, Vec2 goal, double agent_radius,
                                          std::size_t k, const PlannerParams& p, RngKey key) {
  return make_guidance_plan(map, start, goal, agent_radius, k, p, key).features_at(start);
}

inline void write_path(std::ostream& os, const Path& path) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "cost %.17g\n", path.cost);
  os << buf;
  for (const Vec2& w : path.waypoints) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", w.x, w.y);
    os << buf;
  }
}

inline Path read_path(std::istream& is) {
  Path path;
  std::string word;
  if (!(is >> word >> path.cost) || word != "cost") {
    throw Error(ErrorCode::InvalidArgument, "path text must start with 'cost <value>'");
  }
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    double x = 0.0, y = 0.0;
    std::string rest;
    if (!(ls >> x)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw Error(ErrorCode::InvalidArgument, "malformed waypoint line '" + line + "' in path text");
    }
    if (!(ls >> y) || (ls >> rest)) {
      throw Error(ErrorCode::InvalidArgument, "malformed waypoint line '" + line + "' in path text");
    }
    path.waypoints.push_back({x, y});
  }
  return path;
}

}  // namespace cmapf
