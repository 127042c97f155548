#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cmapf/error.hpp"
#include "cmapf/geometry.hpp"
#include "cmapf/spatial_hash.hpp"
#include "cmapf/world.hpp"

namespace cmapf {

struct ObsParams {
  double window = 0.5;      // sensing range, world units
  std::size_t max_obs = 8;  // object slots kept
};

/// Fixed-length ego-centric observation: max_obs object slots (zero padded,
/// nearest first) followed by the goal direction.
struct ObservationVector {
  std::vector<Vec2> objects;
  Vec2 goal_dir;

  std::size_t length() const { return 2 * objects.size() + 2; }

  /// [o0.x, o0.y, ..., goal.x, goal.y]
  void flatten_into(std::span<double> out) const {
    std::size_t k = 0;
    for (const Vec2& o : objects) {
      out[k++] = o.x;
      out[k++] = o.y;
    }
    out[k++] = goal_dir.x;
    out[k] = goal_dir.y;
  }

  std::vector<double> flatten() const {
    std::vector<double> out(length());
    flatten_into(out);
    return out;
  }

  friend bool operator==(const ObservationVector&, const ObservationVector&) = default;
};

inline std::size_t observation_length(const ObsParams& p) { return 2 * p.max_obs + 2; }

/// Sorting key for an object: gap between the agent disc and the object disc.
inline double observation_gap(Vec2 agent_pos, double agent_radius, const Circle& obj) {
  return norm(obj.center - agent_pos) - (agent_radius + obj.radius);
}

namespace detail {

inline Vec2 penetration_from_delta(Vec2 delta, double dist, double obj_radius, const ObsParams& p) {
  const double factor = 1.0 - (p.window + obj_radius) / dist;
  return {(delta.x * factor) / p.window, (delta.y * factor) / p.window};
}

// Value used when the object centre coincides with the agent position: the
// limit of the formula along +x.
inline Vec2 penetration_fallback(double obj_radius, const ObsParams& p) {
  return {-(p.window + obj_radius) / p.window, 0.0};
}

}  // namespace detail

/// Penetration vector of `obj` as seen from an agent. Active while the gap
/// between the discs is below the window; the scale factor uses the object
/// radius only, so inside the sensing disc it points away from the object
/// and in the outer shell (window + R_j <= |d| < window + R + R_j) toward it.
inline Vec2 penetration_vector(Vec2 agent_pos, double agent_radius, const Circle& obj, const ObsParams& p) {
  const Vec2 delta = obj.center - agent_pos;
  const double dist = norm(delta);
  if (!(dist - (agent_radius + obj.radius) < p.window)) return {};
  if (dist == 0.0) {
    throw Error(ErrorCode::ZeroDisplacement, "object centre coincides with the observing agent");
  }
  return detail::penetration_from_delta(delta, dist, obj.radius, p);
}

/// Goal vector clipped to the window and divided by it, so |result| <= 1.
inline Vec2 goal_direction(Vec2 agent_pos, Vec2 goal_pos, const ObsParams& p) {
  const Vec2 g = goal_pos - agent_pos;
  return clamp_norm(g / p.window, 1.0);
}

struct ObservationScratch {
  struct Entry {
    double gap;
    std::uint32_t index;
    Vec2 value;
  };
  std::vector<std::uint32_t> candidates;
  std::vector<Entry> entries;
};

/// Observation for one agent; `hash` indexes agents then landmarks.
inline void observe(std::size_t agent_index, const WorldState& world, const SpatialHash& hash,
                    const ObsParams& p, ObservationVector& out, ObservationScratch& scratch) {
  const AgentKinematics& self = world.agents[agent_index];
  hash.query(self.body(), p.window, scratch.candidates);
  scratch.entries.clear();
  for (const std::uint32_t j : scratch.candidates) {
    if (j == agent_index) continue;
    const Circle obj = world.body(j);
    const Vec2 delta = obj.center - self.position;
    const double dist = norm(delta);
    const double gap = dist - (self.radius + obj.radius);
    if (!(gap < p.window)) continue;
    const Vec2 value = dist == 0.0 ? detail::penetration_fallback(obj.radius, p)
                                   : detail::penetration_from_delta(delta, dist, obj.radius, p);
    scratch.entries.push_back({gap, j, value});
  }
  const auto by_gap = [](const ObservationScratch::Entry& a, const ObservationScratch::Entry& b) {
    return a.gap < b.gap || (a.gap == b.gap && a.index < b.index);
  };
  const std::size_t keep = std::min(p.max_obs, scratch.entries.size());
  std::partial_sort(scratch.entries.begin(), scratch.entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    scratch.entries.end(), by_gap);
  out.objects.assign(p.max_obs, Vec2{});
  for (std::size_t s = 0; s < keep; ++s) out.objects[s] = scratch.entries[s].value;
  out.goal_dir = goal_direction(self.position, world.goals[agent_index], p);
}

inline ObservationVector observe(std::size_t agent_index, const WorldState& world, const SpatialHash& hash,
                                 const ObsParams& p) {
  ObservationVector out;
  ObservationScratch scratch;
  observe(agent_index, world, hash, p, out, scratch);
  return out;
}

}  // namespace cmapf
