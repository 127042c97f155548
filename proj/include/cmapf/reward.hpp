#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "cmapf/error.hpp"
#include "cmapf/geometry.hpp"
#include "cmapf/world.hpp"

namespace cmapf {

struct RewardParams {
  double goal_radius = 0.1;
  double shaping = 0.1;
};

inline constexpr double kAllOnGoalReward = 0.5;
inline constexpr double kOnGoalReward = 0.5;
inline constexpr double kCollisionPenalty = -1.0;

/// shaping * distance-to-goal, snapped to a 2^-32 lattice. The movement
/// term is the difference of consecutive potentials, so per-episode sums
/// telescope exactly: sum_t r_dist(t) == potential(0) - potential(T).
inline double shaping_potential(double goal_distance, double shaping) {
  return std::nearbyint(shaping * goal_distance * 0x1.0p32) * 0x1.0p-32;
}

inline bool on_goal(Vec2 position, Vec2 goal, const RewardParams& p) {
  return norm(position - goal) <= p.goal_radius;
}

/// True for every agent that overlaps another agent or a landmark.
inline std::vector<std::uint8_t> collision_flags(const WorldState& world) {
  const std::size_t n = world.agents.size();
  std::vector<std::uint8_t> flags(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const AgentKinematics& a = world.agents[i];
    for (std::size_t j = 0; j < world.num_bodies() && !flags[i]; ++j) {
      if (j == i) continue;
      const Circle b = world.body(j);
      if (norm(a.position - b.center) < a.radius + b.radius) flags[i] = 1;
    }
  }
  return flags;
}

/// Per-agent reward for the transition prev -> curr given collision flags
/// evaluated at curr.
inline std::vector<double> step_rewards(std::span<const Vec2> prev_positions, std::span<const Vec2> curr_positions,
                                        std::span<const Vec2> goals, std::span<const std::uint8_t> collided,
                                        const RewardParams& p) {
  const std::size_t n = goals.size();
  bool all_on_goal = true;
  for (std::size_t i = 0; i < n; ++i) all_on_goal = all_on_goal && on_goal(curr_positions[i], goals[i], p);
  std::vector<double> rewards(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (all_on_goal) r += kAllOnGoalReward;
    if (on_goal(curr_positions[i], goals[i], p)) r += kOnGoalReward;
    if (collided[i]) r += kCollisionPenalty;
    r += shaping_potential(norm(prev_positions[i] - goals[i]), p.shaping) -
         shaping_potential(norm(curr_positions[i] - goals[i]), p.shaping);
    rewards[i] = r;
  }
  return rewards;
}

inline std::vector<double> step_rewards(const WorldState& prev, const WorldState& curr, std::span<const Vec2> goals,
                                        const RewardParams& p) {
  std::vector<Vec2> before;
  std::vector<Vec2> after;
  for (const auto& a : prev.agents) before.push_back(a.position);
  for (const auto& a : curr.agents) after.push_back(a.position);
  const auto flags = collision_flags(curr);
  return step_rewards(before, after, goals, flags, p);
}

/// Per-step, per-agent record of one episode. Entry t (0-based) describes
/// the state after environment step t + 1.
struct EpisodeTrace {
  std::size_t num_agents = 0;
  std::size_t budget = 0;  // T
  std::vector<std::vector<Vec2>> positions;
  std::vector<std::vector<double>> goal_distance;
  std::vector<std::vector<std::uint8_t>> on_goal;
  std::vector<std::vector<std::uint8_t>> collided;

  std::size_t length() const { return positions.size(); }

  void push(std::span<const Vec2> pos, std::span<const Vec2> goals, std::span<const std::uint8_t> collisions,
            const RewardParams& p) {
    std::vector<double> dist(pos.size());
    std::vector<std::uint8_t> reached(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) {
      dist[i] = norm(pos[i] - goals[i]);
      reached[i] = dist[i] <= p.goal_radius ? 1 : 0;
    }
    positions.emplace_back(pos.begin(), pos.end());
    goal_distance.push_back(std::move(dist));
    on_goal.push_back(std::move(reached));
    collided.emplace_back(collisions.begin(), collisions.end());
  }
};

struct EpisodeMetrics {
  double success_rate = 0.0;
  double flowtime = 0.0;
  double makespan = 0.0;
  double coordination = 0.0;
  std::vector<std::size_t> reach_times;
  std::size_t collision_count = 0;

  friend bool operator==(const EpisodeMetrics&, const EpisodeMetrics&) = default;
};

/// SR from the final entry; t_i is the first 1-based step on goal (T when
/// never reached); one collision per agent per step at most.
inline EpisodeMetrics finalize_metrics(const EpisodeTrace& trace, const RewardParams& p) {
  if (trace.length() == 0 || trace.num_agents == 0) {
    throw Error(ErrorCode::EmptyTrace, "episode trace has no steps");
  }
  const std::size_t n = trace.num_agents;
  const std::size_t budget = std::max(trace.budget, trace.length());
  EpisodeMetrics m;
  m.reach_times.assign(n, budget);
  std::size_t successes = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < trace.length(); ++t) {
      if (trace.goal_distance[t][i] <= p.goal_radius) {
        m.reach_times[i] = t + 1;
        break;
      }
    }
    if (trace.goal_distance.back()[i] <= p.goal_radius) ++successes;
  }
  for (const auto& step : trace.collided) {
    for (const std::uint8_t c : step) m.collision_count += c ? 1 : 0;
  }
  const auto nd = static_cast<double>(n);
  m.success_rate = static_cast<double>(successes) / nd;
  m.flowtime = static_cast<double>(std::accumulate(m.reach_times.begin(), m.reach_times.end(), std::size_t{0})) / nd;
  m.makespan = static_cast<double>(*std::max_element(m.reach_times.begin(), m.reach_times.end()));
  m.coordination = 1.0 - static_cast<double>(m.collision_count) / (nd * static_cast<double>(budget));
  return m;
}

}  // namespace cmapf
