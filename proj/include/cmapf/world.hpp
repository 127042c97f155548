#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cmapf/geometry.hpp"
#include "cmapf/rng.hpp"

namespace cmapf {

enum class DynamicsModel { Holonomic, DiffDrive };

constexpr std::string_view to_string(DynamicsModel m) {
  return m == DynamicsModel::Holonomic ? "holonomic" : "diffdrive";
}

struct AgentKinematics {
  Vec2 position;
  Vec2 velocity;
  double heading = 0.0;  // radians in (-pi, pi]; diff-drive only
  double radius = 0.1;
  DynamicsModel model = DynamicsModel::Holonomic;

  Circle body() const { return {position, radius}; }
  friend bool operator==(const AgentKinematics&, const AgentKinematics&) = default;
};

/// Two numbers whose meaning follows the agent's model: a 2D force for
/// holonomic agents, (linear speed, angular speed) for diff-drive agents.
struct Action {
  double first = 0.0;
  double second = 0.0;

  static constexpr Action force(Vec2 f) { return {f.x, f.y}; }
  static constexpr Action twist(double u, double w) { return {u, w}; }
  constexpr Vec2 as_force() const { return {first, second}; }
  friend constexpr bool operator==(Action, Action) = default;
};

/// Dynamic state of one environment instance. Bodies are indexed globally:
/// agents 0..N-1, then landmarks N..N+M-1.
struct WorldState {
  std::vector<AgentKinematics> agents;
  std::vector<Vec2> goals;
  std::vector<Circle> landmarks;
  std::size_t step_index = 0;
  RngKey rng;
  bool done = false;
  std::string layout_id;

  std::size_t num_agents() const { return agents.size(); }
  std::size_t num_bodies() const { return agents.size() + landmarks.size(); }

  Circle body(std::size_t global_index) const {
    return global_index < agents.size() ? agents[global_index].body()
                                        : landmarks[global_index - agents.size()];
  }

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

}  // namespace cmapf
