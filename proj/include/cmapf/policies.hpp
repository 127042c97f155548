#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cmapf/environment.hpp"
#include "cmapf/error.hpp"
#include "cmapf/planners.hpp"
#include "cmapf/rng.hpp"

namespace cmapf {

/// Binds a controller into the episode loop. begin_episode receives the
/// generated map and a key derived from the episode key; act is called once
/// per environment step.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode(const GeneratedMap& /*map*/, const WorldState& /*state*/, const EnvConfig& /*cfg*/,
                             RngKey /*key*/) {}
  virtual void act(const std::vector<ObservationVector>& obs, const WorldState& state, std::vector<Action>& out) = 0;
};

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

class ZeroPolicy : public Policy {
 public:
  void act(const std::vector<ObservationVector>&, const WorldState& state, std::vector<Action>& out) override {
    out.assign(state.agents.size(), Action{});
  }
};

/// Uniform forces in [-scale, scale]^2; uniform (u, w) within the model limits.
class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(double scale = 1.0) : scale_(scale) {}

  void begin_episode(const GeneratedMap&, const WorldState&, const EnvConfig& cfg, RngKey key) override {
    stream_ = RandomStream(key);
    dd_ = cfg.models.diffdrive;
  }

  void act(const std::vector<ObservationVector>&, const WorldState& state, std::vector<Action>& out) override {
    out.resize(state.agents.size());
    for (std::size_t i = 0; i < state.agents.size(); ++i) {
      if (state.agents[i].model == DynamicsModel::DiffDrive) {
        out[i] = Action::twist(stream_.uniform(-dd_.max_u, dd_.max_u), stream_.uniform(-dd_.max_w, dd_.max_w));
      } else {
        out[i] = Action::force({stream_.uniform(-scale_, scale_), stream_.uniform(-scale_, scale_)});
      }
    }
  }

 private:
  double scale_;
  RandomStream stream_{RngKey{}};
  DiffDriveParams dd_;
};

enum class PlannerKind { Rrt, RrtStar, RrtStarGuided };

/// Plans once per episode for every holonomic agent (key split(key, i)) and
/// tracks the plan with pd_follow. Agents without a plan, and diff-drive
/// agents, only damp (zero action for diff-drive).
class PlannerPdPolicy : public Policy {
 public:
  PlannerPdPolicy(PlannerKind kind, PdParams pd = {}, std::size_t guidance_points = 4,
                  std::optional<std::size_t> iterations = std::nullopt)
      : kind_(kind), pd_(pd), k_(guidance_points), iterations_(iterations) {}

  void begin_episode(const GeneratedMap& map, const WorldState& state, const EnvConfig& cfg, RngKey key) override {
    const std::size_t n = state.agents.size();
    paths_.assign(n, Path{});
    cursors_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const AgentKinematics& a = state.agents[i];
      if (a.model != DynamicsModel::Holonomic) continue;
      const std::size_t budget = iterations_.value_or(kind_ == PlannerKind::Rrt ? kRrtIterations : kRrtStarIterations);
      const PlannerParams p = default_planner_params(map.map, a.radius, cfg.reward.goal_radius, budget);
      const RngKey agent_key = split(key, i);
      try {
        switch (kind_) {
          case PlannerKind::Rrt: paths_[i] = rrt_plan(map.map, a.position, state.goals[i], a.radius, p, agent_key); break;
          case PlannerKind::RrtStar:
            paths_[i] = rrt_star_plan(map.map, a.position, state.goals[i], a.radius, p, agent_key);
            break;
          case PlannerKind::RrtStarGuided: {
            const GuidancePlan plan = make_guidance_plan(map.map, a.position, state.goals[i], a.radius, k_, p, agent_key);
            if (plan.found) {
              paths_[i].waypoints.push_back(a.position);
              paths_[i].waypoints.insert(paths_[i].waypoints.end(), plan.samples.begin(), plan.samples.end());
              paths_[i].cost = path_length(paths_[i].waypoints);
            }
            break;
          }
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoPathFound && e.code() != ErrorCode::InvalidEndpoint) throw;
        paths_[i] = Path{};
      }
    }
  }

  void act(const std::vector<ObservationVector>&, const WorldState& state, std::vector<Action>& out) override {
    out.assign(state.agents.size(), Action{});
    for (std::size_t i = 0; i < state.agents.size(); ++i) {
      const AgentKinematics& a = state.agents[i];
      if (a.model != DynamicsModel::Holonomic) continue;
      PdParams p = pd_;
      p.waypoint_tolerance = a.radius;
      const PdCommand cmd = pd_follow(a, paths_[i], cursors_[i], p);
      cursors_[i] = cmd.cursor;
      out[i] = Action::force(cmd.force);
    }
  }

  const std::vector<Path>& paths() const { return paths_; }

 private:
  PlannerKind kind_;
  PdParams pd_;
  std::size_t k_;
  std::optional<std::size_t> iterations_;
  std::vector<Path> paths_;
  std::vector<std::size_t> cursors_;
};

inline constexpr std::string_view kPolicyNames[] = {"zero", "random", "rrt_pd", "rrtstar_pd", "rrtstar_guided_pd"};

inline PolicyFactory policy_factory(std::string_view name, std::optional<std::size_t> iterations = std::nullopt) {
  if (name == "zero") return [] { return std::make_unique<ZeroPolicy>(); };
  if (name == "random") return [] { return std::make_unique<RandomPolicy>(); };
  if (name == "rrt_pd") return [=] { return std::make_unique<PlannerPdPolicy>(PlannerKind::Rrt, PdParams{}, 4, iterations); };
  if (name == "rrtstar_pd") {
    return [=] { return std::make_unique<PlannerPdPolicy>(PlannerKind::RrtStar, PdParams{}, 4, iterations); };
  }
  if (name == "rrtstar_guided_pd") {
    return [=] { return std::make_unique<PlannerPdPolicy>(PlannerKind::RrtStarGuided, PdParams{}, 4, iterations); };
  }
  throw Error(ErrorCode::InvalidArgument, "unknown policy '" + std::string(name) + "'");
}

}  // namespace cmapf
