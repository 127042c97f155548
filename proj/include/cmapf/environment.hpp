#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "cmapf/dynamics.hpp"
#include "cmapf/error.hpp"
#include "cmapf/generators.hpp"
#include "cmapf/observation.hpp"
#include "cmapf/reward.hpp"
#include "cmapf/rng.hpp"
#include "cmapf/world.hpp"

namespace cmapf {

struct EnvConfig {
  GeneratorConfig generator;
  SimParams sim;
  ObsParams obs;
  RewardParams reward;
  ModelParams models;
  std::size_t episode_budget = 160;
  std::size_t batch_size = 1;
  std::uint64_t seed = 5;
};

inline void validate(const EnvConfig& c) {
  const auto fail = [](const std::string& key, const std::string& what) {
    throw Error(ErrorCode::Config, key + ": " + what);
  };
  if (c.episode_budget < 1) fail("episode_budget", "must be >= 1");
  if (c.batch_size < 1) fail("batch_size", "must be >= 1");
  if (!(c.sim.dt > 0.0)) fail("sim.dt", "must be > 0");
  if (c.sim.frameskip < 1) fail("sim.frameskip", "must be >= 1");
  if (!(c.sim.contact.f0 >= 0.0)) fail("sim.contact_force", "must be >= 0");
  if (!(c.sim.contact.k > 0.0)) fail("sim.contact_margin", "must be > 0");
  if (!(c.obs.window > 0.0)) fail("obs.window", "must be > 0");
  if (!(c.reward.goal_radius >= 0.0)) fail("reward.goal_radius", "must be >= 0");
  if (!(c.models.holonomic.mass > 0.0)) fail("holonomic.mass", "must be > 0");
  if (!(c.models.holonomic.damping >= 0.0 && c.models.holonomic.damping < 1.0)) {
    fail("holonomic.damping", "must lie in [0, 1)");
  }
  if (!(c.models.holonomic.max_speed > 0.0)) fail("holonomic.max_speed", "must be > 0");
  if (c.generator.num_agents < 1) fail("generator.num_agents", "must be >= 1");
  if (c.generator.num_diffdrive > c.generator.num_agents) {
    fail("generator.num_diffdrive", "exceeds generator.num_agents");
  }
  if (!(c.generator.cell_size > 0.0)) fail("generator.cell_size", "must be > 0");
  if (c.generator.granularity < 1) fail("generator.granularity", "must be >= 1");
  if (!(c.generator.agent_radius > 0.0)) fail("generator.agent_radius", "must be > 0");
}

struct StepResult {
  std::vector<ObservationVector> observations;
  std::vector<double> rewards;
  bool done = false;
  std::vector<std::uint8_t> collided;
  std::vector<std::uint8_t> on_goal;

  friend bool operator==(const StepResult&, const StepResult&) = default;
};

struct ResetResult {
  WorldState state;
  GeneratedMap map;
  std::vector<ObservationVector> observations;
};

/// Episode key tree: from_seed(seed) -> split 0 generator (split 0 layout,
/// split 1 placement), split 1 headings, split 2 stored in WorldState::rng.
struct EpisodeKeys {
  RngKey episode, generator, heading, state;
  static EpisodeKeys from(RngKey episode) { return {episode, split(episode, 0), split(episode, 1), split(episode, 2)}; }
};

/// One environment instance plus reusable buffers. Not shareable between
/// threads; copies are independent.
class Environment {
 public:
  explicit Environment(EnvConfig cfg) : cfg_(std::move(cfg)), source_(cfg_.generator) {
    validate(cfg_);
    physics_ = PhysicsScratch(cfg_.obs.window);
    obs_hash_ = SpatialHash(cfg_.obs.window);
  }

  const EnvConfig& config() const { return cfg_; }
  const MapSource& maps() const { return source_; }

  ResetResult reset(std::uint64_t seed, std::size_t slot = 0) { return reset_key(RngKey::from_seed(seed), slot); }

  ResetResult reset_key(RngKey episode_key, std::size_t slot = 0) {
    const EpisodeKeys keys = EpisodeKeys::from(episode_key);
    ResetResult out;
    out.map = source_.generate(keys.generator, slot);
    const PlacementSpec& p = out.map.placement;
    WorldState& w = out.state;
    RandomStream headings(keys.heading);
    for (std::size_t i = 0; i < p.num_agents(); ++i) {
      AgentKinematics a;
      a.position = p.agent_starts[i];
      a.radius = p.agent_radii[i];
      a.model = p.agent_models[i];
      if (a.model == DynamicsModel::DiffDrive) {
        a.heading = wrap_angle(headings.uniform(-std::numbers::pi, std::numbers::pi));
      }
      w.agents.push_back(a);
    }
    w.goals = p.goals;
    w.landmarks = out.map.map.landmarks;
    w.rng = keys.state;
    w.layout_id = out.map.map.layout_id;
    observe_all(w, out.observations);
    return out;
  }

  StepResult step(WorldState& state, std::span<const Action> actions) {
    StepResult r;
    step(state, actions, r);
    return r;
  }

  void step(WorldState& state, std::span<const Action> actions, StepResult& out) {
    if (state.done) throw Error(ErrorCode::EpisodeFinished, "step called after the episode budget was used up");
    if (actions.size() != state.agents.size()) {
      throw Error(ErrorCode::ActionArity, "expected " + std::to_string(state.agents.size()) + " actions, got " +
                                              std::to_string(actions.size()));
    }
    for (std::size_t i = 0; i < actions.size(); ++i) {
      if (!std::isfinite(actions[i].first) || !std::isfinite(actions[i].second)) {
        throw Error(ErrorCode::NonFiniteAction, "agent " + std::to_string(i) + " action is not finite");
      }
    }
    prev_.resize(state.agents.size());
    for (std::size_t i = 0; i < state.agents.size(); ++i) prev_[i] = state.agents[i].position;

    substep(state, actions, cfg_.sim, cfg_.models, physics_);
    ++state.step_index;
    state.done = state.step_index >= cfg_.episode_budget;

    observe_all(state, out.observations);  // also rebuilds obs_hash_
    collisions(state, out.collided);
    curr_.resize(state.agents.size());
    for (std::size_t i = 0; i < state.agents.size(); ++i) curr_[i] = state.agents[i].position;
    out.rewards = step_rewards(prev_, curr_, state.goals, out.collided, cfg_.reward);
    out.on_goal.resize(state.agents.size());
    for (std::size_t i = 0; i < state.agents.size(); ++i) {
      out.on_goal[i] = on_goal(curr_[i], state.goals[i], cfg_.reward) ? 1 : 0;
    }
    out.done = state.done;
  }

  void observe_all(const WorldState& w, std::vector<ObservationVector>& out) {
    build_body_hash(obs_hash_, w.agents, w.landmarks);
    out.resize(w.agents.size());
    for (std::size_t i = 0; i < w.agents.size(); ++i) observe(i, w, obs_hash_, cfg_.obs, out[i], obs_scratch_);
  }

 private:
  // Uses obs_hash_ as built for the current state.
  void collisions(const WorldState& w, std::vector<std::uint8_t>& flags) {
    flags.assign(w.agents.size(), 0);
    for (std::size_t i = 0; i < w.agents.size(); ++i) {
      const AgentKinematics& a = w.agents[i];
      obs_hash_.query(a.body(), 0.0, candidates_);
      for (const std::uint32_t j : candidates_) {
        if (j == i) continue;
        const Circle b = w.body(j);
        if (norm(a.position - b.center) < a.radius + b.radius) {
          flags[i] = 1;
          break;
        }
      }
    }
  }

  EnvConfig cfg_;
  MapSource source_;
  PhysicsScratch physics_;
  SpatialHash obs_hash_;
  ObservationScratch obs_scratch_;
  std::vector<std::uint32_t> candidates_;
  std::vector<Vec2> prev_, curr_;
};

/// Lockstep batch of independent slots. Slot k behaves exactly like a
/// standalone Environment reset with (seeds[k], slot k). Work is split into
/// contiguous slot chunks, one per worker; results land in slot order.
class BatchEnvironment {
 public:
  explicit BatchEnvironment(EnvConfig cfg, std::size_t threads = 1) : cfg_(std::move(cfg)) {
    validate(cfg_);
    threads_ = std::max<std::size_t>(1, threads);
  }

  const EnvConfig& config() const { return cfg_; }
  std::size_t threads() const { return threads_; }

  std::vector<ResetResult> reset(std::span<const std::uint64_t> seeds, std::vector<std::optional<Error>>& errors) {
    std::vector<ResetResult> out(seeds.size());
    errors.assign(seeds.size(), std::nullopt);
    for_each_slot(seeds.size(), [&](Environment& env, std::size_t k) {
      try {
        out[k] = env.reset(seeds[k], k);
      } catch (const Error& e) {
        errors[k] = e.with_context("slot " + std::to_string(k));
      }
    });
    return out;
  }

  /// Slots listed as failed in `errors` (from reset or an earlier step) are skipped.
  void step(std::vector<WorldState>& states, const std::vector<std::vector<Action>>& actions,
            std::vector<StepResult>& results, std::vector<std::optional<Error>>& errors) {
    if (actions.size() != states.size()) {
      throw Error(ErrorCode::ActionArity, "expected actions for " + std::to_string(states.size()) + " slots, got " +
                                              std::to_string(actions.size()));
    }
    results.resize(states.size());
    errors.resize(states.size());
    for_each_slot(states.size(), [&](Environment& env, std::size_t k) {
      if (errors[k]) return;
      try {
        env.step(states[k], actions[k], results[k]);
      } catch (const Error& e) {
        errors[k] = e.with_context("slot " + std::to_string(k));
      }
    });
  }

 private:
  template <typename F>
  void for_each_slot(std::size_t n, F&& f) {
    while (slots_.size() < n) slots_.emplace_back(cfg_);
    const std::size_t workers = std::min(threads_, std::max<std::size_t>(n, 1));
    if (workers <= 1) {
      for (std::size_t k = 0; k < n; ++k) f(slots_[k], k);
      return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
      const std::size_t lo = n * t / workers;
      const std::size_t hi = n * (t + 1) / workers;
      pool.emplace_back([&, lo, hi] {
        for (std::size_t k = lo; k < hi; ++k) f(slots_[k], k);
      });
    }
    for (auto& th : pool) th.join();
  }

  EnvConfig cfg_;
  std::size_t threads_ = 1;
  std::deque<Environment> slots_;
};

}  // namespace cmapf
