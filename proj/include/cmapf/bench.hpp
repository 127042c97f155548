#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmapf/environment.hpp"
#include "cmapf/error.hpp"
#include "cmapf/rng.hpp"

namespace cmapf {

struct BenchOptions {
  MapKind map = MapKind::RandomGrid;
  std::size_t size = 20;
  double density = 0.3;
  std::size_t agents = 32;
  std::size_t envs = 8;
  std::size_t steps = 200;
  std::size_t warmup = 5;
  std::uint64_t seed = 5;
  std::string policy = "zero";  // zero | random
  std::size_t threads = 1;
};

struct BenchReport {
  std::size_t envs = 0;
  std::size_t agents = 0;
  std::size_t steps = 0;
  double wall_seconds = 0.0;
  double sps = 0.0;
  double agent_steps_per_second = 0.0;
};

inline nlohmann::ordered_json to_json(const BenchReport& r) {
  nlohmann::ordered_json j;
  j["envs"] = r.envs;
  j["agents"] = r.agents;
  j["steps"] = r.steps;
  j["wall_seconds"] = r.wall_seconds;
  j["sps"] = r.sps;
  j["agent_steps_per_second"] = r.agent_steps_per_second;
  return j;
}

/// Slots get seeds seed, seed + 1, ...; only the `steps` post-warmup steps are timed.
inline BenchReport run_bench(const BenchOptions& o) {
  if (o.steps == 0) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
  if (o.envs == 0) throw Error(ErrorCode::InvalidArgument, "envs must be >= 1");
  if (o.policy != "zero" && o.policy != "random") {
    throw Error(ErrorCode::InvalidArgument, "bench policy must be zero or random, got '" + o.policy + "'");
  }
  EnvConfig cfg;
  cfg.generator.kind = o.map;
  cfg.generator.rows = cfg.generator.cols = o.size;
  cfg.generator.obstacle_density = o.density;
  cfg.generator.num_agents = o.agents;
  cfg.batch_size = o.envs;
  cfg.episode_budget = o.steps + o.warmup;
  cfg.seed = o.seed;
  BatchEnvironment batch(cfg, o.threads);
  std::vector<std::uint64_t> seeds(o.envs);
  std::iota(seeds.begin(), seeds.end(), o.seed);
  std::vector<std::optional<Error>> errors;
  std::vector<ResetResult> resets = batch.reset(seeds, errors);
  for (const auto& e : errors) {
    if (e) throw *e;
  }
  std::vector<WorldState> states;
  states.reserve(o.envs);
  for (auto& r : resets) states.push_back(std::move(r.state));
  resets.clear();

  std::vector<std::vector<Action>> actions(o.envs, std::vector<Action>(o.agents));
  RandomStream rs(split(RngKey::from_seed(o.seed), 0xBE));
  std::vector<StepResult> results;
  const auto run_step = [&] {
    if (o.policy == "random") {
      for (auto& slot : actions) {
        for (Action& a : slot) a = Action::force({rs.uniform(-1.0, 1.0), rs.uniform(-1.0, 1.0)});
      }
    }
    batch.step(states, actions, results, errors);
  };
  for (std::size_t s = 0; s < o.warmup; ++s) run_step();
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t s = 0; s < o.steps; ++s) run_step();
  const auto t1 = std::chrono::steady_clock::now();
  for (const auto& e : errors) {
    if (e) throw *e;
  }
  BenchReport r;
  r.envs = o.envs;
  r.agents = o.agents;
  r.steps = o.steps;
  r.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  r.sps = static_cast<double>(o.envs * o.steps) / r.wall_seconds;
  r.agent_steps_per_second = r.sps * static_cast<double>(o.agents);
  return r;
}

}  // namespace cmapf
