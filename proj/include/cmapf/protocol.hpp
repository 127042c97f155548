#pragma once

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmapf/config.hpp"
#include "cmapf/environment.hpp"
#include "cmapf/error.hpp"
#include "cmapf/policies.hpp"
#include "cmapf/reward.hpp"
#include "cmapf/stats.hpp"
#include "cmapf/trace.hpp"

namespace cmapf {

enum class Tier { Easy, Medium, Hard };

constexpr std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::Easy: return "easy";
    case Tier::Medium: return "medium";
    case Tier::Hard: return "hard";
  }
  return "unknown";
}

inline std::optional<Tier> parse_tier(std::string_view s) {
  if (s == "easy") return Tier::Easy;
  if (s == "medium") return Tier::Medium;
  if (s == "hard") return Tier::Hard;
  return std::nullopt;
}

inline constexpr std::size_t kMediumTaskCount = 12;

struct TaskSpec {
  std::string id;
  EnvConfig env;
  Tier tier = Tier::Easy;
  std::size_t episodes = 10;
  std::uint64_t seed = 5;
  std::vector<std::size_t> agent_sweep;  // Hard tier: one row per count
};

/// Episode key = split(from_seed(task.seed), episode_index); the policy key
/// is split(episode key, 3). The episode index also selects the layout for
/// text-based maps.
inline RngKey episode_key(const TaskSpec& task, std::size_t episode_index) {
  return split(RngKey::from_seed(task.seed), episode_index);
}

struct EpisodeRun {
  EpisodeMetrics metrics;
  EpisodeTrace trace;
};

/// reset + policy + episode_budget steps. The policy key is split(key, 3).
inline EpisodeRun run_episode_full(const EnvConfig& cfg, Policy& policy, RngKey key, std::size_t slot = 0,
                                   TraceWriter* writer = nullptr) {
  Environment env(cfg);
  ResetResult r = env.reset_key(key, slot);
  WorldState& state = r.state;
  policy.begin_episode(r.map, state, cfg, split(key, 3));
  if (writer) {
    writer->header(state, r.map.map.bounds);
    writer->step(state, r.observations, nullptr);
  }
  EpisodeRun run;
  run.trace.num_agents = state.agents.size();
  run.trace.budget = cfg.episode_budget;
  std::vector<Action> actions;
  StepResult result;
  std::vector<ObservationVector> obs = std::move(r.observations);
  std::vector<Vec2> positions(state.agents.size());
  while (!state.done) {
    policy.act(obs, state, actions);
    env.step(state, actions, result);
    obs = result.observations;
    for (std::size_t i = 0; i < state.agents.size(); ++i) positions[i] = state.agents[i].position;
    run.trace.push(positions, state.goals, result.collided, cfg.reward);
    if (writer) writer->step(state, obs, &result);
  }
  run.metrics = finalize_metrics(run.trace, cfg.reward);
  return run;
}

inline EpisodeMetrics run_episode(const TaskSpec& task, Policy& policy, std::size_t episode_index) {
  try {
    return run_episode_full(task.env, policy, episode_key(task, episode_index), episode_index).metrics;
  } catch (const Error& e) {
    throw e.with_context("episode " + std::to_string(episode_index));
  }
}

inline constexpr std::array<std::string_view, 4> kMetricNames = {"SR", "FT", "MS", "CO"};

inline double metric_value(const EpisodeMetrics& m, std::size_t which) {
  switch (which) {
    case 0: return m.success_rate;
    case 1: return m.flowtime;
    case 2: return m.makespan;
    default: return m.coordination;
  }
}

/// Higher is better, in [0, 1]: SR and CO raw, FT and MS as 1 - value / T.
inline double normalized_metric(const EpisodeMetrics& m, std::size_t which, std::size_t budget) {
  const auto T = static_cast<double>(budget);
  switch (which) {
    case 1: return 1.0 - m.flowtime / T;
    case 2: return 1.0 - m.makespan / T;
    default: return metric_value(m, which);
  }
}

struct MetricSummary {
  double iqm = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct TaskRow {
  std::string task_id;
  std::string policy;
  std::string map;
  std::size_t agents = 0;
  std::size_t episodes = 0;
  std::uint64_t seed = 0;
  std::array<MetricSummary, 4> metrics{};
  std::array<std::vector<double>, 4> normalized;  // per episode
  std::optional<std::string> error;
};

struct ProtocolReport {
  Tier tier = Tier::Easy;
  std::vector<TaskRow> rows;
  std::vector<double> taus;
  // policy -> metric -> profile over taus (all normalized episode scores)
  std::map<std::string, std::array<std::vector<double>, 4>> profiles;
  std::map<std::string, std::array<double, 4>> optimality_gaps;
  // (policy x, policy y) -> metric -> P(x > y), averaged over tasks
  std::map<std::pair<std::string, std::string>, std::array<double, 4>> improvement;
};

/// IQM with a percentile bootstrap; the bounds are widened to contain the
/// point estimate when the resampled percentiles miss it.
inline MetricSummary summarize(const std::vector<double>& values, RngKey key) {
  MetricSummary s;
  s.iqm = iqm(values);
  const Interval ci = bootstrap_ci(values, key);
  s.ci_lo = std::min(ci.lo, s.iqm);
  s.ci_hi = std::max(ci.hi, s.iqm);
  return s;
}

struct NamedPolicy {
  std::string name;
  PolicyFactory factory;
};

inline std::vector<TaskSpec> expand_sweeps(const std::vector<TaskSpec>& tasks) {
  std::vector<TaskSpec> out;
  for (const TaskSpec& t : tasks) {
    if (t.agent_sweep.empty()) {
      out.push_back(t);
      continue;
    }
    for (const std::size_t n : t.agent_sweep) {
      TaskSpec s = t;
      s.id = t.id + "/n" + std::to_string(n);
      s.env.generator.num_agents = n;
      s.agent_sweep.clear();
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline void check_tier_shape(Tier tier, const std::vector<TaskSpec>& tasks) {
  if (tasks.empty()) throw Error(ErrorCode::InvalidArgument, "protocol needs at least one task");
  if (tier == Tier::Medium && tasks.size() != kMediumTaskCount) {
    throw Error(ErrorCode::InvalidArgument, "medium tier needs exactly " + std::to_string(kMediumTaskCount) +
                                                " tasks, got " + std::to_string(tasks.size()));
  }
  for (const TaskSpec& t : tasks) {
    if (t.episodes < 1) throw Error(ErrorCode::InvalidArgument, "task " + t.id + ": episodes must be >= 1");
    if (tier == Tier::Hard && t.env.generator.kind != MapKind::MovingAI) {
      throw Error(ErrorCode::InvalidArgument, "task " + t.id + ": hard tier tasks must use movingai maps");
    }
  }
}

inline ProtocolReport run_protocol(Tier tier, const std::vector<TaskSpec>& tasks,
                                   const std::vector<NamedPolicy>& policies) {
  check_tier_shape(tier, tasks);
  ProtocolReport report;
  report.tier = tier;
  for (int i = 0; i <= 20; ++i) report.taus.push_back(static_cast<double>(i) / 20.0);
  const std::vector<TaskSpec> expanded = expand_sweeps(tasks);
  for (const NamedPolicy& pol : policies) {
    for (const TaskSpec& task : expanded) {
      TaskRow row;
      row.task_id = task.id;
      row.policy = pol.name;
      row.map = task.env.generator.layout_names.empty() ? std::string(to_string(task.env.generator.kind))
                                                        : task.env.generator.layout_names.front();
      row.agents = task.env.generator.num_agents;
      row.episodes = task.episodes;
      row.seed = task.seed;
      try {
        std::array<std::vector<double>, 4> raw;
        for (std::size_t e = 0; e < task.episodes; ++e) {
          auto policy = pol.factory();
          const EpisodeMetrics m = run_episode(task, *policy, e);
          for (std::size_t k = 0; k < 4; ++k) {
            raw[k].push_back(metric_value(m, k));
            row.normalized[k].push_back(normalized_metric(m, k, task.env.episode_budget));
          }
        }
        const RngKey ci_key = split(RngKey::from_seed(task.seed), 0xC1);
        for (std::size_t k = 0; k < 4; ++k) row.metrics[k] = summarize(raw[k], split(ci_key, k));
      } catch (const Error& e) {
        row.error = e.what();
      }
      report.rows.push_back(std::move(row));
    }
  }

  for (const NamedPolicy& pol : policies) {
    std::array<std::vector<double>, 4> pooled;
    for (const TaskRow& row : report.rows) {
      if (row.policy != pol.name || row.error) continue;
      for (std::size_t k = 0; k < 4; ++k) pooled[k].insert(pooled[k].end(), row.normalized[k].begin(), row.normalized[k].end());
    }
    auto& prof = report.profiles[pol.name];
    auto& gap = report.optimality_gaps[pol.name];
    for (std::size_t k = 0; k < 4; ++k) {
      prof[k] = performance_profile(pooled[k], report.taus);
      gap[k] = pooled[k].empty() ? 1.0 : optimality_gap(pooled[k]);
    }
  }
  for (const NamedPolicy& x : policies) {
    for (const NamedPolicy& y : policies) {
      if (x.name == y.name) continue;
      std::array<double, 4> sum{};
      std::size_t tasks_used = 0;
      for (const TaskSpec& task : expanded) {
        const TaskRow* rx = nullptr;
        const TaskRow* ry = nullptr;
        for (const TaskRow& row : report.rows) {
          if (row.task_id != task.id) continue;
          if (row.policy == x.name) rx = &row;
          if (row.policy == y.name) ry = &row;
        }
        if (!rx || !ry || rx->error || ry->error) continue;
        for (std::size_t k = 0; k < 4; ++k) sum[k] += prob_improvement(rx->normalized[k], ry->normalized[k]);
        ++tasks_used;
      }
      if (tasks_used == 0) continue;
      for (double& v : sum) v /= static_cast<double>(tasks_used);
      report.improvement[{x.name, y.name}] = sum;
    }
  }
  return report;
}

/// One JSON record per (task, policy, metric); failed tasks give one error record.
inline void write_report_jsonl(std::ostream& os, const ProtocolReport& report) {
  for (const TaskRow& row : report.rows) {
    if (row.error) {
      nlohmann::json j = {{"task", row.task_id}, {"tier", to_string(report.tier)}, {"policy", row.policy},
                          {"error", *row.error}};
      os << j.dump() << "\n";
      continue;
    }
    for (std::size_t k = 0; k < 4; ++k) {
      nlohmann::ordered_json j;
      j["task"] = row.task_id;
      j["tier"] = to_string(report.tier);
      j["policy"] = row.policy;
      j["metric"] = kMetricNames[k];
      j["iqm"] = row.metrics[k].iqm;
      j["ci_lo"] = row.metrics[k].ci_lo;
      j["ci_hi"] = row.metrics[k].ci_hi;
      j["episodes"] = row.episodes;
      j["seed"] = row.seed;
      os << j.dump() << "\n";
    }
  }
  for (const auto& [name, gaps] : report.optimality_gaps) {
    nlohmann::ordered_json j;
    j["summary"] = "optimality_gap";
    j["policy"] = name;
    for (std::size_t k = 0; k < 4; ++k) j[std::string(kMetricNames[k])] = gaps[k];
    os << j.dump() << "\n";
  }
  for (const auto& [pair, probs] : report.improvement) {
    nlohmann::ordered_json j;
    j["summary"] = "prob_improvement";
    j["x"] = pair.first;
    j["y"] = pair.second;
    for (std::size_t k = 0; k < 4; ++k) j[std::string(kMetricNames[k])] = probs[k];
    os << j.dump() << "\n";
  }
}

/// Metric-vs-agent-count table.
inline void write_sweep_csv(std::ostream& os, const ProtocolReport& report) {
  os << "task,map,agents,policy,SR,FT,MS,CO\n";
  for (const TaskRow& row : report.rows) {
    if (row.error) continue;
    os << row.task_id << ',' << row.map << ',' << row.agents << ',' << row.policy;
    for (const auto& m : row.metrics) os << ',' << m.iqm;
    os << "\n";
  }
}

struct TaskFile {
  Tier tier = Tier::Easy;
  std::vector<std::string> policies;
  std::vector<TaskSpec> tasks;
};

/// Task list:
///   tier: medium
///   policies: [rrtstar_pd]
///   episodes: 10        # default for tasks
///   seed: 5
///   tasks:
///     - id: rg_d0_n8
///       config: easy.yaml            # optional, relative to this file
///       set: [generator.obstacle_density=0.0, generator.num_agents=8]
///       episodes: 10
///       agents: [8, 16, 32]          # hard tier sweep
inline TaskFile load_task_file(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::Load(read_text_file(path));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::Config, path.string() + ": " + e.what());
  }
  const auto base = path.parent_path();
  const auto fail = [&](const std::string& key, const std::string& what) {
    throw Error(ErrorCode::Config, path.string() + ": " + key + ": " + what);
  };
  TaskFile tf;
  std::size_t default_episodes = 10;
  std::uint64_t default_seed = 5;
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key == "tier") {
      const auto t = parse_tier(kv.second.as<std::string>());
      if (!t) fail("tier", "expected easy, medium or hard");
      tf.tier = *t;
    } else if (key == "policies") {
      tf.policies = kv.second.as<std::vector<std::string>>();
    } else if (key == "episodes") {
      default_episodes = kv.second.as<std::size_t>();
    } else if (key == "seed") {
      default_seed = kv.second.as<std::uint64_t>();
    } else if (key != "tasks") {
      fail(key, "unknown key");
    }
  }
  const YAML::Node tasks = root["tasks"];
  if (!tasks || !tasks.IsSequence()) fail("tasks", "expected a list");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const YAML::Node t = tasks[i];
    const std::string where = "tasks[" + std::to_string(i) + "]";
    TaskSpec spec;
    spec.tier = tf.tier;
    spec.episodes = default_episodes;
    spec.seed = default_seed;
    spec.id = t["id"] ? t["id"].as<std::string>() : "task" + std::to_string(i);
    for (const auto& kv : t) {
      const auto key = kv.first.as<std::string>();
      if (key != "id" && key != "config" && key != "set" && key != "episodes" && key != "seed" && key != "agents") {
        fail(where + "." + key, "unknown key");
      }
    }
    try {
      if (t["config"]) {
        const std::filesystem::path cfg = t["config"].as<std::string>();
        spec.env = load_config(cfg.is_absolute() ? cfg : base / cfg);
      }
      if (t["set"]) {
        for (const auto& s : t["set"].as<std::vector<std::string>>()) apply_override(spec.env, s);
        validate(spec.env);
      }
    } catch (const Error& e) {
      fail(where, e.detail());
    }
    if (t["episodes"]) spec.episodes = t["episodes"].as<std::size_t>();
    if (t["seed"]) spec.seed = t["seed"].as<std::uint64_t>();
    if (t["agents"]) spec.agent_sweep = t["agents"].as<std::vector<std::size_t>>();
    tf.tasks.push_back(std::move(spec));
  }
  if (tf.policies.empty()) tf.policies.push_back("rrtstar_pd");
  return tf;
}

}  // namespace cmapf
