#pragma once

// YAML environment configuration.
//
//   generator:
//     kind: random_grid          # random_grid | maze_grid | caves_cont | string_grid
//                                # | batched_string_grid | movingai | hetero_give_way
//     rows: 20
//     cols: 20
//     cell_size: 0.4
//     granularity: 1
//     obstacle_density: 0.3
//     extra_connection_probability: 1.0
//     max_rooms: 6
//     room_min: 3
//     room_max: 7
//     noise_threshold: 0.0
//     noise_frequency: 0.1
//     num_agents: 8
//     agent_radius: 0.1
//     agent_radius_max: 0.0
//     num_diffdrive: 0
//     placement_attempts: 10000
//     layouts: ["..#", "..."]    # inline layout texts
//     layout_files: [a.map]      # relative to the config file
//   sim: {dt: 0.005, frameskip: 20, contact_force: 100, contact_margin: 0.001}
//   holonomic: {mass: 1, damping: 0.015, max_speed: 1}
//   diffdrive: {max_u: 1, max_w: 2}
//   obs: {window: 0.5, max_obs: 8}
//   reward: {shaping: 0.1, goal_radius: 0.1}
//   episode_budget: 160
//   batch_size: 1
//   seed: 5
//
// Unknown keys are errors. Overrides use dotted paths: "generator.num_agents=32".

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cmapf/environment.hpp"
#include "cmapf/error.hpp"

namespace cmapf {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace detail {

template <typename T>
T scalar_as(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) throw Error(ErrorCode::Config, path + ": expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw Error(ErrorCode::Config, path + ": cannot convert '" + node.Scalar() + "'");
  }
}

inline std::size_t count_as(const YAML::Node& node, const std::string& path) {
  const auto v = scalar_as<long long>(node, path);
  if (v < 0) throw Error(ErrorCode::Config, path + ": must be >= 0");
  return static_cast<std::size_t>(v);
}

inline std::vector<std::string> strings_as(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) throw Error(ErrorCode::Config, path + ": expected a list");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(scalar_as<std::string>(node[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

using Setter = std::function<void(EnvConfig&, const YAML::Node&, const std::string&)>;

inline const std::map<std::string, Setter>& config_setters() {
  static const std::map<std::string, Setter> setters = [] {
    std::map<std::string, Setter> s;
    const auto d = [&s](const std::string& key, auto getter) {
      s[key] = [getter](EnvConfig& c, const YAML::Node& n, const std::string& path) {
        getter(c) = scalar_as<double>(n, path);
      };
    };
    const auto z = [&s](const std::string& key, auto getter) {
      s[key] = [getter](EnvConfig& c, const YAML::Node& n, const std::string& path) {
        getter(c) = count_as(n, path);
      };
    };
    s["generator.kind"] = [](EnvConfig& c, const YAML::Node& n, const std::string& path) {
      const auto name = scalar_as<std::string>(n, path);
      const auto kind = parse_map_kind(name);
      if (!kind) throw Error(ErrorCode::Config, path + ": unknown map kind '" + name + "'");
      c.generator.kind = *kind;
    };
    z("generator.rows", [](EnvConfig& c) -> std::size_t& { return c.generator.rows; });
    z("generator.cols", [](EnvConfig& c) -> std::size_t& { return c.generator.cols; });
    d("generator.cell_size", [](EnvConfig& c) -> double& { return c.generator.cell_size; });
    z("generator.granularity", [](EnvConfig& c) -> std::size_t& { return c.generator.granularity; });
    d("generator.obstacle_density", [](EnvConfig& c) -> double& { return c.generator.obstacle_density; });
    d("generator.extra_connection_probability",
      [](EnvConfig& c) -> double& { return c.generator.extra_connection_probability; });
    z("generator.max_rooms", [](EnvConfig& c) -> std::size_t& { return c.generator.max_rooms; });
    z("generator.room_min", [](EnvConfig& c) -> std::size_t& { return c.generator.room_min; });
    z("generator.room_max", [](EnvConfig& c) -> std::size_t& { return c.generator.room_max; });
    z("generator.room_attempts", [](EnvConfig& c) -> std::size_t& { return c.generator.room_attempts; });
    d("generator.noise_threshold", [](EnvConfig& c) -> double& { return c.generator.noise_threshold; });
    d("generator.noise_frequency", [](EnvConfig& c) -> double& { return c.generator.noise_frequency; });
    z("generator.num_agents", [](EnvConfig& c) -> std::size_t& { return c.generator.num_agents; });
    d("generator.agent_radius", [](EnvConfig& c) -> double& { return c.generator.agent_radius; });
    d("generator.agent_radius_max", [](EnvConfig& c) -> double& { return c.generator.agent_radius_max; });
    z("generator.num_diffdrive", [](EnvConfig& c) -> std::size_t& { return c.generator.num_diffdrive; });
    z("generator.placement_attempts", [](EnvConfig& c) -> std::size_t& { return c.generator.placement_attempts; });
    s["generator.layouts"] = [](EnvConfig& c, const YAML::Node& n, const std::string& path) {
      for (auto& text : strings_as(n, path)) {
        c.generator.layout_names.push_back("layout#" + std::to_string(c.generator.layouts.size()));
        c.generator.layouts.push_back(std::move(text));
      }
    };
    d("sim.dt", [](EnvConfig& c) -> double& { return c.sim.dt; });
    z("sim.frameskip", [](EnvConfig& c) -> std::size_t& { return c.sim.frameskip; });
    d("sim.contact_force", [](EnvConfig& c) -> double& { return c.sim.contact.f0; });
    d("sim.contact_margin", [](EnvConfig& c) -> double& { return c.sim.contact.k; });
    d("holonomic.mass", [](EnvConfig& c) -> double& { return c.models.holonomic.mass; });
    d("holonomic.damping", [](EnvConfig& c) -> double& { return c.models.holonomic.damping; });
    d("holonomic.max_speed", [](EnvConfig& c) -> double& { return c.models.holonomic.max_speed; });
    d("diffdrive.max_u", [](EnvConfig& c) -> double& { return c.models.diffdrive.max_u; });
    d("diffdrive.max_w", [](EnvConfig& c) -> double& { return c.models.diffdrive.max_w; });
    d("obs.window", [](EnvConfig& c) -> double& { return c.obs.window; });
    z("obs.max_obs", [](EnvConfig& c) -> std::size_t& { return c.obs.max_obs; });
    d("reward.shaping", [](EnvConfig& c) -> double& { return c.reward.shaping; });
    d("reward.goal_radius", [](EnvConfig& c) -> double& { return c.reward.goal_radius; });
    z("episode_budget", [](EnvConfig& c) -> std::size_t& { return c.episode_budget; });
    z("batch_size", [](EnvConfig& c) -> std::size_t& { return c.batch_size; });
    s["seed"] = [](EnvConfig& c, const YAML::Node& n, const std::string& path) {
      c.seed = scalar_as<std::uint64_t>(n, path);
    };
    return s;
  }();
  return setters;
}

inline void apply_node(EnvConfig& cfg, const YAML::Node& node, const std::string& prefix,
                       const std::filesystem::path& base_dir) {
  if (!node.IsMap()) {
    throw Error(ErrorCode::Config, (prefix.empty() ? std::string("<root>") : prefix) + ": expected a mapping");
  }
  const auto& setters = config_setters();
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (path == "generator.layout_files") {
      for (const auto& file : strings_as(kv.second, path)) {
        const std::filesystem::path p = std::filesystem::path(file).is_absolute() ? std::filesystem::path(file) : base_dir / file;
        try {
          cfg.generator.layouts.push_back(read_text_file(p));
        } catch (const Error& e) {
          throw Error(ErrorCode::Config, path + ": " + e.detail());
        }
        cfg.generator.layout_names.push_back(std::filesystem::path(file).stem().string());
      }
      continue;
    }
    const auto it = setters.find(path);
    if (it != setters.end()) {
      it->second(cfg, kv.second, path);
    } else if (kv.second.IsMap()) {
      const bool known_section = std::any_of(setters.begin(), setters.end(), [&](const auto& s) {
        return s.first.rfind(path + ".", 0) == 0;
      });
      if (!known_section) throw Error(ErrorCode::Config, path + ": unknown key");
      apply_node(cfg, kv.second, path, base_dir);
    } else {
      throw Error(ErrorCode::Config, path + ": unknown key");
    }
  }
}

}  // namespace detail

/// Applies "dotted.key=value" overrides, validating the key path.
inline void apply_override(EnvConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::Config, "override '" + assignment + "': expected key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const auto& setters = detail::config_setters();
  const auto it = setters.find(key);
  if (it == setters.end()) throw Error(ErrorCode::Config, key + ": unknown key");
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::Config, key + ": " + e.what());
  }
  it->second(cfg, value, key);
}

inline EnvConfig config_from_yaml(const std::string& text, const std::filesystem::path& base_dir = ".",
                                  EnvConfig defaults = {}) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::Config, std::string("parse error: ") + e.what());
  }
  if (root.IsNull()) return defaults;
  detail::apply_node(defaults, root, "", base_dir);
  validate(defaults);
  return defaults;
}

inline EnvConfig load_config(const std::filesystem::path& path) {
  try {
    return config_from_yaml(read_text_file(path), path.parent_path());
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

}  // namespace cmapf
