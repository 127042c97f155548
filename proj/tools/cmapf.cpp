#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cmapf/cmapf.hpp"

namespace fs = std::filesystem;
using namespace cmapf;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

EnvConfig build_config(const std::string& config_path, const std::vector<std::string>& overrides) {
  EnvConfig cfg = config_path.empty() ? EnvConfig{} : load_config(config_path);
  for (const auto& o : overrides) apply_override(cfg, o);
  validate(cfg);
  return cfg;
}

struct BenchFlags {
  std::string map = "random_grid";
  BenchOptions opt;
};

int cmd_bench(BenchFlags& f) {
  const auto kind = parse_map_kind(f.map);
  if (!kind) throw Error(ErrorCode::Config, "--map: unknown map kind '" + f.map + "'");
  f.opt.map = *kind;
  const BenchReport r = run_bench(f.opt);
  std::cout << to_json(r).dump() << "\n";
  return 0;
}

struct RunFlags {
  std::string policy = "rrtstar_pd";
  std::string config;
  std::vector<std::string> overrides;
  std::uint64_t seed = 5;
  bool seed_given = false;
  std::string trace;
  std::string svg;
};

int cmd_run(const RunFlags& f) {
  EnvConfig cfg = build_config(f.config, f.overrides);
  const std::uint64_t seed = f.seed_given ? f.seed : cfg.seed;
  auto policy = policy_factory(f.policy)();
  std::ofstream trace_file;
  std::optional<TraceWriter> writer;
  if (!f.trace.empty()) {
    trace_file = open_out(f.trace);
    writer.emplace(trace_file);
  }
  const EpisodeRun run = run_episode_full(cfg, *policy, RngKey::from_seed(seed), 0, writer ? &*writer : nullptr);
  if (!f.svg.empty()) {
    Environment env(cfg);
    const ResetResult r = env.reset(seed);
    std::vector<AgentKinematics> agents = r.state.agents;
    for (std::size_t i = 0; i < agents.size(); ++i) agents[i].position = run.trace.positions.back()[i];
    std::vector<Path> paths;
    if (const auto* planner = dynamic_cast<const PlannerPdPolicy*>(policy.get())) paths = planner->paths();
    auto out = open_out(f.svg);
    render_snapshot(out, r.map.map.bounds, r.state.landmarks, agents, r.state.goals, paths);
  }
  nlohmann::ordered_json j;
  j["policy"] = f.policy;
  j["seed"] = seed;
  j["agents"] = run.trace.num_agents;
  j["steps"] = run.trace.length();
  j["SR"] = run.metrics.success_rate;
  j["FT"] = run.metrics.flowtime;
  j["MS"] = run.metrics.makespan;
  j["CO"] = run.metrics.coordination;
  j["collisions"] = run.metrics.collision_count;
  std::cout << j.dump() << "\n";
  return 0;
}

struct EvalFlags {
  std::string tasks;
  std::string out_dir = "eval_out";
  std::vector<std::string> policies;
  std::size_t episodes = 0;
};

int cmd_eval(const EvalFlags& f) {
  TaskFile tf = load_task_file(f.tasks);
  if (!f.policies.empty()) tf.policies = f.policies;
  if (f.episodes > 0) {
    for (auto& t : tf.tasks) t.episodes = f.episodes;
  }
  std::vector<NamedPolicy> policies;
  for (const auto& name : tf.policies) policies.push_back({name, policy_factory(name)});
  const ProtocolReport report = run_protocol(tf.tier, tf.tasks, policies);
  const fs::path dir = f.out_dir;
  {
    auto out = open_out(dir / "report.jsonl");
    write_report_jsonl(out, report);
  }
  write_report_jsonl(std::cout, report);
  {
    auto out = open_out(dir / "sweep.csv");
    write_sweep_csv(out, report);
  }
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<Series> series;
    for (const auto& [name, prof] : report.profiles) series.push_back({name, report.taus, prof[k]});
    auto out = open_out(dir / ("profile_" + std::string(kMetricNames[k]) + ".svg"));
    render_line_chart(out, "Performance profile (" + std::string(kMetricNames[k]) + ")", "tau",
                      "fraction of runs > tau", series);
  }
  bool failed = false;
  for (const auto& row : report.rows) failed = failed || row.error.has_value();
  return failed ? 1 : 0;
}

struct GenFlags {
  std::string kind = "random_grid";
  std::string config;
  std::vector<std::string> overrides;
  std::vector<std::string> map_files;
  std::uint64_t seed = 5;
  std::size_t slot = 0;
  std::string out;
};

int cmd_gen_map(const GenFlags& f) {
  EnvConfig cfg = f.config.empty() ? EnvConfig{} : load_config(f.config);
  const auto kind = parse_map_kind(f.kind);
  if (!kind) throw Error(ErrorCode::Config, "--kind: unknown map kind '" + f.kind + "'");
  cfg.generator.kind = *kind;
  for (const auto& o : f.overrides) apply_override(cfg, o);
  for (const auto& file : f.map_files) {
    cfg.generator.layouts.push_back(read_text_file(file));
    cfg.generator.layout_names.push_back(fs::path(file).stem().string());
  }
  validate(cfg);
  const MapSource source(cfg.generator);
  const GeneratedMap g = source.generate(split(RngKey::from_seed(f.seed), 0), f.slot);
  const std::string text = to_canonical_text(g);
  if (f.out.empty()) {
    std::cout << text;
  } else {
    auto out = open_out(f.out);
    out << text;
  }
  return 0;
}

struct RenderFlags {
  std::string trace;
  std::string sweep;
  std::string series;
  std::string metric = "SR";
  long step = -1;
  std::string out;
};

// "label,x,y" rows (header optional) -> one series per label.
std::vector<Series> read_series_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<Series> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string label, xs, ys;
    if (!std::getline(row, label, ',') || !std::getline(row, xs, ',') || !std::getline(row, ys)) continue;
    double x = 0, y = 0;
    try {
      x = std::stod(xs);
      y = std::stod(ys);
    } catch (const std::exception&) {
      continue;  // header
    }
    auto it = std::find_if(out.begin(), out.end(), [&](const Series& s) { return s.label == label; });
    if (it == out.end()) {
      out.push_back({label, {}, {}});
      it = out.end() - 1;
    }
    it->x.push_back(x);
    it->y.push_back(y);
  }
  return out;
}

int cmd_render(const RenderFlags& f) {
  auto out = open_out(f.out);
  if (!f.trace.empty()) {
    std::ifstream in(f.trace);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + f.trace);
    const TraceData t = read_trace(in);
    if (t.frames.empty()) throw Error(ErrorCode::EmptyTrace, f.trace + " has no steps");
    const std::size_t idx = f.step < 0 ? t.frames.size() - 1
                                       : std::min(static_cast<std::size_t>(f.step), t.frames.size() - 1);
    render_snapshot(out, t.bounds, t.landmarks, t.frames[idx].agents, t.goals);
    return 0;
  }
  if (!f.sweep.empty()) {
    const auto which = std::find(kMetricNames.begin(), kMetricNames.end(), f.metric);
    if (which == kMetricNames.end()) throw Error(ErrorCode::InvalidArgument, "--metric must be SR, FT, MS or CO");
    const auto col = static_cast<std::size_t>(which - kMetricNames.begin());
    std::istringstream in(read_text_file(f.sweep));
    std::string line;
    std::getline(in, line);
    std::vector<Series> series;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::istringstream row(line);
      for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
      if (cells.size() < 8) continue;
      const std::string label = cells[1] + " " + cells[3];
      auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.label == label; });
      if (it == series.end()) {
        series.push_back({label, {}, {}});
        it = series.end() - 1;
      }
      it->x.push_back(std::stod(cells[2]));
      it->y.push_back(std::stod(cells[4 + col]));
    }
    render_line_chart(out, f.metric + " vs number of agents", "agents", f.metric, series);
    return 0;
  }
  if (!f.series.empty()) {
    render_line_chart(out, f.metric, "step", f.metric, read_series_csv(f.series));
    return 0;
  }
  throw Error(ErrorCode::InvalidArgument, "render needs --trace, --sweep or --series");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-space multi-agent pathfinding simulator"};
  app.require_subcommand(1);

  BenchFlags bench;
  auto* b = app.add_subcommand("bench", "Measure batched stepping throughput");
  b->add_option("--map", bench.map, "Map kind");
  b->add_option("--size", bench.opt.size, "Grid rows and columns")->check(CLI::PositiveNumber);
  b->add_option("--density", bench.opt.density, "Obstacle density")->check(CLI::Range(0.0, 1.0));
  b->add_option("--agents", bench.opt.agents, "Agents per environment")->check(CLI::PositiveNumber);
  b->add_option("--envs", bench.opt.envs, "Parallel environments")->check(CLI::PositiveNumber);
  b->add_option("--steps", bench.opt.steps, "Timed steps")->check(CLI::PositiveNumber);
  b->add_option("--warmup", bench.opt.warmup, "Untimed warmup steps");
  b->add_option("--seed", bench.opt.seed, "Base seed");
  b->add_option("--policy", bench.opt.policy, "zero or random")->check(CLI::IsMember({"zero", "random"}));
  b->add_option("--threads", bench.opt.threads, "Worker threads")->check(CLI::PositiveNumber);

  RunFlags run;
  auto* r = app.add_subcommand("run", "Run one episode with a baseline policy");
  r->add_option("--policy", run.policy, "zero, random, rrt_pd, rrtstar_pd or rrtstar_guided_pd")
      ->check(CLI::IsMember({"zero", "random", "rrt_pd", "rrtstar_pd", "rrtstar_guided_pd"}));
  r->add_option("--config", run.config, "YAML environment config")->check(CLI::ExistingFile);
  r->add_option("--set", run.overrides, "Config override key=value (repeatable)");
  r->add_option("--seed", run.seed, "Episode seed (default: config seed)");
  r->add_option("--trace", run.trace, "Write the episode trace here");
  r->add_option("--svg", run.svg, "Write a final-state snapshot here");

  EvalFlags eval;
  auto* e = app.add_subcommand("eval", "Run an evaluation protocol from a task list");
  e->add_option("--tasks", eval.tasks, "Task list YAML")->required()->check(CLI::ExistingFile);
  e->add_option("--out-dir", eval.out_dir, "Output directory");
  e->add_option("--policy", eval.policies, "Policies (overrides the task list)");
  e->add_option("--episodes", eval.episodes, "Episodes per task (overrides the task list)");

  GenFlags gen;
  auto* g = app.add_subcommand("gen-map", "Generate a map and placement as canonical text");
  g->add_option("--kind", gen.kind, "Map kind");
  g->add_option("--config", gen.config, "YAML environment config")->check(CLI::ExistingFile);
  g->add_option("--set", gen.overrides, "Config override key=value (repeatable)");
  g->add_option("--map-file", gen.map_files, "Layout file for text map kinds (repeatable)")->check(CLI::ExistingFile);
  g->add_option("--seed", gen.seed, "Seed");
  g->add_option("--slot", gen.slot, "Slot (selects the layout for text map kinds)");
  g->add_option("--out", gen.out, "Output file (default: stdout)");

  RenderFlags render;
  auto* v = app.add_subcommand("render", "Render a trace snapshot or a metric chart to SVG");
  v->add_option("--trace", render.trace, "Episode trace")->check(CLI::ExistingFile);
  v->add_option("--sweep", render.sweep, "Agent-count sweep CSV from eval")->check(CLI::ExistingFile);
  v->add_option("--series", render.series, "label,x,y CSV (e.g. sample-efficiency curves)")->check(CLI::ExistingFile);
  v->add_option("--metric", render.metric, "Metric name for charts");
  v->add_option("--step", render.step, "Trace step to draw (default: last)");
  v->add_option("--out", render.out, "Output SVG")->required();

  CLI11_PARSE(app, argc, argv);
  run.seed_given = r->count("--seed") > 0;

  try {
    if (*b) return cmd_bench(bench);
    if (*r) return cmd_run(run);
    if (*e) return cmd_eval(eval);
    if (*g) return cmd_gen_map(gen);
    if (*v) return cmd_render(render);
  } catch (const std::exception& ex) {
    nlohmann::json j = {{"error", ex.what()}};
    std::cout << j.dump() << "\n";
    return 1;
  }
  return 0;
}
