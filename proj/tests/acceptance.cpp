// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance            run every criterion
//   acceptance <name>...  run the named ones

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"

using namespace cmapf;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "ok " : "FAILED ") + what);
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const fs::path kSource = CMAPF_SOURCE_DIR;

// ---------------------------------------------------------------- physics

Verdict physics() {
  Verdict v;
  const auto t0 = Clock::now();
  RandomStream rs(RngKey::from_seed(101));
  std::size_t exact = 0;
  for (int scene = 0; scene < 100; ++scene) {
    const WorldState w = oracle::random_scene(rs, 64, 2.5, scene % 4 != 0);
    const ContactParams p = scene % 2 ? ContactParams{} : ContactParams{rs.uniform(1, 200), rs.uniform(1e-3, 0.2)};
    SpatialHash hash(rs.uniform(0.2, 1.0));
    build_body_hash(hash, w.agents, w.landmarks);
    exact += accumulate_forces(w.agents, w.landmarks, hash, p) == oracle::forces(w.agents, w.landmarks, p);
  }
  v.check(exact == 100, "hash forces == all-pairs brute force on " + std::to_string(exact) + "/100 scenes");

  std::size_t balanced = 0;
  for (int scene = 0; scene < 100; ++scene) {
    const WorldState w = oracle::random_scene(rs, 64, 2.0, false);
    SpatialHash hash(0.5);
    build_body_hash(hash, w.agents, w.landmarks);
    Vec2 sum;
    for (const Vec2& f : accumulate_forces(w.agents, w.landmarks, hash, {})) sum += f;
    balanced += sum.x == 0.0 && sum.y == 0.0;
  }
  v.check(balanced == 100, "force sum exactly (0,0) on " + std::to_string(balanced) + "/100 landmark-free scenes");

  bool monotone = true;
  for (const ContactParams p : {ContactParams{}, ContactParams{1.0, 1.0}, ContactParams{10.0, 0.05}}) {
    const double d_min = 0.2;
    double last = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 1000; ++k) {
      const double dist = d_min * k / 1001.0;
      const double mag = norm(collision_force({dist, 0.0}, d_min, p));
      monotone = monotone && mag < last;
      last = mag;
    }
  }
  v.check(monotone, "force magnitude strictly decreasing over 1000-point grids");
  const double t = seconds_since(t0);
  v.check(t < 10.0, "runtime " + fmt(t) + " s < 10 s");
  return v;
}

// ------------------------------------------------------------ integration

Verdict integration() {
  Verdict v;
  const auto t0 = Clock::now();
  RandomStream rs(RngKey::from_seed(202));
  double worst = 0.0;
  bool clamp_exact = true;
  for (int k = 0; k < 1000; ++k) {
    AgentKinematics a;
    a.position = {rs.uniform(-5, 5), rs.uniform(-5, 5)};
    a.velocity = {rs.uniform(-2, 2), rs.uniform(-2, 2)};
    HolonomicParams p;
    p.mass = rs.uniform(0.5, 2.0);
    p.damping = rs.uniform(0.0, 0.5);
    p.dt = rs.uniform(0.001, 0.1);
    p.max_speed = k % 5 == 0 ? std::numeric_limits<double>::infinity() : rs.uniform(0.2, 2.0);
    const double scale = k % 2 ? 1.0 : 500.0;
    const Vec2 act{rs.uniform(-scale, scale), rs.uniform(-scale, scale)};
    const Vec2 col{rs.uniform(-scale, scale), rs.uniform(-scale, scale)};
    const AgentKinematics got = step_holonomic(a, act, col, p);
    double vx = (1.0 - p.damping) * a.velocity.x + (act.x + col.x) / p.mass * p.dt;
    double vy = (1.0 - p.damping) * a.velocity.y + (act.y + col.y) / p.mass * p.dt;
    const double speed = std::sqrt(vx * vx + vy * vy);
    if (speed > p.max_speed) {
      vx *= p.max_speed / speed;
      vy *= p.max_speed / speed;
    }
    worst = std::max({worst, std::abs(got.velocity.x - vx), std::abs(got.velocity.y - vy),
                      std::abs(got.position.x - (a.position.x + vx * p.dt)),
                      std::abs(got.position.y - (a.position.y + vy * p.dt))});
    clamp_exact = clamp_exact && norm(got.velocity) <= p.max_speed;
  }
  bool wrap_exact = true;
  for (int k = 0; k < 1000; ++k) {
    AgentKinematics a;
    a.model = DynamicsModel::DiffDrive;
    a.position = {rs.uniform(-5, 5), rs.uniform(-5, 5)};
    a.heading = wrap_angle(rs.uniform(-4, 4));
    DiffDriveParams p;
    p.max_u = rs.uniform(0.5, 2.0);
    p.max_w = k % 3 == 0 ? 1e4 : rs.uniform(0.5, 4.0);
    p.dt = rs.uniform(0.001, 0.1);
    const double u = rs.uniform(-3, 3), w = rs.uniform(-3, 3) * (k % 3 == 0 ? 1e3 : 1.0);
    const Vec2 col{rs.uniform(-50, 50), rs.uniform(-50, 50)};
    const AgentKinematics got = step_diffdrive(a, u, w, col, p);
    const double uc = std::clamp(u, -p.max_u, p.max_u), wc = std::clamp(w, -p.max_w, p.max_w);
    const double x = a.position.x + uc * std::cos(a.heading) * p.dt + col.x * p.dt * p.dt;
    const double y = a.position.y + uc * std::sin(a.heading) * p.dt + col.y * p.dt * p.dt;
    const double raw = a.heading + wc * p.dt;
    double expect_heading = std::fmod(raw + std::numbers::pi, 2.0 * std::numbers::pi);
    if (expect_heading <= 0.0) expect_heading += 2.0 * std::numbers::pi;
    expect_heading -= std::numbers::pi;
    double dh = std::abs(got.heading - expect_heading);
    dh = std::min(dh, 2.0 * std::numbers::pi - dh);
    worst = std::max({worst, std::abs(got.position.x - x), std::abs(got.position.y - y), dh});
    wrap_exact = wrap_exact && got.heading > -std::numbers::pi && got.heading <= std::numbers::pi;
  }
  wrap_exact = wrap_exact && wrap_angle(std::numbers::pi) == std::numbers::pi &&
               wrap_angle(-std::numbers::pi) == std::numbers::pi && wrap_angle(3.0 * std::numbers::pi) == std::numbers::pi;
  v.check(worst <= 1e-12, "max |step - scalar expectation| = " + fmt(worst) + " over 2000 draws (<= 1e-12)");
  v.check(clamp_exact, "|v| <= max_speed exactly on every holonomic draw");
  v.check(wrap_exact, "heading in (-pi, pi] exactly on every diff-drive draw");

  std::size_t chained = 0;
  for (int scene = 0; scene < 50; ++scene) {
    WorldState w = oracle::random_scene(rs, 32, 2.0, true);
    for (std::size_t i = 0; i < w.agents.size(); i += 3) {
      w.agents[i].model = DynamicsModel::DiffDrive;
      w.agents[i].heading = rs.uniform(-3, 3);
    }
    std::vector<Action> actions;
    for (std::size_t i = 0; i < w.agents.size(); ++i) actions.push_back({rs.uniform(-1, 1), rs.uniform(-1, 1)});
    SimParams sim;
    sim.frameskip = 1 + rs.below(20);
    const ModelParams models;
    const WorldState got = substep(w, actions, sim, models);
    WorldState ref = w;
    HolonomicParams hp = models.holonomic;
    DiffDriveParams dp = models.diffdrive;
    hp.dt = dp.dt = sim.dt;
    for (std::size_t s = 0; s < sim.frameskip; ++s) {
      const auto f = oracle::forces(ref.agents, ref.landmarks, sim.contact);
      for (std::size_t i = 0; i < ref.agents.size(); ++i) {
        auto& a = ref.agents[i];
        a = a.model == DynamicsModel::Holonomic ? step_holonomic(a, actions[i].as_force(), f[i], hp)
                                                : step_diffdrive(a, actions[i].first, actions[i].second, f[i], dp);
      }
    }
    chained += got.agents == ref.agents;
  }
  v.check(chained == 50, "substep(f) == f chained single steps bit-exact on " + std::to_string(chained) + "/50 scenes");
  const double t = seconds_since(t0);
  v.check(t < 10.0, "runtime " + fmt(t) + " s < 10 s");
  return v;
}

// ------------------------------------------------------------ observation

Verdict observation() {
  Verdict v;
  RandomStream rs(RngKey::from_seed(303));
  std::size_t same = 0, zeros_ok = 0, agents_seen = 0;
  for (int scene = 0; scene < 100; ++scene) {
    const WorldState w = oracle::random_scene(rs, 64, 3.0, true);
    const ObsParams p{rs.uniform(0.2, 1.0), 1 + static_cast<std::size_t>(rs.below(10))};
    SpatialHash hash(p.window);
    build_body_hash(hash, w.agents, w.landmarks);
    bool scene_same = true;
    for (std::size_t i = 0; i < w.agents.size(); ++i) {
      const ObservationVector got = observe(i, w, hash, p);
      const ObservationVector want = oracle::observe(i, w, p);
      scene_same = scene_same && got.objects == want.objects && got.goal_dir == want.goal_dir;
      std::size_t in_range = 0;
      for (std::size_t j = 0; j < w.num_bodies(); ++j) {
        if (j != i && observation_gap(w.agents[i].position, w.agents[i].radius, w.body(j)) < p.window) ++in_range;
      }
      bool pad_zero = true;
      for (std::size_t s = in_range; s < p.max_obs; ++s) {
        const Vec2 o = got.objects[s];
        pad_zero = pad_zero && o.x == 0.0 && o.y == 0.0 && !std::signbit(o.x) && !std::signbit(o.y);
      }
      zeros_ok += pad_zero;
      ++agents_seen;
    }
    same += scene_same;
  }
  v.check(same == 100, "hash observe == brute-force observe bit-exact on " + std::to_string(same) + "/100 scenes");

  bool far_zero = true;
  for (int k = 0; k < 1000; ++k) {
    const ObsParams p{rs.uniform(0.1, 1.0), 4};
    const double r = rs.uniform(0.05, 0.3), rj = rs.uniform(0.05, 0.5);
    const double ang = rs.uniform(-3.14, 3.14);
    const double dist = p.window + r + rj + rs.uniform(0.0, 3.0);
    const Vec2 o = penetration_vector({0, 0}, r, {{dist * std::cos(ang), dist * std::sin(ang)}, rj}, p);
    far_zero = far_zero && o.x == 0.0 && o.y == 0.0;
  }
  v.check(far_zero && zeros_ok == agents_seen,
          "out-of-range objects and padding slots are exact zero vectors (" + std::to_string(zeros_ok) + "/" +
              std::to_string(agents_seen) + " agents)");

  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const ObsParams p{rs.uniform(0.1, 1.0), 4};
    const double r = rs.uniform(0.05, 0.3), rj = rs.uniform(0.05, 0.5);
    const double ang = rs.uniform(-3.14, 3.14);
    const double dist = p.window + rj + rs.uniform(-1e-7, 1e-7);
    const Vec2 at{rs.uniform(-3, 3), rs.uniform(-3, 3)};
    const Vec2 o = penetration_vector(at, r, {at + Vec2{dist * std::cos(ang), dist * std::sin(ang)}, rj}, p);
    worst = std::max(worst, norm(o));
  }
  v.check(worst < 1e-6, "max |penetration| within 1e-7 of |d| = window + R_j is " + fmt(worst) + " (< 1e-6)");

  std::size_t invariant = 0;
  for (int scene = 0; scene < 100; ++scene) {
    const WorldState w = oracle::random_scene(rs, 48, 3.0, true, true);
    WorldState moved = w;
    const Vec2 shift{static_cast<double>(rs.below(41)) - 20.0, static_cast<double>(rs.below(41)) - 20.0};
    for (auto& a : moved.agents) a.position += shift;
    for (auto& g : moved.goals) g += shift;
    for (auto& l : moved.landmarks) l.center += shift;
    const ObsParams p;
    SpatialHash h1(p.window), h2(p.window);
    build_body_hash(h1, w.agents, w.landmarks);
    build_body_hash(h2, moved.agents, moved.landmarks);
    bool ok = true;
    for (std::size_t i = 0; i < w.agents.size(); ++i) {
      const auto a = observe(i, w, h1, p);
      const auto b = observe(i, moved, h2, p);
      ok = ok && a.objects == b.objects && a.goal_dir == b.goal_dir;
    }
    invariant += ok;
  }
  v.check(invariant == 100, "translation invariance bit-exact on " + std::to_string(invariant) + "/100 scenes");
  return v;
}

// ------------------------------------------------------------ reward

Verdict reward() {
  Verdict v;
  EnvConfig cfg;
  cfg.generator.num_agents = 8;
  cfg.generator.obstacle_density = 0.2;
  std::size_t telescoped = 0, episodes = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const char* name : {"random", "rrtstar_pd"}) {
      Environment env(cfg);
      const RngKey key = RngKey::from_seed(seed);
      ResetResult r = env.reset_key(key);
      auto policy = policy_factory(name, 600)();
      policy.get()->begin_episode(r.map, r.state, cfg, split(key, 3));
      const std::size_t n = r.state.agents.size();
      std::vector<double> start(n), sum(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) start[i] = norm(r.state.agents[i].position - r.state.goals[i]);
      std::vector<ObservationVector> obs = r.observations;
      std::vector<Action> actions;
      while (!r.state.done) {
        policy->act(obs, r.state, actions);
        const StepResult s = env.step(r.state, actions);
        obs = s.observations;
        const bool all = std::all_of(s.on_goal.begin(), s.on_goal.end(), [](std::uint8_t x) { return x != 0; });
        for (std::size_t i = 0; i < n; ++i) {
          double known = 0.0;
          if (all) known += kAllOnGoalReward;
          if (s.on_goal[i]) known += kOnGoalReward;
          if (s.collided[i]) known += kCollisionPenalty;
          sum[i] += s.rewards[i] - known;
        }
      }
      bool ok = true;
      for (std::size_t i = 0; i < n; ++i) {
        const double end = norm(r.state.agents[i].position - r.state.goals[i]);
        ok = ok && sum[i] == shaping_potential(start[i], cfg.reward.shaping) - shaping_potential(end, cfg.reward.shaping);
      }
      telescoped += ok;
      ++episodes;
    }
  }
  v.check(telescoped == episodes, "sum of movement rewards == potential(0) - potential(T) exactly in " +
                                      std::to_string(telescoped) + "/" + std::to_string(episodes) + " episodes");

  EpisodeTrace trace;
  trace.num_agents = 2;
  trace.budget = 160;
  const RewardParams rp;
  const std::vector<Vec2> goals{{0, 0}, {10, 10}};
  for (std::size_t t = 1; t <= 160; ++t) {
    const std::vector<Vec2> pos{t >= 10 ? Vec2{0, 0} : Vec2{5, 5}, Vec2{0, 0}};
    const std::vector<std::uint8_t> col{t <= 16, t <= 16};
    trace.push(pos, goals, col, rp);
  }
  const EpisodeMetrics m = finalize_metrics(trace, rp);
  v.check(m.success_rate == 0.5 && m.flowtime == 85.0 && m.makespan == 160.0 && m.coordination == 0.9,
          "derived example -> SR " + fmt(m.success_rate) + ", FT " + fmt(m.flowtime) + ", MS " + fmt(m.makespan) +
              ", CO " + fmt(m.coordination));

  RandomStream rs(RngKey::from_seed(404));
  std::size_t bounded = 0;
  for (int k = 0; k < 1000; ++k) {
    EpisodeTrace tr;
    tr.num_agents = 1 + rs.below(16);
    tr.budget = 1 + rs.below(200);
    std::vector<Vec2> g(tr.num_agents);
    const double p_goal = rs.uniform(), p_col = rs.uniform();
    for (std::size_t t = 0; t < tr.budget; ++t) {
      std::vector<Vec2> pos;
      std::vector<std::uint8_t> col;
      for (std::size_t i = 0; i < tr.num_agents; ++i) {
        pos.push_back(rs.bernoulli(p_goal) ? Vec2{0.05, 0} : Vec2{rs.uniform(0.2, 3), 0});
        col.push_back(rs.bernoulli(p_col));
      }
      tr.push(pos, g, col, rp);
    }
    const EpisodeMetrics mm = finalize_metrics(tr, rp);
    bounded += mm.coordination >= 0.0 && mm.coordination <= 1.0 && mm.makespan >= mm.flowtime;
  }
  v.check(bounded == 1000, "CO in [0,1] and MS >= FT on " + std::to_string(bounded) + "/1000 random traces");
  return v;
}

// ------------------------------------------------------------ maps

std::vector<fs::path> movingai_files() {
  std::vector<fs::path> dirs{kSource / "tests/data/movingai"};
  if (const char* extra = std::getenv("CMAPF_MOVINGAI_DIR")) dirs.emplace_back(extra);
  std::vector<fs::path> out;
  for (const auto& d : dirs) {
    if (!fs::is_directory(d)) continue;
    for (const auto& e : fs::directory_iterator(d)) {
      if (e.path().extension() == ".map") out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string to_movingai_text(const BoolGrid& g) {
  std::ostringstream os;
  os << "type octile\nheight " << g.height << "\nwidth " << g.width << "\nmap\n";
  for (std::size_t r = 0; r < g.height; ++r) {
    for (std::size_t c = 0; c < g.width; ++c) os << (g.at(r, c) ? '@' : '.');
    os << "\n";
  }
  return os.str();
}

bool placement_collision_free(const GeneratedMap& g) {
  const PlacementSpec& p = g.placement;
  for (std::size_t i = 0; i < p.num_agents(); ++i) {
    const Circle s{p.agent_starts[i], p.agent_radii[i]}, q{p.goals[i], p.agent_radii[i]};
    for (const Circle& l : g.map.landmarks) {
      if (!(surface_distance(s, l) > 0.0) || !(surface_distance(q, l) > 0.0)) return false;
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (!(surface_distance(s, {p.agent_starts[j], p.agent_radii[j]}) > 0.0)) return false;
      if (!(surface_distance(q, {p.goals[j], p.agent_radii[j]}) > 0.0)) return false;
    }
  }
  return true;
}

Verdict maps() {
  Verdict v;
  GeneratorConfig rg;
  rg.obstacle_density = 0.3;
  std::size_t exact120 = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    exact120 += gen_random_grid(rg, RngKey::from_seed(seed)).map.grid->count() == 120;
  }
  v.check(exact120 == 100, "20x20 density 0.3 -> 120 obstacle cells on " + std::to_string(exact120) + "/100 seeds");

  GeneratorConfig mz;
  mz.kind = MapKind::MazeGrid;
  mz.extra_connection_probability = 1.0;
  std::size_t connected = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const BoolGrid g = *gen_maze_grid(mz, RngKey::from_seed(seed)).map.grid;
    connected += oracle::flood_fill_reachable(g) == oracle::free_count(g);
  }
  v.check(connected == 100, "maze (p = 1.0) free space connected on " + std::to_string(connected) + "/100 seeds");

  const auto files = movingai_files();
  std::size_t matched = 0;
  std::string names;
  for (const auto& f : files) {
    const std::string text = read_file(f);
    try {
      const MapSpec m = parse_movingai(text, {});
      const std::size_t want = oracle::movingai_blocked_glyphs(text);
      const std::string canon = to_canonical_text({m, {}});
      const auto hashes = static_cast<std::size_t>(std::count(canon.begin(), canon.end(), '#'));
      const MapSpec again = parse_movingai(to_movingai_text(*m.grid), {});
      if (m.grid->count() == want && hashes == want && *again.grid == *m.grid) ++matched;
    } catch (const Error&) {
    }
    names += (names.empty() ? "" : ", ") + f.filename().string();
  }
  v.check(matched == files.size() && files.size() >= 3,
          "MovingAI glyph counts round-trip on " + std::to_string(matched) + "/" + std::to_string(files.size()) +
              " real files [" + names + "] (need >= 3 files)");

  std::size_t clean = 0, draws = 0;
  std::vector<EnvConfig> kinds(4);
  kinds[0].generator.obstacle_density = 0.3;
  kinds[1].generator.kind = MapKind::MazeGrid;
  kinds[2].generator.kind = MapKind::Caves;
  kinds[2].generator.rows = kinds[2].generator.cols = 32;
  kinds[3].generator.kind = MapKind::RandomGrid;
  kinds[3].generator.obstacle_density = 0.15;
  kinds[3].generator.agent_radius_max = 0.18;
  for (auto& k : kinds) k.generator.num_agents = 16;
  if (!files.empty()) {
    kinds[3].generator.kind = MapKind::MovingAI;
    kinds[3].generator.layouts = {read_file(files.front())};
    kinds[3].generator.layout_names = {files.front().stem().string()};
  }
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    Environment env(kinds[k]);
    for (std::uint64_t seed = 0; seed < 250; ++seed) {
      const ResetResult r = env.reset(seed, seed);
      clean += placement_collision_free(r.map) && collision_flags(r.state) == std::vector<std::uint8_t>(16, 0);
      ++draws;
    }
  }
  v.check(clean == draws, "resets collision-free on " + std::to_string(clean) + "/" + std::to_string(draws) + " draws");
  return v;
}

// ------------------------------------------------------------ planner

Verdict planner() {
  Verdict v;
  const auto t0 = Clock::now();
  std::size_t paths = 0, verified = 0;
  const auto verify = [&](const MapSpec& m, double r, const Path& p, Vec2 s) {
    ++paths;
    const InflatedMap space(m, r);
    bool inside = true;
    for (const Vec2& w : p.waypoints) inside = inside && space.region().contains(w);
    verified += inside && p.waypoints.front() == s && oracle::min_clearance(p.waypoints, m.landmarks, r) > 0.0 &&
                (p.waypoints.size() > 1 || m.landmarks.empty() ||
                 oracle::min_clearance({s, s}, m.landmarks, r) > 0.0);
  };

  const MapSpec empty = map_from_grid(BoolGrid(10, 10), 0.4, 1, "empty");
  RandomStream rs(RngKey::from_seed(505));
  std::size_t near_optimal = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Vec2 s, g;
    do {
      s = {rs.uniform(0.15, 3.85), rs.uniform(0.15, 3.85)};
      g = {rs.uniform(0.15, 3.85), rs.uniform(0.15, 3.85)};
    } while (norm(g - s) < 1.0);
    const auto p = default_planner_params(empty, 0.1, 0.1, kRrtStarIterations);
    const Path path = rrt_star_plan(empty, s, g, 0.1, p, RngKey::from_seed(seed));
    verify(empty, 0.1, path, s);
    near_optimal += path.cost <= 1.15 * norm(g - s);
  }
  v.check(near_optimal >= 45, "RRT* cost <= 1.15 x straight line on " + std::to_string(near_optimal) +
                                  "/50 empty-map seeds (need >= 45)");

  std::vector<double> rrt_costs, star_costs;
  GeneratorConfig gc;
  gc.obstacle_density = 0.2;
  gc.num_agents = 1;
  for (std::uint64_t inst = 0; rrt_costs.size() < 50 && inst < 200; ++inst) {
    const GeneratedMap g = gen_random_grid(gc, RngKey::from_seed(1000 + inst));
    const Vec2 s = g.placement.agent_starts[0], goal = g.placement.goals[0];
    const RngKey key = RngKey::from_seed(inst);
    try {
      const Path a = rrt_plan(g.map, s, goal, 0.1, default_planner_params(g.map, 0.1, 0.1, kRrtIterations), key);
      const Path b = rrt_star_plan(g.map, s, goal, 0.1, default_planner_params(g.map, 0.1, 0.1, kRrtStarIterations), key);
      verify(g.map, 0.1, a, s);
      verify(g.map, 0.1, b, s);
      rrt_costs.push_back(a.cost);
      star_costs.push_back(b.cost);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoPathFound) throw;
    }
  }
  const auto median = [](std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
  };
  const double med_rrt = rrt_costs.empty() ? 0.0 : median(rrt_costs);
  const double med_star = star_costs.empty() ? 0.0 : median(star_costs);
  v.check(rrt_costs.size() == 50 && med_star <= med_rrt,
          "median cost over " + std::to_string(rrt_costs.size()) + " paired instances: RRT* " + fmt(med_star) +
              " <= RRT " + fmt(med_rrt));

  EnvConfig cfg;
  cfg.generator.rows = cfg.generator.cols = 10;
  cfg.generator.obstacle_density = 0.0;
  cfg.generator.num_agents = 1;
  std::size_t successes = 0;
  for (std::size_t e = 0; e < 100; ++e) {
    PlannerPdPolicy policy(PlannerKind::RrtStar);
    const RngKey key = split(RngKey::from_seed(5), e);
    const EpisodeRun run = run_episode_full(cfg, policy, key);
    successes += run.metrics.success_rate == 1.0;
    if (!policy.paths()[0].waypoints.empty()) {
      Environment env(cfg);
      const ResetResult r = env.reset_key(key);
      verify(r.map.map, r.state.agents[0].radius, policy.paths()[0], r.state.agents[0].position);
    }
  }
  v.check(successes >= 95, "RRT*+PD success on single-agent empty 10x10: " + std::to_string(successes) +
                               "/100 episodes (need >= 95)");
  v.check(paths == verified, "returned paths verified collision-free: " + std::to_string(verified) + "/" +
                                 std::to_string(paths));
  const double t = seconds_since(t0);
  v.check(t < 300.0, "runtime " + fmt(t) + " s < 300 s");
  return v;
}

// ------------------------------------------------------------ statistics

Verdict statistics() {
  Verdict v;
  const std::vector<double> one_to_eight{1, 2, 3, 4, 5, 6, 7, 8};
  v.check(iqm(one_to_eight) == 4.5, "iqm([1..8]) = " + fmt(iqm(one_to_eight)));

  bool point = true;
  RandomStream rs(RngKey::from_seed(606));
  for (int k = 0; k < 50; ++k) {
    const std::vector<double> c(1 + rs.below(60), rs.uniform(-5, 5));
    const Interval ci = bootstrap_ci(c, RngKey::from_seed(k));
    point = point && ci.lo == c[0] && ci.hi == c[0];
  }
  v.check(point, "constant-data bootstrap CI equals the point on 50 samples");

  std::vector<double> taus;
  for (int i = 0; i <= 100; ++i) taus.push_back(i / 100.0);
  std::size_t monotone = 0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> scores(1 + rs.below(50));
    for (double& s : scores) s = rs.bernoulli(0.2) ? std::round(rs.uniform() * 10) / 10 : rs.uniform();
    const auto prof = performance_profile(scores, taus);
    monotone += std::is_sorted(prof.rbegin(), prof.rend());
  }
  v.check(monotone == 1000, "performance profiles non-increasing on " + std::to_string(monotone) + "/1000 score sets");

  bool half = true;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> x(1 + rs.below(40));
    for (double& a : x) a = static_cast<double>(rs.below(4)) + (rs.bernoulli(0.5) ? rs.uniform() : 0.0);
    half = half && prob_improvement(x, x) == 0.5;
  }
  v.check(half, "prob_improvement(x, x) == 0.5 exactly on 200 samples");
  const std::vector<double> x{1, 3}, y{2};
  v.check(prob_improvement(x, y) == 0.5, "Mann-Whitney example P([1,3] > [2]) = " + fmt(prob_improvement(x, y)));
  return v;
}

// ------------------------------------------------------------ determinism

EnvConfig golden_config() { return load_config(kSource / "configs/golden.yaml"); }

std::string golden_trace_in_process() {
  std::ostringstream os;
  TraceWriter w(os);
  RandomPolicy policy;
  run_episode_full(golden_config(), policy, RngKey::from_seed(5), 0, &w);
  return os.str();
}

std::string golden_trace_batched(std::size_t threads, std::size_t batch) {
  EnvConfig cfg = golden_config();
  cfg.batch_size = batch;
  BatchEnvironment env(cfg, threads);
  std::vector<std::uint64_t> seeds(batch);
  for (std::size_t k = 0; k < batch; ++k) seeds[k] = 5 + k;
  std::vector<std::optional<Error>> errors;
  auto resets = env.reset(seeds, errors);
  std::vector<WorldState> states;
  std::vector<std::vector<ObservationVector>> obs;
  std::vector<RandomPolicy> policies(batch);
  for (std::size_t k = 0; k < batch; ++k) {
    policies[k].begin_episode(resets[k].map, resets[k].state, cfg, split(RngKey::from_seed(seeds[k]), 3));
    states.push_back(resets[k].state);
    obs.push_back(resets[k].observations);
  }
  std::ostringstream os;
  TraceWriter w(os);
  w.header(states[0], resets[0].map.map.bounds);
  w.step(states[0], obs[0], nullptr);
  std::vector<std::vector<Action>> actions(batch);
  std::vector<StepResult> results;
  while (!states[0].done) {
    for (std::size_t k = 0; k < batch; ++k) policies[k].act(obs[k], states[k], actions[k]);
    env.step(states, actions, results, errors);
    for (const auto& e : errors) {
      if (e) throw *e;
    }
    for (std::size_t k = 0; k < batch; ++k) obs[k] = results[k].observations;
    w.step(states[0], obs[0], &results[0]);
  }
  return os.str();
}

Verdict determinism() {
  Verdict v;
  const fs::path golden_path = kSource / "tests/data/golden_seed5.trace";
  const std::string golden = read_file(golden_path);
  v.check(!golden.empty(), "golden trace present (" + std::to_string(golden.size()) + " bytes)");
  const std::string first = golden_trace_in_process();
  const std::string second = golden_trace_in_process();
  v.check(first == golden && second == golden, "two in-process runs reproduce the golden trace bit-exactly");

  const fs::path tmp = fs::temp_directory_path() / "cmapf_acceptance_golden.trace";
  const std::string cmd = std::string(CMAPF_CLI) + " run --policy random --config " +
                          (kSource / "configs/golden.yaml").string() + " --seed 5 --trace " + tmp.string() +
                          " > /dev/null";
  const int rc = std::system(cmd.c_str());
  v.check(rc == 0 && read_file(tmp) == golden, "separate CLI process reproduces the golden trace");
  fs::remove(tmp);

  for (const std::size_t threads : {1u, 4u}) {
    for (const std::size_t batch : {1u, 8u}) {
      const bool same = golden_trace_batched(threads, batch) == golden;
      v.check(same, "threads " + std::to_string(threads) + ", batch " + std::to_string(batch) +
                        ": slot 0 matches the golden trace");
    }
  }
  return v;
}

// ------------------------------------------------------------ throughput

// Runs every configuration once per round, rounds interleaved so that slow
// phases of a shared machine hit all configurations of a round alike.
std::vector<std::vector<BenchReport>> bench_rounds(const std::vector<BenchOptions>& configs, int rounds) {
  std::vector<std::vector<BenchReport>> out(rounds);
  for (auto& round : out) {
    for (const BenchOptions& o : configs) round.push_back(run_bench(o));
  }
  return out;
}

// Fitted relative change of y across x (y normalized by its mean).
double fitted_change(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] / my - 1.0);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx * (x.back() - x.front());
}

Verdict throughput() {
  Verdict v;
  const std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  constexpr double kTolerance = 0.05;
  BenchOptions base;
  base.size = 20;
  base.density = 0.3;
  base.agents = 32;
  base.threads = threads;
  base.warmup = 2;
  constexpr int kRounds = 15;
  const auto sized = [](BenchOptions o) {
    o.steps = std::max<std::size_t>(2, 8192 / (o.envs * o.agents));
    return o;
  };

  std::vector<BenchOptions> configs;
  for (const std::size_t b : {8u, 16u, 32u, 64u, 128u, 256u}) {
    BenchOptions o = base;
    o.envs = b;
    configs.push_back(sized(o));
  }
  std::vector<double> log_batch;
  for (const BenchOptions& o : configs) log_batch.push_back(std::log2(static_cast<double>(o.envs)));
  const auto rounds = bench_rounds(configs, kRounds);
  std::vector<double> changes, best(configs.size(), 0.0);
  for (const auto& round : rounds) {
    std::vector<double> sps;
    for (std::size_t i = 0; i < round.size(); ++i) {
      sps.push_back(round[i].agent_steps_per_second);
      best[i] = std::max(best[i], sps.back());
    }
    changes.push_back(fitted_change(log_batch, sps));
  }
  std::sort(changes.begin(), changes.end());
  const double change = changes[changes.size() / 2];
  std::string series;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    series += (series.empty() ? "" : ", ") + std::to_string(configs[i].envs) + ":" + fmt(best[i], 6);
  }
  v.check(change >= -kTolerance, "agent-steps/s vs batch at 32 agents, " + std::to_string(threads) +
                                     " thread(s): median per-round fitted change 8->256 is " + fmt(100.0 * change, 3) +
                                     "% (>= -5% timing noise); best per batch " + series);

  configs.clear();
  for (const std::size_t n : {4u, 8u, 16u, 32u, 64u, 128u}) {
    BenchOptions o = base;
    o.envs = 8;
    o.agents = n;
    configs.push_back(sized(o));
  }
  std::vector<double> ns, cost(configs.size(), std::numeric_limits<double>::infinity());
  for (const BenchOptions& o : configs) ns.push_back(static_cast<double>(o.agents));
  for (const auto& round : bench_rounds(configs, kRounds)) {
    for (std::size_t i = 0; i < round.size(); ++i) {
      cost[i] = std::min(cost[i], round[i].wall_seconds / static_cast<double>(round[i].steps));
    }
  }
  series.clear();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    series += (series.empty() ? "" : ", ") + fmt(ns[i], 4) + ":" + fmt(cost[i] * 1e3, 4) + "ms";
  }
  // Least squares on relative residuals (c_i - a - b n_i) / c_i, matching the relative tolerance.
  double s00 = 0.0, s01 = 0.0, s11 = 0.0, t0 = 0.0, t1 = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double w = 1.0 / (cost[i] * cost[i]);
    s00 += w;
    s01 += w * ns[i];
    s11 += w * ns[i] * ns[i];
    t0 += w * cost[i];
    t1 += w * ns[i] * cost[i];
  }
  const double det = s00 * s11 - s01 * s01;
  const double intercept = (s11 * t0 - s01 * t1) / det, slope = (s00 * t1 - s01 * t0) / det;
  double worst = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double fit = intercept + slope * ns[i];
    worst = std::max(worst, fit > 0.0 ? std::abs(cost[i] - fit) / fit : std::numeric_limits<double>::infinity());
  }
  v.check(slope > 0.0 && worst <= 0.5, "per-step cost vs agents (8 envs) within +-50% of a relative least-squares linear fit (worst " +
                                           fmt(100.0 * worst, 3) + "%): " + series);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"physics", physics},         {"integration", integration}, {"observation", observation},
      {"reward", reward},           {"maps", maps},               {"planner", planner},
      {"statistics", statistics},   {"determinism", determinism}, {"throughput", throughput},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  for (const auto& w : wanted) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == w; })) {
      std::cerr << "unknown criterion '" << w << "'\n";
      return 2;
    }
  }
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    const auto t0 = Clock::now();
    Verdict verdict;
    try {
      verdict = run();
    } catch (const std::exception& e) {
      verdict.check(false, std::string("exception: ") + e.what());
    }
    for (const auto& note : verdict.notes) std::cout << "    " << note << "\n";
    std::cout << (verdict.pass ? "PASS " : "FAIL ") << name << " (" << fmt(seconds_since(t0), 3) << " s)\n";
    std::cout.flush();
    failures += !verdict.pass;
  }
  return failures == 0 ? 0 : 1;
}
