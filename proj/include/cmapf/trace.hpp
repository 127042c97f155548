#pragma once

// Episode trace text format, floats as C99 hex literals (%a) so files are
// bit-exact:
//
//   cmapf-trace 1
//   layout <id>
//   bounds <minx> <miny> <maxx> <maxy>
//   landmarks <M>
//   L <x> <y> <r>                                  (M lines)
//   agents <N>
//   G <gx> <gy> <radius> <model>                   (N lines)
//   step <t>                                       (t = 0 is the reset state)
//   A <x> <y> <vx> <vy> <heading> <reward> <collided> <on_goal>   (N lines)
//   O <fnv1a-64 of the observation doubles, hex>

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cmapf/environment.hpp"
#include "cmapf/error.hpp"

namespace cmapf {

inline std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t observation_digest(const std::vector<ObservationVector>& obs) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& o : obs) {
    const std::vector<double> flat = o.flatten();
    h = fnv1a64(flat.data(), flat.size() * sizeof(double), h);
  }
  return h;
}

namespace detail {

inline std::string hexf(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double parse_hexf(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw Error(ErrorCode::InvalidArgument, "bad number '" + s + "' in trace");
  return v;
}

}  // namespace detail

class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& os) : os_(os) {}

  void header(const WorldState& w, const Bounds& bounds) {
    using detail::hexf;
    os_ << "cmapf-trace 1\n";
    os_ << "layout " << (w.layout_id.empty() ? "-" : w.layout_id) << "\n";
    os_ << "bounds " << hexf(bounds.min.x) << ' ' << hexf(bounds.min.y) << ' ' << hexf(bounds.max.x) << ' '
        << hexf(bounds.max.y) << "\n";
    os_ << "landmarks " << w.landmarks.size() << "\n";
    for (const Circle& c : w.landmarks) {
      os_ << "L " << hexf(c.center.x) << ' ' << hexf(c.center.y) << ' ' << hexf(c.radius) << "\n";
    }
    os_ << "agents " << w.agents.size() << "\n";
    for (std::size_t i = 0; i < w.agents.size(); ++i) {
      os_ << "G " << hexf(w.goals[i].x) << ' ' << hexf(w.goals[i].y) << ' ' << hexf(w.agents[i].radius) << ' '
          << to_string(w.agents[i].model) << "\n";
    }
  }

  /// `result` is null for the reset state.
  void step(const WorldState& w, const std::vector<ObservationVector>& obs, const StepResult* result) {
    using detail::hexf;
    os_ << "step " << w.step_index << "\n";
    for (std::size_t i = 0; i < w.agents.size(); ++i) {
      const AgentKinematics& a = w.agents[i];
      os_ << "A " << hexf(a.position.x) << ' ' << hexf(a.position.y) << ' ' << hexf(a.velocity.x) << ' '
          << hexf(a.velocity.y) << ' ' << hexf(a.heading) << ' ' << hexf(result ? result->rewards[i] : 0.0) << ' '
          << (result ? int(result->collided[i]) : 0) << ' ' << (result ? int(result->on_goal[i]) : 0) << "\n";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, observation_digest(obs));
    os_ << "O " << buf << "\n";
  }

 private:
  std::ostream& os_;
};

struct TraceFrame {
  std::size_t step = 0;
  std::vector<AgentKinematics> agents;
  std::vector<double> rewards;
  std::vector<std::uint8_t> collided, on_goal;
};

struct TraceData {
  std::string layout_id;
  Bounds bounds;
  std::vector<Circle> landmarks;
  std::vector<Vec2> goals;
  std::vector<double> radii;
  std::vector<DynamicsModel> models;
  std::vector<TraceFrame> frames;
};

inline TraceData read_trace(std::istream& is) {
  TraceData t;
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::InvalidArgument, "trace line " + std::to_string(line_no) + ": " + what);
  };
  const auto next = [&]() -> std::istringstream {
    if (!std::getline(is, line)) fail("unexpected end of file");
    ++line_no;
    return std::istringstream(line);
  };
  const auto word = [&](std::istringstream& ss) {
    std::string w;
    if (!(ss >> w)) fail("missing field");
    return w;
  };
  const auto num = [&](std::istringstream& ss) { return detail::parse_hexf(word(ss)); };
  const auto count = [&](std::istringstream& ss, const char* key) {
    if (word(ss) != key) fail(std::string("expected '") + key + "'");
    return static_cast<std::size_t>(std::stoull(word(ss)));
  };

  auto ss = next();
  if (word(ss) != "cmapf-trace") fail("not a trace file");
  ss = next();
  if (word(ss) != "layout") fail("expected 'layout'");
  t.layout_id = word(ss);
  ss = next();
  if (word(ss) != "bounds") fail("expected 'bounds'");
  t.bounds.min.x = num(ss);
  t.bounds.min.y = num(ss);
  t.bounds.max.x = num(ss);
  t.bounds.max.y = num(ss);
  ss = next();
  const std::size_t m = count(ss, "landmarks");
  for (std::size_t j = 0; j < m; ++j) {
    ss = next();
    if (word(ss) != "L") fail("expected landmark line");
    const double x = num(ss), y = num(ss), r = num(ss);
    t.landmarks.push_back({{x, y}, r});
  }
  ss = next();
  const std::size_t n = count(ss, "agents");
  for (std::size_t i = 0; i < n; ++i) {
    ss = next();
    if (word(ss) != "G") fail("expected goal line");
    const double x = num(ss), y = num(ss), r = num(ss);
    t.goals.push_back({x, y});
    t.radii.push_back(r);
    t.models.push_back(word(ss) == "diffdrive" ? DynamicsModel::DiffDrive : DynamicsModel::Holonomic);
  }
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream head(line);
    TraceFrame f;
    f.step = count(head, "step");
    for (std::size_t i = 0; i < n; ++i) {
      ss = next();
      if (word(ss) != "A") fail("expected agent line");
      AgentKinematics a;
      a.position = {num(ss), num(ss)};
      a.velocity = {num(ss), num(ss)};
      a.heading = num(ss);
      a.radius = t.radii[i];
      a.model = t.models[i];
      f.agents.push_back(a);
      f.rewards.push_back(num(ss));
      f.collided.push_back(static_cast<std::uint8_t>(std::stoi(word(ss))));
      f.on_goal.push_back(static_cast<std::uint8_t>(std::stoi(word(ss))));
    }
    ss = next();
    if (word(ss) != "O") fail("expected observation digest");
    t.frames.push_back(std::move(f));
  }
  return t;
}

}  // namespace cmapf
