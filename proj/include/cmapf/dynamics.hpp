#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cmapf/error.hpp"
#include "cmapf/geometry.hpp"
#include "cmapf/spatial_hash.hpp"
#include "cmapf/world.hpp"

namespace cmapf {

struct ContactParams {
  double f0 = 100.0;  // force magnitude scale
  double k = 0.001;   // penetration softness
};

struct HolonomicParams {
  double mass = 1.0;
  double damping = 0.015;  // per integration step
  double max_speed = 1.0;  // +inf disables the clamp
  double dt = 0.005;
};

struct DiffDriveParams {
  double max_u = 1.0;
  double max_w = 2.0;
  double dt = 0.005;
};

struct ModelParams {
  HolonomicParams holonomic;
  DiffDriveParams diffdrive;
};

struct SimParams {
  ContactParams contact;
  double dt = 0.005;
  std::size_t frameskip = 20;

  double step_duration() const { return dt * static_cast<double>(frameskip); }
};

/// Pair forces are snapped to multiples of this quantum. Sums of lattice
/// values are exact (well below 2^53 quanta), so per-agent totals do not
/// depend on accumulation order and agent-agent pairs cancel bit-exactly.
inline constexpr double kForceQuantum = 0x1.0p-32;

inline double snap_to_force_lattice(double v) {
  return std::nearbyint(v * 0x1.0p32) * kForceQuantum;
}

/// k * ln(1 + exp(z / k)) without overflow for large z / k.
inline double scaled_softplus(double z, double k) {
  const double s = z / k;
  if (s > 0.0) return k * (s + std::log1p(std::exp(-s)));
  return k * std::log1p(std::exp(s));
}

/// Magnitude of the contact force at centre distance `dist` (< d_min).
inline double contact_magnitude(double dist, double d_min, const ContactParams& p) {
  return p.f0 * scaled_softplus(d_min - dist, p.k);
}

namespace detail {

/// Contact force along `direction` (unit) given the current distance; the
/// caller has already established dist < d_min.
inline Vec2 snapped_contact(Vec2 direction, double dist, double d_min, const ContactParams& p) {
  const double mag = contact_magnitude(dist, d_min, p);
  return {snap_to_force_lattice(direction.x * mag), snap_to_force_lattice(direction.y * mag)};
}

inline Vec2 pair_force(Vec2 delta, double d_min, const ContactParams& p, Vec2 fallback_dir) {
  const double dist = norm(delta);
  if (!(dist < d_min)) return {};
  if (dist == 0.0) return snapped_contact(fallback_dir, 0.0, d_min, p);
  return snapped_contact(delta / dist, dist, d_min, p);
}

}  // namespace detail

/// Repulsive force on body i from body j, delta = x_i - x_j. Zero outside
/// contact range. Note the piecewise form jumps from f0*k*ln2 to 0 at
/// |delta| = d_min; with the default k = 1e-3 the jump is 0.069 * f0 / 1000.
inline Vec2 collision_force(Vec2 delta, double d_min, const ContactParams& p) {
  const double dist = norm(delta);
  if (!(dist < d_min)) return {};
  if (dist == 0.0) {
    throw Error(ErrorCode::ZeroDisplacement, "coincident centres inside contact range");
  }
  return detail::snapped_contact(delta / dist, dist, d_min, p);
}

/// Hash over agents followed by landmarks, i.e. global body indices.
inline void build_body_hash(SpatialHash& hash, std::span<const AgentKinematics> agents,
                            std::span<const Circle> landmarks) {
  hash.assign(agents.size(), [&](std::size_t i) { return agents[i].body(); });
  hash.set_static(static_cast<std::uint32_t>(agents.size()), landmarks);
}

/// Total collision force per agent. Candidates come from `hash` and are
/// visited in ascending global index. Coincident centres fall back to +x for
/// the higher-indexed body of an agent pair (-x for the lower) and to +x for
/// an agent sitting on a landmark centre. Landmarks never receive forces.
inline void accumulate_forces(std::span<const AgentKinematics> agents, std::span<const Circle> landmarks,
                              const SpatialHash& hash, const ContactParams& p, std::vector<Vec2>& out,
                              std::vector<std::uint32_t>& scratch) {
  const std::size_t n = agents.size();
  out.assign(n, Vec2{});
  for (std::size_t i = 0; i < n; ++i) {
    const AgentKinematics& a = agents[i];
    hash.query(a.body(), 0.0, scratch);
    Vec2 total;
    for (const std::uint32_t j : scratch) {
      if (j == i) continue;
      if (j < n) {
        const AgentKinematics& b = agents[j];
        const Vec2 fallback = i > j ? Vec2{1.0, 0.0} : Vec2{-1.0, 0.0};
        total += detail::pair_force(a.position - b.position, a.radius + b.radius, p, fallback);
      } else {
        const Circle& lm = landmarks[j - n];
        total += detail::pair_force(a.position - lm.center, a.radius + lm.radius, p, {1.0, 0.0});
      }
    }
    out[i] = total;
  }
}

inline std::vector<Vec2> accumulate_forces(std::span<const AgentKinematics> agents,
                                           std::span<const Circle> landmarks, const SpatialHash& hash,
                                           const ContactParams& p) {
  std::vector<Vec2> out;
  std::vector<std::uint32_t> scratch;
  accumulate_forces(agents, landmarks, hash, p, out, scratch);
  return out;
}

/// Semi-implicit Euler step for a force-driven agent.
inline AgentKinematics step_holonomic(const AgentKinematics& state, Vec2 action_force, Vec2 collision,
                                      const HolonomicParams& p) {
  if (!is_finite(action_force)) {
    throw Error(ErrorCode::NonFiniteInput, "holonomic action force is not finite");
  }
  AgentKinematics next = state;
  Vec2 v = (1.0 - p.damping) * state.velocity + ((action_force + collision) / p.mass) * p.dt;
  if (std::isfinite(p.max_speed)) v = clamp_norm(v, p.max_speed);
  next.velocity = v;
  next.position = state.position + v * p.dt;
  return next;
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double theta) {
  double r = std::remainder(theta, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r = std::numbers::pi;
  return r;
}

/// Unicycle step. The collision force, which the kinematic model has no slot
/// for, is applied as a unit-mass positional correction collision * dt^2 so
/// diff-drive agents share the contact system with holonomic ones.
inline AgentKinematics step_diffdrive(const AgentKinematics& state, double u_a, double w_a, Vec2 collision,
                                      const DiffDriveParams& p) {
  if (!std::isfinite(u_a) || !std::isfinite(w_a)) {
    throw Error(ErrorCode::NonFiniteInput, "diff-drive action is not finite");
  }
  AgentKinematics next = state;
  const double u = std::clamp(u_a, -p.max_u, p.max_u);
  const double w = std::clamp(w_a, -p.max_w, p.max_w);
  const Vec2 v{u * std::cos(state.heading), u * std::sin(state.heading)};
  next.position = state.position + v * p.dt + collision * (p.dt * p.dt);
  next.heading = wrap_angle(state.heading + w * p.dt);
  next.velocity = v;
  return next;
}

/// Reusable buffers for sub-stepping; one per worker thread.
struct PhysicsScratch {
  explicit PhysicsScratch(double cell_size = 0.5) : hash(cell_size) {}
  SpatialHash hash;
  std::vector<Vec2> forces;
  std::vector<std::uint32_t> candidates;
};

/// Runs sim.frameskip integration steps of duration sim.dt, recomputing
/// collision forces every step with the same held actions.
inline void substep(WorldState& world, std::span<const Action> actions, const SimParams& sim,
                    const ModelParams& models, PhysicsScratch& scratch) {
  if (actions.size() != world.agents.size()) {
    throw Error(ErrorCode::ActionArity, "expected " + std::to_string(world.agents.size()) +
                                            " actions, got " + std::to_string(actions.size()));
  }
  HolonomicParams hp = models.holonomic;
  DiffDriveParams dp = models.diffdrive;
  hp.dt = sim.dt;
  dp.dt = sim.dt;
  for (std::size_t s = 0; s < sim.frameskip; ++s) {
    build_body_hash(scratch.hash, world.agents, world.landmarks);
    accumulate_forces(world.agents, world.landmarks, scratch.hash, sim.contact, scratch.forces,
                      scratch.candidates);
    for (std::size_t i = 0; i < world.agents.size(); ++i) {
      AgentKinematics& a = world.agents[i];
      try {
        if (a.model == DynamicsModel::Holonomic) {
          a = step_holonomic(a, actions[i].as_force(), scratch.forces[i], hp);
        } else {
          a = step_diffdrive(a, actions[i].first, actions[i].second, scratch.forces[i], dp);
        }
      } catch (const Error& e) {
        throw e.with_context("agent " + std::to_string(i));
      }
    }
  }
}

inline WorldState substep(const WorldState& world, std::span<const Action> actions, const SimParams& sim,
                          const ModelParams& models) {
  WorldState next = world;
  PhysicsScratch scratch;
  substep(next, actions, sim, models, scratch);
  return next;
}

}  // namespace cmapf
