#include "socnav/sfm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace socnav::sfm {

void SfmParams::validate() const {
  if (!(dt > 0.0)) throw ConfigError("sfm.dt must be > 0");
  if (!(social_range > 0.0)) throw ConfigError("sfm.social_range must be > 0");
}

std::size_t World::index_of(int id) const {
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].id == id) return i;
  }
  throw Error("no agent with id " + std::to_string(id));
}

Vec2 desired_force(const AgentState& agent, double lambda) {
  return lambda * (agent.goal - agent.position);
}

Vec2 social_force(const AgentState& agent, std::span<const AgentState> neighbors,
                  const SfmParams& params, SfmDiagnostics* diagnostics) {
  Vec2 total;
  for (const auto& other : neighbors) {
    const Vec2 diff = agent.position - other.position;
    const double d = norm(diff);
    Vec2 dir;
    if (d > 0.0) {
      dir = {diff.x / d, diff.y / d};
    } else {
      dir = {1.0, 0.0};
      if (diagnostics) ++diagnostics->coincident_pairs;
    }
    const double magnitude =
        params.social_strength * std::exp((agent.radius + other.radius - d) / params.social_range);
    total += magnitude * dir;
  }
  return total;
}

Vec2 heading_of(const AgentState& agent) {
  if (norm(agent.velocity) >= 1e-6) return normalized(agent.velocity);
  const Vec2 to_goal = agent.goal - agent.position;
  if (norm(to_goal) > 0.0) return normalized(to_goal);
  return {1.0, 0.0};
}

std::vector<AgentState> fov_filter(const AgentState& agent, std::span<const AgentState> others,
                                   double half_angle, double range, Vec2 heading) {
  const Vec2 h = normalized(heading);
  std::vector<AgentState> kept;
  for (const auto& other : others) {
    if (other.id == agent.id) continue;
    const Vec2 rel = other.position - agent.position;
    const double d = norm(rel);
    if (d > range) continue;
    const double bearing = std::atan2(cross(h, rel), dot(h, rel));
    if (std::abs(bearing) <= half_angle) kept.push_back(other);
  }
  return kept;
}

std::vector<AgentState> others_of(const World& world, std::size_t index) {
  std::vector<AgentState> out;
  out.reserve(world.agents.size());
  for (std::size_t j = 0; j < world.agents.size(); ++j) {
    if (j != index) out.push_back(world.agents[j]);
  }
  return out;
}

Vec2 expert_force(const World& world, std::size_t index, const SfmParams& params) {
  const auto& self = world.agents[index];
  const auto neighbors = others_of(world, index);
  return desired_force(self, params.lambda_desired) + social_force(self, neighbors, params);
}

ForceProvider expert_forces(const SfmParams& params) {
  return [params](const World& w, std::size_t i) { return expert_force(w, i, params); };
}

World step(const World& world, const SfmParams& params, const ForceProvider& force_of) {
  params.validate();
  std::vector<Vec2> forces(world.agents.size());
  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    forces[i] = force_of(world, i);
    if (!is_finite(forces[i])) throw SimulationError("non-finite force", world.agents[i].id);
  }
  World next = world;
  for (std::size_t i = 0; i < next.agents.size(); ++i) {
    auto& a = next.agents[i];
    Vec2 v = a.velocity + params.dt * forces[i];
    const double speed = norm(v);
    if (speed > a.max_speed) v *= a.max_speed / speed;
    a.velocity = v;
    a.position += params.dt * v;
  }
  next.time = world.time + params.dt;
  return next;
}

std::vector<std::pair<int, int>> detect_collisions(const World& world) {
  std::vector<std::pair<int, int>> pairs;
  const auto& ag = world.agents;
  for (std::size_t i = 0; i < ag.size(); ++i) {
    for (std::size_t j = i + 1; j < ag.size(); ++j) {
      if (norm(ag[i].position - ag[j].position) < ag[i].radius + ag[j].radius) {
        pairs.emplace_back(std::min(ag[i].id, ag[j].id), std::max(ag[i].id, ag[j].id));
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace socnav::sfm
