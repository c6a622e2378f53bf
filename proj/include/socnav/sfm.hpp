#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "socnav/common.hpp"

// Social force dynamics: goal attraction plus exponential pairwise repulsion,
// advanced with semi-implicit Euler and a per-agent speed clamp.
namespace socnav::sfm {

struct AgentState {
  int id = 0;
  Vec2 position;
  Vec2 velocity;
  Vec2 goal;
  double radius = 0.3;     // m
  double max_speed = 1.5;  // m/s

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct SfmParams {
  double lambda_desired = 2.0;     // 1/s^2
  double social_strength = 30.0;   // A, m/s^2
  double social_range = 0.5;       // B, m
  double dt = 0.05;                // s
  // When false a collision is recorded but does not end an episode.
  bool collisions_terminate = true;

  void validate() const;
  friend bool operator==(const SfmParams&, const SfmParams&) = default;
};

struct World {
  std::vector<AgentState> agents;
  double time = 0.0;
  std::uint64_t rng_state = 0;

  std::size_t index_of(int id) const;
  const AgentState& agent(int id) const { return agents[index_of(id)]; }

  friend bool operator==(const World&, const World&) = default;
};

struct SfmDiagnostics {
  std::size_t coincident_pairs = 0;
};

Vec2 desired_force(const AgentState& agent, double lambda);

// Sum of A*exp((r_i + r_j - d_ij)/B) along the unit vector from each neighbor
// toward the agent. Coincident centers push along +x and bump the counter.
Vec2 social_force(const AgentState& agent, std::span<const AgentState> neighbors,
                  const SfmParams& params, SfmDiagnostics* diagnostics = nullptr);

// Velocity direction, or goal direction when nearly stationary, else +x.
Vec2 heading_of(const AgentState& agent);

std::vector<AgentState> fov_filter(const AgentState& agent, std::span<const AgentState> others,
                                   double half_angle, double range, Vec2 heading);

// Everyone except agents[index].
std::vector<AgentState> others_of(const World& world, std::size_t index);

// Full expert force on agents[index]: desired force plus 360-degree social force.
Vec2 expert_force(const World& world, std::size_t index, const SfmParams& params);

using ForceProvider = std::function<Vec2(const World&, std::size_t)>;

ForceProvider expert_forces(const SfmParams& params);

// All forces are evaluated on the input world before any agent moves.
World step(const World& world, const SfmParams& params, const ForceProvider& force_of);

// Unordered overlapping pairs (d < r_i + r_j), sorted by (min id, max id).
std::vector<std::pair<int, int>> detect_collisions(const World& world);

}  // namespace socnav::sfm
