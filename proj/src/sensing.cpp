#include "socnav/sensing.hpp"

#include <algorithm>
#include <cmath>

namespace socnav::sensing {

void SensorConfig::validate() const {
  if (n_rays < 1) throw ConfigError("sensor.n_rays must be >= 1");
  if (!(half_angle >= 0.0)) throw ConfigError("sensor.half_angle must be >= 0");
  if (!(max_range > kMinRange)) throw ConfigError("sensor.max_range too small");
}

namespace {

// Distance along unit ray `dir` from `origin` to the disc, or +inf on miss.
double ray_disc(Vec2 origin, Vec2 dir, Vec2 center, double radius) {
  const Vec2 oc = center - origin;
  const double along = dot(oc, dir);
  const double perp_sq = dot(oc, oc) - along * along;
  const double r_sq = radius * radius;
  if (perp_sq > r_sq) return INFINITY;
  const double half_chord = std::sqrt(r_sq - perp_sq);
  const double t_near = along - half_chord;
  const double t_far = along + half_chord;
  if (t_far < 0.0) return INFINITY;
  return std::max(t_near, kMinRange);
}

}  // namespace

std::vector<double> raycast_depth(const sfm::World& world, int agent_id, int n_rays, double half_angle,
                                  double max_range) {
  const std::size_t self = world.index_of(agent_id);
  const auto& agent = world.agents[self];
  const Vec2 heading = sfm::heading_of(agent);
  std::vector<double> depth(static_cast<std::size_t>(n_rays), max_range);
  for (int k = 0; k < n_rays; ++k) {
    const double bearing = n_rays == 1 ? 0.0 : -half_angle + k * (2.0 * half_angle) / (n_rays - 1);
    const Vec2 dir = rotate(heading, bearing);
    double best = max_range;
    for (std::size_t j = 0; j < world.agents.size(); ++j) {
      if (j == self) continue;
      best = std::min(best, ray_disc(agent.position, dir, world.agents[j].position, world.agents[j].radius));
    }
    depth[static_cast<std::size_t>(k)] = best;
  }
  return depth;
}

Observation observe(const sfm::World& world, int agent_id, const SensorConfig& cfg) {
  Observation obs;
  obs.depth = raycast_depth(world, agent_id, cfg.n_rays, cfg.half_angle, cfg.max_range);
  const auto& agent = world.agent(agent_id);
  obs.desired_dir = to_body(normalized(agent.goal - agent.position), sfm::heading_of(agent));
  return obs;
}

void append_network_input(std::vector<double>& out, std::span<const double> depth, Vec2 desired_dir,
                          double max_range) {
  for (double d : depth) out.push_back(d / max_range);
  out.push_back(desired_dir.x);
  out.push_back(desired_dir.y);
}

std::vector<double> network_input(const Observation& obs, double max_range) {
  std::vector<double> out;
  out.reserve(obs.depth.size() + 2);
  append_network_input(out, obs.depth, obs.desired_dir, max_range);
  return out;
}

}  // namespace socnav::sensing
