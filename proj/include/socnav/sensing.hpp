#pragma once

#include <vector>

#include "socnav/sfm.hpp"

namespace socnav::sensing {

struct SensorConfig {
  int n_rays = 32;
  double half_angle = deg_to_rad(35.0);  // rad
  double max_range = 3.5;                // m

  void validate() const;
  friend bool operator==(const SensorConfig&, const SensorConfig&) = default;
};

// Readings closer than this (ray origin inside another disc) are floored here.
inline constexpr double kMinRange = 1e-3;

struct Observation {
  std::vector<double> depth;  // raw meters, each in (0, max_range]
  Vec2 desired_dir;           // unit, body frame; zero iff exactly at goal

  friend bool operator==(const Observation&, const Observation&) = default;
};

// Ray k bears -half_angle + k * 2 * half_angle / (R - 1) from the heading; a
// single ray points straight ahead.
std::vector<double> raycast_depth(const sfm::World& world, int agent_id, int n_rays, double half_angle,
                                  double max_range);

Observation observe(const sfm::World& world, int agent_id, const SensorConfig& cfg);

// Network input: depth / max_range followed by desired_dir.
std::vector<double> network_input(const Observation& obs, double max_range);
void append_network_input(std::vector<double>& out, std::span<const double> depth, Vec2 desired_dir,
                          double max_range);

inline int input_dim(const SensorConfig& cfg) { return cfg.n_rays + 2; }

}  // namespace socnav::sensing
