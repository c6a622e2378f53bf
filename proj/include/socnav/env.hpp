#pragma once

#include "socnav/scenario.hpp"
#include "socnav/sensing.hpp"
#include "socnav/sfm.hpp"

namespace socnav {

// Everything needed to run an episode besides the controller.
struct EnvConfig {
  sfm::SfmParams sfm;
  sensing::SensorConfig sensor;
  double noise_scale = 0.3;  // m
  double goal_eps = 0.3;     // m
  int max_steps = 400;

  void validate() const {
    sfm.validate();
    sensor.validate();
    if (noise_scale < 0.0) throw ConfigError("noise_scale must be >= 0");
    if (!(goal_eps > 0.0)) throw ConfigError("goal_eps must be > 0");
    if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  }
  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

}  // namespace socnav
