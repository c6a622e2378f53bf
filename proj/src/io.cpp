#include "io.hpp"

#include <fstream>
#include <sstream>

namespace socnav::io {

using json = nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<Token> split_tokens(std::string_view line, std::size_t line_offset) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    out.push_back({line.substr(i, j - i), line_offset + i});
    i = j;
  }
  return out;
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + std::string(where));
  }
}

json env_to_json(const EnvConfig& env) {
  return json{
      {"sfm",
       {{"lambda_desired", env.sfm.lambda_desired},
        {"social_strength", env.sfm.social_strength},
        {"social_range", env.sfm.social_range},
        {"dt", env.sfm.dt},
        {"collisions_terminate", env.sfm.collisions_terminate}}},
      {"sensor",
       {{"n_rays", env.sensor.n_rays},
        {"half_angle", env.sensor.half_angle},
        {"max_range", env.sensor.max_range}}},
      {"noise_scale", env.noise_scale},
      {"goal_eps", env.goal_eps},
      {"max_steps", env.max_steps},
  };
}

EnvConfig env_from_json(const json& j, EnvConfig env) {
  try {
    check_keys(j, {"sfm", "sensor", "noise_scale", "goal_eps", "max_steps"}, "env");
    if (j.contains("sfm")) {
      const auto& s = j["sfm"];
      check_keys(s, {"lambda_desired", "social_strength", "social_range", "dt", "collisions_terminate"}, "env.sfm");
      env.sfm.lambda_desired = s.value("lambda_desired", env.sfm.lambda_desired);
      env.sfm.social_strength = s.value("social_strength", env.sfm.social_strength);
      env.sfm.social_range = s.value("social_range", env.sfm.social_range);
      env.sfm.dt = s.value("dt", env.sfm.dt);
      env.sfm.collisions_terminate = s.value("collisions_terminate", env.sfm.collisions_terminate);
    }
    if (j.contains("sensor")) {
      const auto& s = j["sensor"];
      check_keys(s, {"n_rays", "half_angle", "half_angle_deg", "max_range"}, "env.sensor");
      env.sensor.n_rays = s.value("n_rays", env.sensor.n_rays);
      if (s.contains("half_angle") && s.contains("half_angle_deg")) {
        throw ConfigError("env.sensor: give half_angle (rad) or half_angle_deg, not both");
      }
      env.sensor.half_angle = s.value("half_angle", env.sensor.half_angle);
      if (s.contains("half_angle_deg")) env.sensor.half_angle = deg_to_rad(s["half_angle_deg"].get<double>());
      env.sensor.max_range = s.value("max_range", env.sensor.max_range);
    }
    env.noise_scale = j.value("noise_scale", env.noise_scale);
    env.goal_eps = j.value("goal_eps", env.goal_eps);
    env.max_steps = j.value("max_steps", env.max_steps);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("env: ") + e.what());
  }
  env.validate();
  return env;
}

}  // namespace socnav::io
