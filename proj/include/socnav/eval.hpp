#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "socnav/gail.hpp"

namespace socnav::eval {

using gail::Trajectory;

// Smallest robot-pedestrian center distance over the start world and every
// step; nullopt when there are no pedestrians.
std::optional<double> min_dist(const Trajectory& traj);

// end step * dt for GoalReached episodes only.
std::optional<double> travel_time(const Trajectory& traj);

struct PolicyEntry {
  std::string tag;
  net::NetworkSpec spec;
  net::ParamVector params;
};

struct EvalConfig {
  int episodes = 10;
  std::uint64_t base_seed = 10000;
  bool deterministic = true;
  std::vector<scenario::ScenarioId> scenarios{scenario::kAllScenarios.begin(), scenario::kAllScenarios.end()};

  void validate() const;
};

struct EpisodeRow {
  std::string policy;
  scenario::ScenarioId scenario = scenario::ScenarioId::Passing;
  int episode = 0;
  std::uint64_t seed = 0;
  scenario::EpisodeOutcome outcome;
  std::optional<double> min_dist;
  std::optional<double> travel_time;
};

struct Stat {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 when n < 2
  double min = 0.0;
  double max = 0.0;
};

// nullopt for an empty sample.
std::optional<Stat> summarize(const std::vector<double>& xs);

struct ScenarioSummary {
  std::string policy;
  scenario::ScenarioId scenario = scenario::ScenarioId::Passing;
  int episodes = 0;
  int goals = 0;
  int collisions = 0;
  int timeouts = 0;
  std::optional<Stat> min_dist;
  std::optional<Stat> travel_time;  // successful episodes only
  // Filled by normalize_report: stats divided by the reference policy's mean.
  std::optional<Stat> min_dist_ratio;
  std::optional<Stat> travel_time_ratio;
};

struct EvalReport {
  EvalConfig config;
  std::vector<EpisodeRow> episodes;      // policy-major, then scenario, then episode
  std::vector<ScenarioSummary> summary;  // policy-major, then scenario
  std::optional<std::string> reference;  // tag used for normalization

  const ScenarioSummary* find(std::string_view policy, scenario::ScenarioId id) const;
};

// Episode k of each scenario starts from seed base_seed + k for every policy.
EvalReport run_eval(const std::vector<PolicyEntry>& policies, const EvalConfig& cfg, const EnvConfig& env,
                    std::vector<Trajectory>* trajectories = nullptr);

// Same seed ladder with the social-force expert driving the robot (tag "expert").
EvalReport run_expert(const EvalConfig& cfg, const EnvConfig& env, std::vector<Trajectory>* trajectories = nullptr);

EvalReport normalize_report(const EvalReport& report, std::string_view reference_tag);

// Goal-reach rate across all episodes of one policy.
double goal_rate(const EvalReport& report, std::string_view policy);

// policy,scenario,episode,seed,outcome,end_step,min_dist,travel_time
std::string episodes_csv(const EvalReport& report);
// policy,scenario,episodes,goals,collisions,timeouts,then mean/std/min/max for
// min_dist, travel_time, min_dist_ratio and travel_time_ratio
std::string summary_csv(const EvalReport& report);

// ---------------------------------------------------------------------------
// Trajectory files: one text block per trajectory, exact round trip.

inline constexpr const char* kTrajectoryTag = "socnav-trajectories/1";

std::string serialize_trajectories(const std::vector<Trajectory>& trajs);
std::vector<Trajectory> parse_trajectories(std::string_view text);
void save_trajectories(const std::vector<Trajectory>& trajs, const std::string& path);
std::vector<Trajectory> load_trajectories(const std::string& path);

// Panels laid out in a grid; each agent is one polyline (robot red,
// pedestrians blue) with circle markers that grow along the path.
std::string render_svg(const std::vector<Trajectory>& trajs);
void save_svg(const std::vector<Trajectory>& trajs, const std::string& path);

}  // namespace socnav::eval
