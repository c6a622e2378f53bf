#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "socnav/sfm.hpp"

namespace socnav::scenario {

enum class ScenarioId : int {
  Passing = 0,
  Overtaking,
  Crossing,
  GroupPassOutside,
  GroupPassBetween,
  GroupCrossing,
};

inline constexpr std::size_t kScenarioCount = 6;
inline constexpr std::array<ScenarioId, kScenarioCount> kAllScenarios = {
    ScenarioId::Passing,          ScenarioId::Overtaking,       ScenarioId::Crossing,
    ScenarioId::GroupPassOutside, ScenarioId::GroupPassBetween, ScenarioId::GroupCrossing};

std::string_view name_of(ScenarioId id);
std::optional<ScenarioId> parse_scenario(std::string_view name);

// One body of a canonical layout. The body is shifted laterally (left of its
// travel direction) by spread * group_spacing, start and goal alike.
struct LayoutAgent {
  Vec2 start;
  Vec2 goal;
  double speed = 1.0;      // initial speed along start->goal
  double max_speed = 1.5;
  double spread = 0.0;

  friend bool operator==(const LayoutAgent&, const LayoutAgent&) = default;
};

struct Layout {
  double default_group_spacing = 0.8;
  std::vector<LayoutAgent> agents;  // agents[0] is the learning agent

  friend bool operator==(const Layout&, const Layout&) = default;
};

using LayoutTable = std::array<Layout, kScenarioCount>;

const LayoutTable& canonical_layouts();

// Key/value text ("<scenario>.<index>.<field> = values", '#' comments).
LayoutTable parse_layout_table(std::string_view text);
LayoutTable load_layout_table(const std::string& path);
std::string format_layout_table(const LayoutTable& table);

struct ScenarioConfig {
  ScenarioId id = ScenarioId::Passing;
  std::uint64_t seed = 0;
  double noise_scale = 0.3;       // m (and m/s) std of the perturbation
  double arena_half_extent = 5.0;
  double group_spacing = 0.8;
};

// Defaults, with group_spacing taken from the layout table for `id`.
ScenarioConfig make_scenario_config(ScenarioId id, std::uint64_t seed, double noise_scale,
                                    const LayoutTable& table = canonical_layouts());

sfm::World build_scenario(const ScenarioConfig& cfg, const LayoutTable& table = canonical_layouts());

enum class Outcome { Running, GoalReached, Collision, Timeout };

std::string_view name_of(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view name);

struct EpisodeOutcome {
  Outcome kind = Outcome::Running;
  int step = 0;

  bool terminal() const { return kind != Outcome::Running; }
  friend bool operator==(const EpisodeOutcome&, const EpisodeOutcome&) = default;
};

// Precedence: GoalReached, then Collision, then Timeout.
EpisodeOutcome episode_status(const sfm::World& world, int agent_id, double goal_eps, int max_steps,
                              int current_step);

}  // namespace socnav::scenario
