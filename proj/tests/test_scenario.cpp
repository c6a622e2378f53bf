#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "socnav/scenario.hpp"

using namespace socnav;
using namespace socnav::scenario;
using sfm::World;

namespace {

double point_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
  return norm(p - (a + t * ab));
}

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return d1 * d2 < 0 && d3 * d4 < 0;
}

double segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  if (segments_cross(a, b, c, d)) return 0.0;
  return std::min({point_segment(a, c, d), point_segment(b, c, d), point_segment(c, a, b), point_segment(d, a, b)});
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Scenario, NamesRoundTrip) {
  for (auto id : kAllScenarios) EXPECT_EQ(parse_scenario(name_of(id)), id);
  EXPECT_FALSE(parse_scenario("stroll").has_value());
  for (auto o : {Outcome::Running, Outcome::GoalReached, Outcome::Collision, Outcome::Timeout}) {
    EXPECT_EQ(parse_outcome(name_of(o)), o);
  }
}

TEST(Scenario, BuildIsPureFunctionOfConfig) {
  for (auto id : kAllScenarios) {
    const auto cfg = make_scenario_config(id, 1234, 0.3);
    EXPECT_EQ(build_scenario(cfg), build_scenario(cfg));
    EXPECT_NE(build_scenario(cfg), build_scenario(make_scenario_config(id, 1235, 0.3)));
  }
}

TEST(Scenario, NoiseFreeMatchesLayoutTable) {
  for (auto id : kAllScenarios) {
    const auto& layout = canonical_layouts()[static_cast<std::size_t>(id)];
    const World w = build_scenario(make_scenario_config(id, 99, 0.0));
    ASSERT_EQ(w.agents.size(), layout.agents.size());
    for (std::size_t i = 0; i < w.agents.size(); ++i) {
      const auto& la = layout.agents[i];
      const Vec2 dir = normalized(la.goal - la.start);
      const Vec2 shift = (la.spread * layout.default_group_spacing) * perp(dir);
      EXPECT_EQ(w.agents[i].id, static_cast<int>(i));
      EXPECT_EQ(w.agents[i].position, la.start + shift);
      EXPECT_EQ(w.agents[i].goal, la.goal + shift);
      EXPECT_EQ(w.agents[i].velocity, la.speed * dir);
      EXPECT_EQ(w.agents[i].max_speed, la.max_speed);
    }
  }
}

TEST(Scenario, PassingIsHeadOn) {
  const World w = build_scenario(make_scenario_config(ScenarioId::Passing, 0, 0.0));
  const Vec2 a = normalized(w.agents[0].goal - w.agents[0].position);
  const Vec2 b = normalized(w.agents[1].goal - w.agents[1].position);
  EXPECT_DOUBLE_EQ(dot(a, b), -1.0);
}

TEST(Scenario, EveryLayoutForcesAnEncounter) {
  for (auto id : kAllScenarios) {
    const World w = build_scenario(make_scenario_config(id, 0, 0.0));
    const auto& r = w.agents[0];
    double best = 1e9;
    for (std::size_t i = 1; i < w.agents.size(); ++i) {
      best = std::min(best, segment_distance(r.position, r.goal, w.agents[i].position, w.agents[i].goal));
    }
    EXPECT_LE(best, 1.0) << name_of(id);
  }
}

TEST(Scenario, NoiseStaysInsideArenaAndSpeedLimit) {
  for (auto id : kAllScenarios) {
    for (std::uint64_t s = 0; s < 50; ++s) {
      auto cfg = make_scenario_config(id, s, 2.0);
      const World w = build_scenario(cfg);
      for (const auto& a : w.agents) {
        ASSERT_LE(std::abs(a.position.x), cfg.arena_half_extent);
        ASSERT_LE(std::abs(a.position.y), cfg.arena_half_extent);
        ASSERT_LE(norm(a.velocity), a.max_speed + 1e-12);
      }
    }
  }
}

TEST(Scenario, GroupSpacingComesFromTable) {
  EXPECT_DOUBLE_EQ(make_scenario_config(ScenarioId::GroupPassBetween, 0, 0).group_spacing, 1.6);
  EXPECT_DOUBLE_EQ(make_scenario_config(ScenarioId::GroupPassOutside, 0, 0).group_spacing, 0.8);
}

TEST(LayoutTable, FormatParseRoundTrip) {
  const auto text = format_layout_table(canonical_layouts());
  EXPECT_EQ(parse_layout_table(text), canonical_layouts());
}

TEST(LayoutTable, CheckedInFileMatchesBuiltIn) {
  EXPECT_EQ(parse_layout_table(slurp(std::string(SOCNAV_SOURCE_DIR) + "/configs/layouts.cfg")), canonical_layouts());
}

TEST(LayoutTable, ErrorsCarryOffsets) {
  auto text = format_layout_table(canonical_layouts());
  const auto at = text.find("crossing.1.speed");
  auto bad = text;
  bad.replace(text.find('=', at) + 2, 1, "q");
  try {
    parse_layout_table(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_GT(e.offset(), at);
  }
  EXPECT_THROW(parse_layout_table("nowhere.0.start = 1 2\n"), ParseError);
}

TEST(EpisodeStatus, Precedence) {
  World w;
  sfm::AgentState robot;
  robot.id = 0;
  robot.goal = {1, 0};
  robot.position = {1, 0};
  sfm::AgentState ped;
  ped.id = 1;
  ped.position = {5, 5};
  w.agents = {robot, ped};
  EXPECT_EQ(episode_status(w, 0, 0.3, 400, 10).kind, Outcome::GoalReached);

  w.agents[0].position = {-2, 0};
  w.agents[1].position = {-2.2, 0};
  EXPECT_EQ(episode_status(w, 0, 0.3, 400, 10).kind, Outcome::Collision);

  // At the goal and touching: goal wins.
  w.agents[0].position = {1, 0};
  w.agents[1].position = {1.3, 0};
  EXPECT_EQ(episode_status(w, 0, 0.3, 400, 10).kind, Outcome::GoalReached);

  w.agents[1].position = {5, 5};
  w.agents[0].position = {-2, 0};
  EXPECT_EQ(episode_status(w, 0, 0.3, 400, 400), (EpisodeOutcome{Outcome::Timeout, 400}));
  EXPECT_EQ(episode_status(w, 0, 0.3, 400, 399).kind, Outcome::Running);
}
