#include "socnav/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace socnav::scenario {

namespace {

constexpr std::array<std::string_view, kScenarioCount> kNames = {
    "passing", "overtaking", "crossing", "group_pass_outside", "group_pass_between", "group_crossing"};

constexpr std::array<std::string_view, 4> kOutcomeNames = {"running", "goal", "collision", "timeout"};

LayoutTable make_canonical() {
  LayoutTable t;
  const LayoutAgent robot_short{{-3.0, 0.0}, {4.0, 0.0}, 1.0, 1.5, 0.0};
  const LayoutAgent robot_long{{-4.0, 0.0}, {4.0, 0.0}, 1.0, 1.5, 0.0};

  t[0] = {0.8, {robot_short, {{3.0, 0.2}, {-5.0, 0.2}, 1.0, 1.5, 0.0}}};
  t[1] = {0.8, {robot_long, {{-2.0, 0.3}, {6.0, 0.3}, 0.5, 0.5, 0.0}}};
  t[2] = {0.8, {robot_long, {{0.0, -4.0}, {0.0, 5.0}, 1.0, 1.5, 0.0}}};

  Layout group_passing{0.8, {robot_short}};
  for (double s : {-0.5, 0.5, 1.5}) group_passing.agents.push_back({{3.0, 0.0}, {-5.0, 0.0}, 1.0, 1.5, s});
  t[3] = group_passing;
  t[4] = group_passing;
  t[4].default_group_spacing = 1.6;

  Layout group_crossing{0.8, {robot_long}};
  for (double s : {-1.0, 0.0, 1.0}) group_crossing.agents.push_back({{0.0, -4.0}, {0.0, 5.0}, 1.0, 1.5, s});
  t[5] = group_crossing;
  return t;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_values(std::string_view s, std::size_t offset) {
  std::vector<double> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    out.push_back(parse_double(s.substr(i, j - i), offset + i));
    i = j;
  }
  return out;
}

}  // namespace

std::string_view name_of(ScenarioId id) { return kNames[static_cast<std::size_t>(id)]; }

std::optional<ScenarioId> parse_scenario(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<ScenarioId>(i);
  }
  return std::nullopt;
}

std::string_view name_of(Outcome outcome) { return kOutcomeNames[static_cast<std::size_t>(outcome)]; }

std::optional<Outcome> parse_outcome(std::string_view name) {
  for (std::size_t i = 0; i < kOutcomeNames.size(); ++i) {
    if (kOutcomeNames[i] == name) return static_cast<Outcome>(i);
  }
  return std::nullopt;
}

const LayoutTable& canonical_layouts() {
  static const LayoutTable table = make_canonical();
  return table;
}

LayoutTable parse_layout_table(std::string_view text) {
  // Collect per-scenario entries first; agent count is the highest index + 1.
  std::array<std::map<int, LayoutAgent>, kScenarioCount> agents;
  std::array<std::map<int, unsigned>, kScenarioCount> seen;  // field bitmask per agent
  std::array<std::optional<double>, kScenarioCount> spacing;

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view raw = text.substr(pos, eol - pos);
    const std::size_t line_offset = pos;
    pos = eol + 1;

    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_offset);
    const std::string_view key = trim(line.substr(0, eq));
    const std::size_t value_offset = line_offset + eq + 1;
    const auto values = parse_values(line.substr(eq + 1), value_offset);

    const auto dot1 = key.find('.');
    if (dot1 == std::string_view::npos) throw ParseError("malformed key '" + std::string(key) + "'", line_offset);
    const auto sid = parse_scenario(key.substr(0, dot1));
    if (!sid) throw ParseError("unknown scenario in key '" + std::string(key) + "'", line_offset);
    const auto s = static_cast<std::size_t>(*sid);
    const std::string_view rest = key.substr(dot1 + 1);

    if (rest == "group_spacing") {
      if (values.size() != 1) throw ParseError("group_spacing takes one value", value_offset);
      spacing[s] = values[0];
      continue;
    }
    const auto dot2 = rest.find('.');
    if (dot2 == std::string_view::npos) throw ParseError("malformed key '" + std::string(key) + "'", line_offset);
    const int index = static_cast<int>(parse_int(rest.substr(0, dot2), line_offset));
    if (index < 0) throw ParseError("negative agent index", line_offset);
    const std::string_view field = rest.substr(dot2 + 1);
    auto& a = agents[s][index];
    auto& mask = seen[s][index];

    auto want = [&](std::size_t n) {
      if (values.size() != n) throw ParseError("field '" + std::string(field) + "' takes " + std::to_string(n) + " value(s)", value_offset);
    };
    if (field == "start") { want(2); a.start = {values[0], values[1]}; mask |= 1u; }
    else if (field == "goal") { want(2); a.goal = {values[0], values[1]}; mask |= 2u; }
    else if (field == "speed") { want(1); a.speed = values[0]; mask |= 4u; }
    else if (field == "max_speed") { want(1); a.max_speed = values[0]; mask |= 8u; }
    else if (field == "spread") { want(1); a.spread = values[0]; mask |= 16u; }
    else throw ParseError("unknown field '" + std::string(field) + "'", line_offset);
  }

  LayoutTable table;
  for (std::size_t s = 0; s < kScenarioCount; ++s) {
    const std::string scen(kNames[s]);
    if (!spacing[s]) throw ParseError("missing " + scen + ".group_spacing", text.size());
    table[s].default_group_spacing = *spacing[s];
    if (agents[s].empty()) throw ParseError("scenario " + scen + " has no agents", text.size());
    const int count = agents[s].rbegin()->first + 1;
    for (int i = 0; i < count; ++i) {
      auto it = agents[s].find(i);
      if (it == agents[s].end() || seen[s][i] != 31u) {
        throw ParseError("incomplete entry " + scen + "." + std::to_string(i), text.size());
      }
      table[s].agents.push_back(it->second);
    }
  }
  return table;
}

LayoutTable load_layout_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open layout table '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_layout_table(ss.str());
}

std::string format_layout_table(const LayoutTable& table) {
  std::ostringstream out;
  for (std::size_t s = 0; s < kScenarioCount; ++s) {
    const std::string scen(kNames[s]);
    out << scen << ".group_spacing = " << format_double(table[s].default_group_spacing) << '\n';
    for (std::size_t i = 0; i < table[s].agents.size(); ++i) {
      const auto& a = table[s].agents[i];
      const std::string p = scen + "." + std::to_string(i) + ".";
      out << p << "start = " << format_double(a.start.x) << ' ' << format_double(a.start.y) << '\n';
      out << p << "goal = " << format_double(a.goal.x) << ' ' << format_double(a.goal.y) << '\n';
      out << p << "speed = " << format_double(a.speed) << '\n';
      out << p << "max_speed = " << format_double(a.max_speed) << '\n';
      out << p << "spread = " << format_double(a.spread) << '\n';
    }
  }
  return out.str();
}

ScenarioConfig make_scenario_config(ScenarioId id, std::uint64_t seed, double noise_scale,
                                    const LayoutTable& table) {
  ScenarioConfig cfg;
  cfg.id = id;
  cfg.seed = seed;
  cfg.noise_scale = noise_scale;
  cfg.group_spacing = table[static_cast<std::size_t>(id)].default_group_spacing;
  return cfg;
}

sfm::World build_scenario(const ScenarioConfig& cfg, const LayoutTable& table) {
  if (cfg.noise_scale < 0.0) throw ConfigError("noise_scale must be >= 0");
  const Layout& layout = table[static_cast<std::size_t>(cfg.id)];
  Rng rng(cfg.seed);
  const double ext = cfg.arena_half_extent;

  sfm::World world;
  world.rng_state = cfg.seed;
  int id = 0;
  for (const auto& entry : layout.agents) {
    const Vec2 dir = normalized(entry.goal - entry.start);
    const Vec2 shift = entry.spread * cfg.group_spacing * perp(dir);
    sfm::AgentState a;
    a.id = id++;
    a.position = entry.start + shift;
    a.goal = entry.goal + shift;
    a.velocity = entry.speed * dir;
    a.max_speed = entry.max_speed;
    if (cfg.noise_scale > 0.0) {
      a.position += cfg.noise_scale * Vec2{rng.truncated_normal(3.0), rng.truncated_normal(3.0)};
      a.velocity += cfg.noise_scale * Vec2{rng.truncated_normal(3.0), rng.truncated_normal(3.0)};
      a.position = {std::clamp(a.position.x, -ext, ext), std::clamp(a.position.y, -ext, ext)};
      const double speed = norm(a.velocity);
      if (speed > a.max_speed) a.velocity *= a.max_speed / speed;
    }
    world.agents.push_back(a);
  }
  return world;
}

EpisodeOutcome episode_status(const sfm::World& world, int agent_id, double goal_eps, int max_steps,
                              int current_step) {
  const auto& agent = world.agent(agent_id);
  if (norm(agent.position - agent.goal) < goal_eps) return {Outcome::GoalReached, current_step};
  for (const auto& [a, b] : sfm::detect_collisions(world)) {
    if (a == agent_id || b == agent_id) return {Outcome::Collision, current_step};
  }
  if (current_step >= max_steps) return {Outcome::Timeout, current_step};
  return {Outcome::Running, current_step};
}

}  // namespace socnav::scenario
