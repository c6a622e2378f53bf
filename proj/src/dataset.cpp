#include "socnav/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "io.hpp"

namespace socnav::dataset {

using scenario::ScenarioId;
using json = nlohmann::json;

Vec2 social_force_label(const sfm::World& world, int body_id, const EnvConfig& env) {
  const std::size_t idx = world.index_of(body_id);
  const auto& body = world.agents[idx];
  const Vec2 heading = sfm::heading_of(body);
  const auto others = sfm::others_of(world, idx);
  const auto visible = sfm::fov_filter(body, others, env.sensor.half_angle, env.sensor.max_range, heading);
  return to_body(sfm::social_force(body, visible, env.sfm), heading);
}

namespace {

sfm::World episode_start(const DatasetConfig& cfg, ScenarioId id, int episode) {
  const auto scfg = scenario::make_scenario_config(id, derive_seed(cfg.seed, static_cast<std::uint64_t>(episode)),
                                                   cfg.env.noise_scale);
  return scenario::build_scenario(scfg);
}

}  // namespace

std::vector<sfm::World> replay_episode(const DatasetConfig& cfg, ScenarioId id, int episode, int steps) {
  std::vector<sfm::World> worlds{episode_start(cfg, id, episode)};
  const auto forces = sfm::expert_forces(cfg.env.sfm);
  for (int t = 0; t < steps; ++t) worlds.push_back(sfm::step(worlds.back(), cfg.env.sfm, forces));
  return worlds;
}

Dataset generate_expert_dataset(const DatasetConfig& cfg) {
  if (cfg.total_pairs < 1) throw ConfigError("dataset.total_pairs must be >= 1");
  cfg.env.validate();

  constexpr std::size_t n = scenario::kScenarioCount;
  std::array<std::size_t, n> quota{}, filled{}, scenario_episodes{};
  for (std::size_t s = 0; s < n; ++s) quota[s] = cfg.total_pairs / n + (s < cfg.total_pairs % n ? 1 : 0);

  Dataset out;
  out.meta = cfg;
  out.records.reserve(cfg.total_pairs);
  const auto forces = sfm::expert_forces(cfg.env.sfm);

  int episode = 0;
  std::size_t cursor = 0;
  while (out.records.size() < cfg.total_pairs) {
    while (filled[cursor % n] >= quota[cursor % n]) ++cursor;
    const std::size_t s = cursor % n;
    ++cursor;
    const auto id = static_cast<ScenarioId>(s);

    sfm::World world = episode_start(cfg, id, episode);
    const std::size_t k = scenario_episodes[s]++;
    const Perspective perspective = k % 2 == 0 ? Perspective::Agent : Perspective::Pedestrian;
    const std::size_t pedestrians = world.agents.size() - 1;
    const int body_id = perspective == Perspective::Agent ? 0 : static_cast<int>(1 + (k / 2) % pedestrians);

    for (int t = 0; t < cfg.env.max_steps && filled[s] < quota[s]; ++t) {
      const auto& body = world.agent(body_id);
      const Vec2 heading = sfm::heading_of(body);
      const auto obs = sensing::observe(world, body_id, cfg.env.sensor);

      DatasetRecord rec;
      rec.scenario = id;
      rec.episode = episode;
      rec.step = t;
      rec.perspective = perspective;
      rec.body_id = body_id;
      rec.depth = obs.depth;
      rec.desired_force = obs.desired_dir;
      rec.social_force = social_force_label(world, body_id, cfg.env);

      world = sfm::step(world, cfg.env.sfm, forces);
      rec.action = to_body(world.agent(body_id).velocity, heading);
      out.records.push_back(std::move(rec));
      ++filled[s];

      const auto status = scenario::episode_status(world, body_id, cfg.env.goal_eps, cfg.env.max_steps, t + 1);
      if (status.kind == scenario::Outcome::GoalReached || status.kind == scenario::Outcome::Timeout) break;
      if (status.kind == scenario::Outcome::Collision && cfg.env.sfm.collisions_terminate) break;
    }
    ++episode;
  }
  return out;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& d, std::size_t eval_count, std::uint64_t seed) {
  if (eval_count > d.size()) {
    throw Error("eval_count " + std::to_string(eval_count) + " exceeds dataset size " + std::to_string(d.size()));
  }
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

  std::vector<char> in_eval(d.size(), 0);
  for (std::size_t i = 0; i < eval_count; ++i) in_eval[order[i]] = 1;

  Dataset train{d.meta, {}}, eval{d.meta, {}};
  train.records.reserve(d.size() - eval_count);
  eval.records.reserve(eval_count);
  for (std::size_t i = 0; i < d.size(); ++i) (in_eval[i] ? eval : train).records.push_back(d.records[i]);
  return {std::move(train), std::move(eval)};
}

// ---------------------------------------------------------------------------
// File format: line 1 is a JSON header, then one space-separated record per
// line: scenario episode step perspective body_id depth[R] dfx dfy sfx sfy ax ay

namespace {

json meta_to_json(const DatasetConfig& m, std::size_t count) {
  json h;
  h["format"] = kFormatTag;
  h["count"] = count;
  h["n_rays"] = m.env.sensor.n_rays;
  h["total_pairs"] = m.total_pairs;
  h["seed"] = m.seed;
  h["timestamp"] = m.timestamp;
  h["env"] = io::env_to_json(m.env);
  return h;
}

}  // namespace

std::string serialize_dataset(const Dataset& d) {
  std::string out = meta_to_json(d.meta, d.size()).dump();
  out += '\n';
  for (const auto& r : d.records) {
    out += scenario::name_of(r.scenario);
    out += ' ' + std::to_string(r.episode) + ' ' + std::to_string(r.step) + ' ';
    out += r.perspective == Perspective::Agent ? "agent" : "pedestrian";
    out += ' ' + std::to_string(r.body_id);
    for (double v : r.depth) out += ' ' + format_double(v);
    for (Vec2 v : {r.desired_force, r.social_force, r.action}) {
      out += ' ' + format_double(v.x) + ' ' + format_double(v.y);
    }
    out += '\n';
  }
  return out;
}

Dataset parse_dataset(std::string_view text) {
  const auto first_eol = text.find('\n');
  if (first_eol == std::string_view::npos) throw ParseError("missing dataset header line", text.size());

  Dataset d;
  std::size_t count = 0;
  try {
    const json h = json::parse(text.substr(0, first_eol));
    if (h.at("format").get<std::string>() != kFormatTag) throw ParseError("unsupported dataset format tag", 0);
    count = h.at("count").get<std::size_t>();
    d.meta.total_pairs = h.at("total_pairs").get<std::size_t>();
    d.meta.seed = h.at("seed").get<std::uint64_t>();
    d.meta.timestamp = h.at("timestamp").get<std::string>();
    d.meta.env = io::env_from_json(h.at("env"));
    if (h.at("n_rays").get<int>() != d.meta.env.sensor.n_rays) throw ParseError("n_rays disagrees with sensor", 0);
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad dataset header: ") + e.what(), 0);
  }

  const auto rays = static_cast<std::size_t>(d.meta.env.sensor.n_rays);
  const std::size_t fields = 5 + rays + 6;
  d.records.reserve(count);
  std::size_t pos = first_eol + 1;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) throw ParseError("unterminated record line (truncated file?)", pos);
    const auto tokens = io::split_tokens(text.substr(pos, eol - pos), pos);
    if (tokens.size() != fields) {
      throw ParseError("record has " + std::to_string(tokens.size()) + " fields, expected " + std::to_string(fields),
                       pos);
    }
    DatasetRecord r;
    const auto sid = scenario::parse_scenario(tokens[0].text);
    if (!sid) throw ParseError("unknown scenario '" + std::string(tokens[0].text) + "'", tokens[0].offset);
    r.scenario = *sid;
    r.episode = static_cast<int>(parse_int(tokens[1].text, tokens[1].offset));
    r.step = static_cast<int>(parse_int(tokens[2].text, tokens[2].offset));
    if (tokens[3].text == "agent") r.perspective = Perspective::Agent;
    else if (tokens[3].text == "pedestrian") r.perspective = Perspective::Pedestrian;
    else throw ParseError("unknown perspective '" + std::string(tokens[3].text) + "'", tokens[3].offset);
    r.body_id = static_cast<int>(parse_int(tokens[4].text, tokens[4].offset));
    r.depth.resize(rays);
    for (std::size_t k = 0; k < rays; ++k) r.depth[k] = parse_double(tokens[5 + k].text, tokens[5 + k].offset);
    auto vec = [&](std::size_t i) {
      return Vec2{parse_double(tokens[i].text, tokens[i].offset), parse_double(tokens[i + 1].text, tokens[i + 1].offset)};
    };
    r.desired_force = vec(5 + rays);
    r.social_force = vec(7 + rays);
    r.action = vec(9 + rays);
    d.records.push_back(std::move(r));
    pos = eol + 1;
  }
  if (d.records.size() != count) {
    throw ParseError("header declares " + std::to_string(count) + " records, body has " +
                         std::to_string(d.records.size()),
                     text.size());
  }
  return d;
}

void save_dataset(const Dataset& d, const std::string& path) { io::write_file(path, serialize_dataset(d)); }

Dataset load_dataset(const std::string& path) { return parse_dataset(io::read_file(path)); }

}  // namespace socnav::dataset
