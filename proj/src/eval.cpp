#include "socnav/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "io.hpp"

namespace socnav::eval {

using scenario::Outcome;

namespace {

std::optional<double> min_dist_in(const sfm::World& w, std::optional<double> best) {
  if (w.agents.empty()) return best;
  const Vec2 robot = w.agents[0].position;
  for (std::size_t i = 1; i < w.agents.size(); ++i) {
    const double d = norm(w.agents[i].position - robot);
    if (!best || d < *best) best = d;
  }
  return best;
}

}  // namespace

std::optional<double> min_dist(const Trajectory& traj) {
  auto best = min_dist_in(traj.start, std::nullopt);
  for (const auto& s : traj.steps) best = min_dist_in(s.world, best);
  return best;
}

std::optional<double> travel_time(const Trajectory& traj) {
  if (traj.outcome.kind != Outcome::GoalReached) return std::nullopt;
  return traj.outcome.step * traj.dt;
}

void EvalConfig::validate() const {
  if (episodes < 1) throw ConfigError("eval.episodes must be >= 1");
  if (scenarios.empty()) throw ConfigError("eval.scenarios must not be empty");
}

std::optional<Stat> summarize(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  Stat s;
  s.n = xs.size();
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

const ScenarioSummary* EvalReport::find(std::string_view policy, scenario::ScenarioId id) const {
  for (const auto& s : summary) {
    if (s.policy == policy && s.scenario == id) return &s;
  }
  return nullptr;
}

namespace {

using Runner = std::function<Trajectory(const scenario::ScenarioConfig&, Rng&)>;

void evaluate_tag(const std::string& tag, const Runner& run, const EvalConfig& cfg, const EnvConfig& env,
                  EvalReport& report, std::vector<Trajectory>* trajectories) {
  if (tag.empty() || tag.find_first_of(" \t\r\n,") != std::string::npos) {
    throw ConfigError("policy tag '" + tag + "' must be non-empty without spaces or commas");
  }
  for (const auto id : cfg.scenarios) {
    ScenarioSummary sum;
    sum.policy = tag;
    sum.scenario = id;
    std::vector<double> dists, times;
    for (int k = 0; k < cfg.episodes; ++k) {
      const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(k);
      Rng rng(derive_seed(seed, 7));
      auto traj = run(scenario::make_scenario_config(id, seed, env.noise_scale), rng);
      traj.label = tag;
      EpisodeRow row{tag, id, k, seed, traj.outcome, min_dist(traj), travel_time(traj)};
      ++sum.episodes;
      sum.goals += row.outcome.kind == Outcome::GoalReached;
      sum.collisions += row.outcome.kind == Outcome::Collision;
      sum.timeouts += row.outcome.kind == Outcome::Timeout;
      if (row.min_dist) dists.push_back(*row.min_dist);
      if (row.travel_time) times.push_back(*row.travel_time);
      report.episodes.push_back(std::move(row));
      if (trajectories) trajectories->push_back(std::move(traj));
    }
    sum.min_dist = summarize(dists);
    sum.travel_time = summarize(times);
    report.summary.push_back(std::move(sum));
  }
}

}  // namespace

EvalReport run_eval(const std::vector<PolicyEntry>& policies, const EvalConfig& cfg, const EnvConfig& env,
                    std::vector<Trajectory>* trajectories) {
  cfg.validate();
  env.validate();
  EvalReport report;
  report.config = cfg;
  for (const auto& entry : policies) {
    const net::Mlp mlp(entry.spec);
    if (entry.params.size() != mlp.param_count()) throw Error("policy '" + entry.tag + "' does not match its spec");
    if (mlp.spec().input_dim != sensing::input_dim(env.sensor)) {
      throw ConfigError("policy '" + entry.tag + "' input size does not match the sensor");
    }
    const auto mode = cfg.deterministic ? gail::ActionMode::Mean : gail::ActionMode::Sample;
    evaluate_tag(
        entry.tag,
        [&](const scenario::ScenarioConfig& scfg, Rng& rng) {
          return gail::rollout(mlp, entry.params.values, scfg, env, env.max_steps, rng, mode);
        },
        cfg, env, report, trajectories);
  }
  return report;
}

EvalReport run_expert(const EvalConfig& cfg, const EnvConfig& env, std::vector<Trajectory>* trajectories) {
  cfg.validate();
  env.validate();
  EvalReport report;
  report.config = cfg;
  const net::Mlp unused(net::scalar_spec(1, {}));
  evaluate_tag(
      "expert",
      [&](const scenario::ScenarioConfig& scfg, Rng& rng) {
        return gail::rollout(unused, {}, scfg, env, env.max_steps, rng, gail::ActionMode::Expert);
      },
      cfg, env, report, trajectories);
  return report;
}

namespace {

std::optional<Stat> ratio(const std::optional<Stat>& s, double ref) {
  if (!s) return std::nullopt;
  return Stat{s->n, s->mean / ref, s->std / ref, s->min / ref, s->max / ref};
}

}  // namespace

EvalReport normalize_report(const EvalReport& report, std::string_view reference_tag) {
  EvalReport out = report;
  out.reference = std::string(reference_tag);
  for (auto& s : out.summary) {
    const ScenarioSummary* ref = report.find(reference_tag, s.scenario);
    if (!ref) {
      throw Error("reference policy '" + std::string(reference_tag) + "' missing for scenario " +
                  std::string(scenario::name_of(s.scenario)));
    }
    if (ref->min_dist) {
      if (ref->min_dist->mean == 0.0) throw Error("reference min_dist mean is zero");
      s.min_dist_ratio = ratio(s.min_dist, ref->min_dist->mean);
    }
    if (ref->travel_time) {
      if (ref->travel_time->mean == 0.0) throw Error("reference travel_time mean is zero");
      s.travel_time_ratio = ratio(s.travel_time, ref->travel_time->mean);
    }
  }
  return out;
}

double goal_rate(const EvalReport& report, std::string_view policy) {
  int n = 0, goals = 0;
  for (const auto& row : report.episodes) {
    if (row.policy != policy) continue;
    ++n;
    goals += row.outcome.kind == Outcome::GoalReached;
  }
  if (n == 0) throw Error("no episodes for policy '" + std::string(policy) + "'");
  return static_cast<double>(goals) / n;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void append_stat(std::string& out, const std::optional<Stat>& s) {
  if (!s) {
    out += ",,,,";
    return;
  }
  out += ',' + format_double(s->mean) + ',' + format_double(s->std) + ',' + format_double(s->min) + ',' +
         format_double(s->max);
}

}  // namespace

std::string episodes_csv(const EvalReport& report) {
  std::string out = "policy,scenario,episode,seed,outcome,end_step,min_dist,travel_time\n";
  for (const auto& r : report.episodes) {
    out += r.policy + ',' + std::string(scenario::name_of(r.scenario)) + ',' + std::to_string(r.episode) + ',' +
           std::to_string(r.seed) + ',' + std::string(scenario::name_of(r.outcome.kind)) + ',' +
           std::to_string(r.outcome.step) + ',' + opt(r.min_dist) + ',' + opt(r.travel_time) + '\n';
  }
  return out;
}

std::string summary_csv(const EvalReport& report) {
  std::string out = "policy,scenario,episodes,goals,collisions,timeouts";
  for (const char* m : {"min_dist", "travel_time", "min_dist_ratio", "travel_time_ratio"}) {
    for (const char* f : {"mean", "std", "min", "max"}) out += std::string(",") + m + '_' + f;
  }
  out += '\n';
  for (const auto& s : report.summary) {
    out += s.policy + ',' + std::string(scenario::name_of(s.scenario)) + ',' + std::to_string(s.episodes) + ',' +
           std::to_string(s.goals) + ',' + std::to_string(s.collisions) + ',' + std::to_string(s.timeouts);
    append_stat(out, s.min_dist);
    append_stat(out, s.travel_time);
    append_stat(out, s.min_dist_ratio);
    append_stat(out, s.travel_time_ratio);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory text format.
//
//   socnav-trajectories/1 <count>
//   trajectory <label> <scenario> <seed> <dt> <steps> <outcome> <outcome_step>
//   world <time> <rng_state> <n_agents>
//   agent <id> <px> <py> <vx> <vy> <gx> <gy> <radius> <max_speed>     (n_agents lines)
//   step <ax> <ay> <logprob> <collision> <dir_x> <dir_y> <n_depth> <depth...>
//   world ... / agent ...                                              (state after the step)

namespace {

void put(std::string& out, double v) {
  out += ' ';
  out += format_double(v);
}

void write_world(std::string& out, const sfm::World& w) {
  out += "world";
  put(out, w.time);
  out += ' ' + std::to_string(w.rng_state) + ' ' + std::to_string(w.agents.size()) + '\n';
  for (const auto& a : w.agents) {
    out += "agent " + std::to_string(a.id);
    for (double v : {a.position.x, a.position.y, a.velocity.x, a.velocity.y, a.goal.x, a.goal.y, a.radius, a.max_speed})
      put(out, v);
    out += '\n';
  }
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }

  // Next line's tokens; the first must equal `keyword`, and the count must be
  // at least `min_fields` (keyword included).
  std::vector<io::Token> next(std::string_view keyword, std::size_t min_fields) {
    if (done()) throw ParseError("expected '" + std::string(keyword) + "' line, found end of input", pos_);
    const std::size_t eol = text_.find('\n', pos_);
    if (eol == std::string_view::npos) throw ParseError("unterminated line (truncated file?)", pos_);
    auto tokens = io::split_tokens(text_.substr(pos_, eol - pos_), pos_);
    const std::size_t at = pos_;
    pos_ = eol + 1;
    if (tokens.empty() || tokens[0].text != keyword) {
      throw ParseError("expected '" + std::string(keyword) + "' line", at);
    }
    if (tokens.size() < min_fields) throw ParseError("too few fields on '" + std::string(keyword) + "' line", at);
    return tokens;
  }

  std::size_t pos() const { return pos_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

double num(const io::Token& t) { return parse_double(t.text, t.offset); }
long long integer(const io::Token& t) { return parse_int(t.text, t.offset); }

std::uint64_t unsigned_integer(const io::Token& t) {
  std::uint64_t v = 0;
  const auto* end = t.text.data() + t.text.size();
  const auto [p, ec] = std::from_chars(t.text.data(), end, v);
  if (ec != std::errc() || p != end) throw ParseError("bad unsigned integer '" + std::string(t.text) + "'", t.offset);
  return v;
}

void exact_fields(const std::vector<io::Token>& tokens, std::size_t n) {
  if (tokens.size() != n) throw ParseError("wrong field count on '" + std::string(tokens[0].text) + "' line", tokens[0].offset);
}

sfm::World read_world(LineReader& in) {
  const auto head = in.next("world", 4);
  exact_fields(head, 4);
  sfm::World w;
  w.time = num(head[1]);
  w.rng_state = unsigned_integer(head[2]);
  const auto n = integer(head[3]);
  if (n < 0) throw ParseError("negative agent count", head[3].offset);
  for (long long i = 0; i < n; ++i) {
    const auto t = in.next("agent", 10);
    exact_fields(t, 10);
    sfm::AgentState a;
    a.id = static_cast<int>(integer(t[1]));
    a.position = {num(t[2]), num(t[3])};
    a.velocity = {num(t[4]), num(t[5])};
    a.goal = {num(t[6]), num(t[7])};
    a.radius = num(t[8]);
    a.max_speed = num(t[9]);
    w.agents.push_back(a);
  }
  return w;
}

}  // namespace

std::string serialize_trajectories(const std::vector<Trajectory>& trajs) {
  std::string out = std::string(kTrajectoryTag) + ' ' + std::to_string(trajs.size()) + '\n';
  for (const auto& t : trajs) {
    if (t.label.empty() || t.label.find_first_of(" \t\r\n") != std::string::npos) {
      throw Error("trajectory label '" + t.label + "' must be a non-empty word");
    }
    out += "trajectory " + t.label + ' ' + std::string(scenario::name_of(t.scenario)) + ' ' + std::to_string(t.seed);
    put(out, t.dt);
    out += ' ' + std::to_string(t.steps.size()) + ' ' + std::string(scenario::name_of(t.outcome.kind)) + ' ' +
           std::to_string(t.outcome.step) + '\n';
    write_world(out, t.start);
    for (const auto& s : t.steps) {
      out += "step";
      for (double v : {s.action.x, s.action.y, s.logprob}) put(out, v);
      out += s.collision ? " 1" : " 0";
      put(out, s.obs.desired_dir.x);
      put(out, s.obs.desired_dir.y);
      out += ' ' + std::to_string(s.obs.depth.size());
      for (double d : s.obs.depth) put(out, d);
      out += '\n';
      write_world(out, s.world);
    }
  }
  return out;
}

std::vector<Trajectory> parse_trajectories(std::string_view text) {
  LineReader in(text);
  const auto head = in.next(kTrajectoryTag, 2);
  exact_fields(head, 2);
  const auto count = integer(head[1]);
  if (count < 0) throw ParseError("negative trajectory count", head[1].offset);

  std::vector<Trajectory> out;
  for (long long k = 0; k < count; ++k) {
    const auto h = in.next("trajectory", 8);
    exact_fields(h, 8);
    Trajectory t;
    t.label = std::string(h[1].text);
    const auto sid = scenario::parse_scenario(h[2].text);
    if (!sid) throw ParseError("unknown scenario '" + std::string(h[2].text) + "'", h[2].offset);
    t.scenario = *sid;
    t.seed = unsigned_integer(h[3]);
    t.dt = num(h[4]);
    const auto steps = integer(h[5]);
    if (steps < 0) throw ParseError("negative step count", h[5].offset);
    const auto kind = scenario::parse_outcome(h[6].text);
    if (!kind) throw ParseError("unknown outcome '" + std::string(h[6].text) + "'", h[6].offset);
    t.outcome = {*kind, static_cast<int>(integer(h[7]))};
    t.start = read_world(in);
    for (long long i = 0; i < steps; ++i) {
      const auto s = in.next("step", 8);
      gail::TrajectoryStep step;
      step.action = {num(s[1]), num(s[2])};
      step.logprob = num(s[3]);
      if (s[4].text != "0" && s[4].text != "1") throw ParseError("collision flag must be 0 or 1", s[4].offset);
      step.collision = s[4].text == "1";
      step.obs.desired_dir = {num(s[5]), num(s[6])};
      const auto n = integer(s[7]);
      if (n < 0) throw ParseError("negative depth count", s[7].offset);
      exact_fields(s, 8 + static_cast<std::size_t>(n));
      for (long long r = 0; r < n; ++r) step.obs.depth.push_back(num(s[8 + static_cast<std::size_t>(r)]));
      step.world = read_world(in);
      t.steps.push_back(std::move(step));
    }
    out.push_back(std::move(t));
  }
  if (!in.done()) throw ParseError("trailing data after last trajectory", in.pos());
  return out;
}

void save_trajectories(const std::vector<Trajectory>& trajs, const std::string& path) {
  io::write_file(path, serialize_trajectories(trajs));
}

std::vector<Trajectory> load_trajectories(const std::string& path) { return parse_trajectories(io::read_file(path)); }

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr double kPanel = 320.0;
constexpr double kMargin = 24.0;
constexpr int kColumns = 3;

std::string fx(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const std::vector<Trajectory>& trajs) {
  const int n = static_cast<int>(trajs.size());
  const int cols = std::max(1, std::min(n, kColumns));
  const int rows = std::max(1, (n + cols - 1) / cols);
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fx(cols * kPanel) + "\" height=\"" +
         fx(rows * kPanel) + "\" viewBox=\"0 0 " + fx(cols * kPanel) + ' ' + fx(rows * kPanel) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int p = 0; p < n; ++p) {
    const Trajectory& t = trajs[static_cast<std::size_t>(p)];
    // World bounds over every recorded position and goal.
    double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x, hi_x = -lo_x, hi_y = -lo_x;
    auto grow = [&](Vec2 v) {
      lo_x = std::min(lo_x, v.x);
      hi_x = std::max(hi_x, v.x);
      lo_y = std::min(lo_y, v.y);
      hi_y = std::max(hi_y, v.y);
    };
    auto visit = [&](const sfm::World& w) {
      for (const auto& a : w.agents) grow(a.position);
    };
    visit(t.start);
    for (const auto& s : t.steps) visit(s.world);
    for (const auto& a : t.start.agents) grow(a.goal);
    if (!(lo_x <= hi_x)) lo_x = lo_y = -1.0, hi_x = hi_y = 1.0;
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-6});
    const double scale = (kPanel - 2.0 * kMargin) / span;
    const double ox = (p % cols) * kPanel + kMargin + 0.5 * (span - (hi_x - lo_x)) * scale;
    const double oy = (p / cols) * kPanel + kMargin + 0.5 * (span - (hi_y - lo_y)) * scale;
    auto sx = [&](double x) { return ox + (x - lo_x) * scale; };
    auto sy = [&](double y) { return oy + (hi_y - y) * scale; };  // y up

    out += "<g>\n<text x=\"" + fx((p % cols) * kPanel + 6.0) + "\" y=\"" + fx((p / cols) * kPanel + 16.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" +
           escape(t.label + " " + std::string(scenario::name_of(t.scenario)) + " " +
                  std::string(scenario::name_of(t.outcome.kind))) +
           "</text>\n";
    const std::size_t steps = t.steps.size();
    for (std::size_t ai = 0; ai < t.start.agents.size(); ++ai) {
      const char* color = ai == 0 ? "#d62728" : "#1f77b4";
      auto pos_at = [&](std::size_t k) {
        const sfm::World& w = k == 0 ? t.start : t.steps[k - 1].world;
        return ai < w.agents.size() ? w.agents[ai].position : t.start.agents[ai].position;
      };
      out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k <= steps; ++k) {
        const Vec2 v = pos_at(k);
        if (k) out += ' ';
        out += fx(sx(v.x)) + ',' + fx(sy(v.y));
      }
      out += "\"/>\n";
      // Markers thicken toward the end of the path.
      const std::size_t stride = std::max<std::size_t>(1, steps / 12);
      for (std::size_t k = 0; k <= steps; k += stride) {
        const Vec2 v = pos_at(k);
        const double frac = steps ? static_cast<double>(k) / static_cast<double>(steps) : 1.0;
        out += "<circle cx=\"" + fx(sx(v.x)) + "\" cy=\"" + fx(sy(v.y)) + "\" r=\"" + fx(1.0 + 3.0 * frac) +
               "\" fill=\"" + color + "\"/>\n";
      }
      const Vec2 g = t.start.agents[ai].goal;
      out += "<rect x=\"" + fx(sx(g.x) - 3.0) + "\" y=\"" + fx(sy(g.y) - 3.0) +
             "\" width=\"6.00\" height=\"6.00\" fill=\"none\" stroke=\"" + color + "\"/>\n";
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

void save_svg(const std::vector<Trajectory>& trajs, const std::string& path) {
  io::write_file(path, render_svg(trajs));
}

}  // namespace socnav::eval
