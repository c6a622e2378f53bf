#include "socnav/config.hpp"

#include "io.hpp"

namespace socnav {

using nlohmann::json;

void Config::validate() const {
  env.validate();
  bc.validate();
  gail.validate();
  eval.validate();
  if (total_pairs < 1) throw ConfigError("total_pairs must be >= 1");
  if (eval_count > total_pairs) throw ConfigError("eval_count must not exceed total_pairs");
}

dataset::DatasetConfig Config::dataset_config() const { return {total_pairs, seed, env, timestamp}; }

bc::BcConfig Config::bc_config() const {
  auto c = bc;
  c.seed = derive_seed(seed, 2);
  return c;
}

gail::GailConfig Config::gail_config() const {
  auto c = gail;
  c.seed = derive_seed(seed, 3);
  return c;
}

namespace {

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

gail::LossVariant parse_variant(const std::string& s) {
  if (s == "wgan") return gail::LossVariant::Wgan;
  if (s == "classic") return gail::LossVariant::ClassicGan;
  throw ConfigError("gail.loss_variant must be 'wgan' or 'classic'");
}

}  // namespace

Config parse_config(std::string_view text) {
  Config cfg;
  try {
    const json j = json::parse(text);
    io::check_keys(j, {"seed", "env", "dataset", "bc", "gail", "eval"}, "config");
    take(j, "seed", cfg.seed);
    if (j.contains("env")) cfg.env = io::env_from_json(j["env"]);
    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      io::check_keys(d, {"total_pairs", "eval_count", "timestamp"}, "dataset");
      take(d, "total_pairs", cfg.total_pairs);
      take(d, "eval_count", cfg.eval_count);
      take(d, "timestamp", cfg.timestamp);
    }
    if (j.contains("bc")) {
      const auto& b = j["bc"];
      io::check_keys(b,
                     {"learning_rate", "decay_factor", "decay_every_epochs", "epochs", "batch_size", "w_action",
                      "w_force", "hidden", "init_log_std"},
                     "bc");
      take(b, "learning_rate", cfg.bc.learning_rate);
      take(b, "decay_factor", cfg.bc.decay_factor);
      take(b, "decay_every_epochs", cfg.bc.decay_every_epochs);
      take(b, "epochs", cfg.bc.epochs);
      take(b, "batch_size", cfg.bc.batch_size);
      take(b, "w_action", cfg.bc.w_action);
      take(b, "w_force", cfg.bc.w_force);
      take(b, "hidden", cfg.bc.hidden);
      take(b, "init_log_std", cfg.bc.init_log_std);
    }
    if (j.contains("gail")) {
      const auto& g = j["gail"];
      io::check_keys(g,
                     {"iterations", "trajectories_per_iter", "disc_lr", "clip_bound", "gamma", "gae_lambda",
                      "collision_cost_beta", "disc_updates_per_iter", "disc_batch", "value_lr", "value_epochs",
                      "value_batch", "disc_hidden", "value_hidden", "loss_variant", "anchor_costs", "kl_delta", "damping",
                      "cg_iters", "cg_tol", "backtrack_steps", "backtrack_factor", "entropy_coeff"},
                     "gail");
      auto& c = cfg.gail;
      take(g, "iterations", c.iterations);
      take(g, "trajectories_per_iter", c.trajectories_per_iter);
      take(g, "disc_lr", c.disc_lr);
      take(g, "clip_bound", c.clip_bound);
      take(g, "gamma", c.gamma);
      take(g, "gae_lambda", c.gae_lambda);
      take(g, "collision_cost_beta", c.collision_cost_beta);
      take(g, "disc_updates_per_iter", c.disc_updates_per_iter);
      take(g, "disc_batch", c.disc_batch);
      take(g, "value_lr", c.value_lr);
      take(g, "value_epochs", c.value_epochs);
      take(g, "value_batch", c.value_batch);
      take(g, "disc_hidden", c.disc_hidden);
      take(g, "value_hidden", c.value_hidden);
      take(g, "anchor_costs", c.anchor_costs);
      if (g.contains("loss_variant")) c.loss_variant = parse_variant(g["loss_variant"].get<std::string>());
      take(g, "kl_delta", c.trpo.kl_delta);
      take(g, "damping", c.trpo.damping);
      take(g, "cg_iters", c.trpo.cg_iters);
      take(g, "cg_tol", c.trpo.cg_tol);
      take(g, "backtrack_steps", c.trpo.backtrack_steps);
      take(g, "backtrack_factor", c.trpo.backtrack_factor);
      take(g, "entropy_coeff", c.trpo.entropy_coeff);
    }
    if (j.contains("eval")) {
      const auto& e = j["eval"];
      io::check_keys(e, {"episodes", "base_seed", "deterministic", "scenarios"}, "eval");
      take(e, "episodes", cfg.eval.episodes);
      take(e, "base_seed", cfg.eval.base_seed);
      take(e, "deterministic", cfg.eval.deterministic);
      if (e.contains("scenarios")) {
        cfg.eval.scenarios.clear();
        for (const auto& name : e["scenarios"].get<std::vector<std::string>>()) {
          const auto id = scenario::parse_scenario(name);
          if (!id) throw ConfigError("unknown scenario '" + name + "' in eval.scenarios");
          cfg.eval.scenarios.push_back(*id);
        }
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

Config load_config(const std::string& path) {
  try {
    return parse_config(io::read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string format_config(const Config& cfg) {
  const auto& g = cfg.gail;
  json scen = json::array();
  for (auto id : cfg.eval.scenarios) scen.push_back(std::string(scenario::name_of(id)));
  json env = io::env_to_json(cfg.env);
  env["sensor"].erase("half_angle");
  env["sensor"]["half_angle_deg"] = cfg.env.sensor.half_angle * 180.0 / kPi;
  const json j = {
      {"seed", cfg.seed},
      {"env", env},
      {"dataset", {{"total_pairs", cfg.total_pairs}, {"eval_count", cfg.eval_count}, {"timestamp", cfg.timestamp}}},
      {"bc",
       {{"learning_rate", cfg.bc.learning_rate},
        {"decay_factor", cfg.bc.decay_factor},
        {"decay_every_epochs", cfg.bc.decay_every_epochs},
        {"epochs", cfg.bc.epochs},
        {"batch_size", cfg.bc.batch_size},
        {"w_action", cfg.bc.w_action},
        {"w_force", cfg.bc.w_force},
        {"hidden", cfg.bc.hidden},
        {"init_log_std", cfg.bc.init_log_std}}},
      {"gail",
       {{"iterations", g.iterations},
        {"trajectories_per_iter", g.trajectories_per_iter},
        {"disc_lr", g.disc_lr},
        {"clip_bound", g.clip_bound},
        {"gamma", g.gamma},
        {"gae_lambda", g.gae_lambda},
        {"collision_cost_beta", g.collision_cost_beta},
        {"disc_updates_per_iter", g.disc_updates_per_iter},
        {"disc_batch", g.disc_batch},
        {"value_lr", g.value_lr},
        {"value_epochs", g.value_epochs},
        {"value_batch", g.value_batch},
        {"disc_hidden", g.disc_hidden},
        {"value_hidden", g.value_hidden},
        {"loss_variant", g.loss_variant == gail::LossVariant::Wgan ? "wgan" : "classic"},
        {"anchor_costs", g.anchor_costs},
        {"kl_delta", g.trpo.kl_delta},
        {"damping", g.trpo.damping},
        {"cg_iters", g.trpo.cg_iters},
        {"cg_tol", g.trpo.cg_tol},
        {"backtrack_steps", g.trpo.backtrack_steps},
        {"backtrack_factor", g.trpo.backtrack_factor},
        {"entropy_coeff", g.trpo.entropy_coeff}}},
      {"eval",
       {{"episodes", cfg.eval.episodes},
        {"base_seed", cfg.eval.base_seed},
        {"deterministic", cfg.eval.deterministic},
        {"scenarios", scen}}},
  };
  return j.dump(2) + "\n";
}

}  // namespace socnav
