#include "socnav/gail.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace socnav::gail {

using scenario::Outcome;

Trajectory rollout(const net::Mlp& policy, std::span<const double> theta, const scenario::ScenarioConfig& scfg,
                   const EnvConfig& env, int max_steps, Rng& rng, ActionMode mode) {
  env.validate();
  if (max_steps < 1) throw ConfigError("rollout max_steps must be >= 1");
  Trajectory traj;
  traj.scenario = scfg.id;
  traj.seed = scfg.seed;
  traj.dt = env.sfm.dt;
  traj.start = scenario::build_scenario(scfg);
  const bool have_policy = !theta.empty();
  if (mode != ActionMode::Expert && !have_policy) throw Error("rollout needs policy parameters");

  const auto expert = sfm::expert_forces(env.sfm);
  sfm::World world = traj.start;
  const double max_range = env.sensor.max_range;
  std::optional<scenario::EpisodeOutcome> first_collision;
  for (int t = 0; t < max_steps; ++t) {
    TrajectoryStep step;
    step.obs = sensing::observe(world, 0, env.sensor);
    const Vec2 heading = sfm::heading_of(world.agents[0]);

    std::optional<net::PolicyOutput> out;
    if (have_policy) out = net::policy_forward(policy, theta, sensing::network_input(step.obs, max_range));

    if (mode == ActionMode::Expert) {
      world = sfm::step(world, env.sfm, expert);
      step.action = to_body(world.agents[0].velocity, heading);
    } else {
      step.action = mode == ActionMode::Mean ? out->action_mean : net::sample_action(out->action_mean, out->log_std, rng);
      const Vec2 command = to_world(step.action, heading);
      const double dt = env.sfm.dt;
      world = sfm::step(world, env.sfm, [&](const sfm::World& w, std::size_t i) {
        if (i == 0) return (1.0 / dt) * (command - w.agents[0].velocity);
        return sfm::expert_force(w, i, env.sfm);
      });
    }
    step.logprob = out ? net::gaussian_logprob(out->action_mean, out->log_std, step.action) : 0.0;
    step.world = world;

    const auto status = scenario::episode_status(world, 0, env.goal_eps, max_steps, t + 1);
    for (const auto& [a, b] : sfm::detect_collisions(world)) step.collision = step.collision || a == 0 || b == 0;
    traj.steps.push_back(std::move(step));
    traj.outcome = status;
    if (status.kind == Outcome::GoalReached || status.kind == Outcome::Timeout) break;
    if (status.kind == Outcome::Collision) {
      if (env.sfm.collisions_terminate) break;
      if (!first_collision) first_collision = status;
    }
  }
  if (traj.outcome.kind == Outcome::Running) traj.outcome = {Outcome::Timeout, static_cast<int>(traj.steps.size())};
  // Without termination an episode that touched someone and missed its goal still counts as a collision.
  if (first_collision && traj.outcome.kind != Outcome::GoalReached) traj.outcome = *first_collision;
  return traj;
}

std::vector<double> disc_input(std::span<const double> depth, Vec2 desired_dir, Vec2 action, double max_range) {
  std::vector<double> row;
  row.reserve(depth.size() + 4);
  sensing::append_network_input(row, depth, desired_dir, max_range);
  row.push_back(action.x);
  row.push_back(action.y);
  return row;
}

net::Batch generated_pairs(std::span<const Trajectory> trajs, double max_range) {
  net::Batch b;
  for (const auto& t : trajs) {
    for (const auto& s : t.steps) b.push(disc_input(s.obs.depth, s.obs.desired_dir, s.action, max_range));
  }
  return b;
}

net::Batch expert_pairs(const dataset::Dataset& expert) {
  net::Batch b;
  const double max_range = expert.meta.env.sensor.max_range;
  for (const auto& r : expert.records) b.push(disc_input(r.depth, r.desired_force, r.action, max_range));
  return b;
}

namespace {

double sigmoid(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }
// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Accumulates mean over `batch` of f(logit), with df/dlogit.
template <typename F>
double accumulate_mean(const net::Mlp& disc, std::span<const double> omega, const net::Batch& batch, F f,
                       std::vector<double>& grad) {
  if (batch.size() == 0) throw Error("discriminator loss needs non-empty batches");
  const double n = static_cast<double>(batch.size());
  net::Mlp::Tape tape;
  double total = 0.0;
  double cot[1];
  for (std::size_t i = 0; i < batch.size(); ++i) {
    disc.forward(omega, batch.row(i), tape);
    const auto [value, slope] = f(tape.output()[0]);
    total += value / n;
    cot[0] = slope / n;
    disc.backward(omega, tape, cot, grad);
  }
  return total;
}

}  // namespace

double disc_score(const net::Mlp& disc, std::span<const double> omega, std::span<const double> input,
                  LossVariant variant) {
  const double raw = disc.forward(omega, input)[0];
  return variant == LossVariant::Wgan ? raw : sigmoid(raw);
}

bc::LossAndGrad wgan_disc_loss(const net::Mlp& disc, std::span<const double> omega, const net::Batch& gen,
                               const net::Batch& exp) {
  bc::LossAndGrad out;
  out.grad.assign(disc.param_count(), 0.0);
  out.loss = accumulate_mean(disc, omega, gen, [](double z) { return std::pair{z, 1.0}; }, out.grad);
  out.loss += accumulate_mean(disc, omega, exp, [](double z) { return std::pair{-z, -1.0}; }, out.grad);
  return out;
}

bc::LossAndGrad classic_gail_loss(const net::Mlp& disc, std::span<const double> omega, const net::Batch& gen,
                                  const net::Batch& exp) {
  bc::LossAndGrad out;
  out.grad.assign(disc.param_count(), 0.0);
  // log sigmoid(z) = -softplus(-z);  log(1 - sigmoid(z)) = -softplus(z)
  out.loss = accumulate_mean(
      disc, omega, gen, [](double z) { return std::pair{-softplus(-z), 1.0 - sigmoid(z)}; }, out.grad);
  out.loss += accumulate_mean(
      disc, omega, exp, [](double z) { return std::pair{-softplus(z), -sigmoid(z)}; }, out.grad);
  return out;
}

void clip_weights(std::span<double> omega, double bound) {
  if (!(bound > 0.0)) throw ConfigError("clip bound must be > 0");
  for (double& w : omega) w = std::clamp(w, -bound, bound);
}

std::vector<double> step_costs(const Trajectory& traj, const net::Mlp& disc, std::span<const double> omega,
                               double beta_collision, double max_range, LossVariant variant, double baseline) {
  std::vector<double> costs;
  costs.reserve(traj.steps.size());
  for (const auto& s : traj.steps) {
    const auto input = disc_input(s.obs.depth, s.obs.desired_dir, s.action, max_range);
    costs.push_back(disc_score(disc, omega, input, variant) - baseline + (s.collision ? beta_collision : 0.0));
  }
  return costs;
}

double mean_score(const net::Mlp& disc, std::span<const double> omega, const net::Batch& batch, LossVariant variant) {
  if (batch.size() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) total += disc_score(disc, omega, batch.row(i), variant);
  return total / static_cast<double>(batch.size());
}

Advantages gae_advantages(std::span<const double> rewards, std::span<const double> values, double gamma,
                          double lambda) {
  if (rewards.size() != values.size()) throw Error("gae: rewards and values differ in length");
  Advantages out;
  out.advantages.assign(rewards.size(), 0.0);
  out.returns.assign(rewards.size(), 0.0);
  double running = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    const double next_value = t + 1 < values.size() ? values[t + 1] : 0.0;
    const double delta = rewards[t] + gamma * next_value - values[t];
    running = delta + gamma * lambda * running;
    out.advantages[t] = running;
    out.returns[t] = running + values[t];
  }
  return out;
}

void normalize_advantages(std::span<double> advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  double mean = 0.0;
  for (double a : advantages) mean += a / n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean) / n;
  const double sd = std::sqrt(var);
  for (double& a : advantages) a = sd > 1e-12 ? (a - mean) / sd : a - mean;
}

bc::LossAndGrad value_loss(const net::Mlp& value, std::span<const double> params, const net::Batch& inputs,
                           std::span<const double> targets) {
  if (inputs.size() != targets.size() || targets.empty()) throw Error("value_loss: bad batch");
  bc::LossAndGrad out;
  out.grad.assign(value.param_count(), 0.0);
  const double n = static_cast<double>(targets.size());
  net::Mlp::Tape tape;
  double cot[1];
  for (std::size_t i = 0; i < targets.size(); ++i) {
    value.forward(params, inputs.row(i), tape);
    const double err = tape.output()[0] - targets[i];
    out.loss += err * err / n;
    cot[0] = 2.0 * err / n;
    value.backward(params, tape, cot, out.grad);
  }
  return out;
}

void GailConfig::validate() const {
  if (iterations < 0) throw ConfigError("gail.iterations must be >= 0");
  if (trajectories_per_iter < 1) throw ConfigError("gail.trajectories_per_iter must be >= 1");
  if (!(clip_bound > 0.0)) throw ConfigError("gail.clip_bound must be > 0");
  if (!(trpo.kl_delta > 0.0)) throw ConfigError("gail.kl_delta must be > 0");
  if (!(disc_lr > 0.0) || !(value_lr > 0.0)) throw ConfigError("gail learning rates must be > 0");
  if (disc_updates_per_iter < 0 || disc_batch < 1 || value_epochs < 0 || value_batch < 1) {
    throw ConfigError("gail batch/update counts out of range");
  }
}

namespace {

net::Batch sample_rows(const net::Batch& src, std::size_t count, Rng& rng) {
  net::Batch out;
  out.dim = src.dim;
  out.data.reserve(count * static_cast<std::size_t>(src.dim));
  for (std::size_t k = 0; k < count; ++k) {
    const auto r = src.row(rng.index(src.size()));
    out.data.insert(out.data.end(), r.begin(), r.end());
  }
  return out;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

GailResult train_gail(const net::NetworkSpec& policy_spec, const net::ParamVector& bc_params,
                      const dataset::Dataset& expert, const GailConfig& cfg, const EnvConfig& env) {
  cfg.validate();
  env.validate();
  if (expert.records.empty()) throw Error("train_gail needs a non-empty expert dataset");
  if (!(expert.meta.env.sensor == env.sensor)) throw ConfigError("expert dataset sensor differs from environment");

  const net::Mlp policy(policy_spec);
  if (bc_params.size() != policy.param_count()) throw Error("initial policy does not match its spec");
  const int obs_dim = sensing::input_dim(env.sensor);

  GailResult result;
  result.policy_spec = policy_spec;
  result.disc_spec = net::scalar_spec(obs_dim + 2, cfg.disc_hidden);
  result.value_spec = net::scalar_spec(obs_dim, cfg.value_hidden);
  const net::Mlp disc(result.disc_spec);
  const net::Mlp value(result.value_spec);
  result.policy = bc_params;
  result.disc = net::init_params(result.disc_spec, derive_seed(cfg.seed, 2));
  if (cfg.loss_variant == LossVariant::Wgan) {
    Rng init(derive_seed(cfg.seed, 3));
    for (double& w : result.disc.values) w = init.uniform(-cfg.clip_bound, cfg.clip_bound);
  }
  result.value = net::init_params(result.value_spec, derive_seed(cfg.seed, 4));

  const net::Batch expert_batch = expert_pairs(expert);
  const double max_range = env.sensor.max_range;
  bc::RmsPropState disc_state, value_state;
  Rng rng(derive_seed(cfg.seed, 5));

  for (int it = 0; it < cfg.iterations; ++it) {
    IterationDiagnostics diag;
    diag.iteration = it;

    // Each trajectory comes from an independently drawn scenario.
    std::vector<Trajectory> trajs;
    for (int k = 0; k < cfg.trajectories_per_iter; ++k) {
      const auto id = scenario::kAllScenarios[rng.index(scenario::kScenarioCount)];
      const std::uint64_t seed = rng.next();
      Rng sampler(derive_seed(seed, 7));
      trajs.push_back(rollout(policy, result.policy.values, scenario::make_scenario_config(id, seed, env.noise_scale),
                              env, env.max_steps, sampler, ActionMode::Sample));
      diag.scenarios.push_back(id);
    }
    diag.trajectories = static_cast<int>(trajs.size());
    for (const auto& t : trajs) {
      diag.goal_rate += t.outcome.kind == Outcome::GoalReached ? 1.0 : 0.0;
      diag.collision_rate += t.outcome.kind == Outcome::Collision ? 1.0 : 0.0;
    }
    diag.goal_rate /= static_cast<double>(trajs.size());
    diag.collision_rate /= static_cast<double>(trajs.size());

    // Critic: ascend the adversarial objective, then clip.
    const net::Batch gen_batch = generated_pairs(trajs, max_range);
    diag.samples = gen_batch.size();
    const std::size_t mb = std::min<std::size_t>(static_cast<std::size_t>(cfg.disc_batch), gen_batch.size());
    for (int u = 0; u < cfg.disc_updates_per_iter; ++u) {
      const auto gen = sample_rows(gen_batch, mb, rng);
      const auto exp = sample_rows(expert_batch, mb, rng);
      auto lg = cfg.loss_variant == LossVariant::Wgan ? wgan_disc_loss(disc, result.disc.values, gen, exp)
                                                      : classic_gail_loss(disc, result.disc.values, gen, exp);
      diag.disc_loss += lg.loss / cfg.disc_updates_per_iter;
      for (double& g : lg.grad) g = -g;
      bc::rmsprop_step(result.disc.values, lg.grad, disc_state, cfg.disc_lr);
      if (cfg.loss_variant == LossVariant::Wgan) clip_weights(result.disc.values, cfg.clip_bound);
      diag.disc_max_abs_after_update.push_back(max_abs(result.disc.values));
    }

    // Costs under the updated critic, advantages from the current value net.
    PolicyBatch batch;
    std::vector<double> returns;
    double cost_sum = 0.0;
    const double baseline =
        cfg.anchor_costs ? mean_score(disc, result.disc.values, expert_batch, cfg.loss_variant) : 0.0;
    for (const auto& t : trajs) {
      const auto costs =
          step_costs(t, disc, result.disc.values, cfg.collision_cost_beta, max_range, cfg.loss_variant, baseline);
      std::vector<double> rewards(costs.size()), values(costs.size());
      for (std::size_t s = 0; s < costs.size(); ++s) {
        cost_sum += costs[s];
        rewards[s] = -costs[s];
        const auto input = sensing::network_input(t.steps[s].obs, max_range);
        values[s] = value.forward(result.value.values, input)[0];
        batch.states.push(input);
        batch.actions.push_back(t.steps[s].action);
        batch.old_logprobs.push_back(t.steps[s].logprob);
      }
      const auto adv = gae_advantages(rewards, values, cfg.gamma, cfg.gae_lambda);
      batch.advantages.insert(batch.advantages.end(), adv.advantages.begin(), adv.advantages.end());
      returns.insert(returns.end(), adv.returns.begin(), adv.returns.end());
    }
    diag.mean_cost = cost_sum / static_cast<double>(batch.size());
    normalize_advantages(batch.advantages);

    // Value regression on the returns.
    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), 0);
    for (int e = 0; e < cfg.value_epochs; ++e) {
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.value_batch)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.value_batch));
        net::Batch inputs;
        std::vector<double> targets;
        for (std::size_t k = start; k < end; ++k) {
          inputs.push(batch.states.row(order[k]));
          targets.push_back(returns[order[k]]);
        }
        const auto lg = value_loss(value, result.value.values, inputs, targets);
        bc::rmsprop_step(result.value.values, lg.grad, value_state, cfg.value_lr);
      }
    }

    const auto step = trpo_step(policy, result.policy, batch, cfg.trpo);
    result.policy = step.params;
    diag.accepted = step.accepted;
    diag.kl = step.kl;
    diag.surrogate_improvement = step.improvement;
    result.diagnostics.push_back(std::move(diag));
  }
  return result;
}

std::string diagnostics_csv(const std::vector<IterationDiagnostics>& diagnostics) {
  std::string out = "iteration,disc_loss,mean_cost,kl,surrogate_improvement,goal_rate,collision_rate\n";
  for (const auto& d : diagnostics) {
    out += std::to_string(d.iteration) + ',' + format_double(d.disc_loss) + ',' + format_double(d.mean_cost) + ',' +
           format_double(d.kl) + ',' + format_double(d.surrogate_improvement) + ',' + format_double(d.goal_rate) +
           ',' + format_double(d.collision_rate) + '\n';
  }
  return out;
}

}  // namespace socnav::gail
