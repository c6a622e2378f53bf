#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socnav/bc.hpp"
#include "socnav/dataset.hpp"
#include "socnav/env.hpp"
#include "socnav/net.hpp"
#include "socnav/trpo.hpp"

// Adversarial imitation across interleaved social scenarios: a weight-clipped
// critic scores (observation, action) pairs as costs and the policy follows
// trust-region updates against those costs.
namespace socnav::gail {

struct TrajectoryStep {
  sensing::Observation obs;
  Vec2 action;          // body frame, m/s
  double logprob = 0.0;
  sfm::World world;     // state after the action
  bool collision = false;

  friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

struct Trajectory {
  std::string label;  // free-form tag without whitespace ("bc", "gail", "expert")
  scenario::ScenarioId scenario = scenario::ScenarioId::Passing;
  std::uint64_t seed = 0;
  double dt = 0.05;
  sfm::World start;
  std::vector<TrajectoryStep> steps;
  scenario::EpisodeOutcome outcome;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

enum class ActionMode {
  Sample,  // stochastic policy
  Mean,    // policy mean, no sampling
  Expert,  // full social-force expert drives agent 0
};

// Agent 0 follows the controller; pedestrians follow the social force model.
// In Expert mode `theta` may be empty, in which case logprob is 0.
Trajectory rollout(const net::Mlp& policy, std::span<const double> theta, const scenario::ScenarioConfig& scfg,
                   const EnvConfig& env, int max_steps, Rng& rng, ActionMode mode = ActionMode::Sample);

// Observation network input followed by the action.
std::vector<double> disc_input(std::span<const double> depth, Vec2 desired_dir, Vec2 action, double max_range);
net::Batch generated_pairs(std::span<const Trajectory> trajs, double max_range);
net::Batch expert_pairs(const dataset::Dataset& expert);

enum class LossVariant { Wgan, ClassicGan };

// Raw critic value under Wgan; sigmoid of it under ClassicGan.
double disc_score(const net::Mlp& disc, std::span<const double> omega, std::span<const double> input,
                  LossVariant variant = LossVariant::Wgan);

// E_gen[D] - E_exp[D]; the trainer ascends it so generated pairs score high.
bc::LossAndGrad wgan_disc_loss(const net::Mlp& disc, std::span<const double> omega, const net::Batch& gen,
                               const net::Batch& exp);

// E_gen[log D] + E_exp[log(1 - D)] with D = sigmoid(logit), computed from logits.
bc::LossAndGrad classic_gail_loss(const net::Mlp& disc, std::span<const double> omega, const net::Batch& gen,
                                  const net::Batch& exp);

void clip_weights(std::span<double> omega, double bound);

// c_t = D(s_t, a_t) - baseline + beta * [collision at t].
std::vector<double> step_costs(const Trajectory& traj, const net::Mlp& disc, std::span<const double> omega,
                               double beta_collision, double max_range, LossVariant variant = LossVariant::Wgan,
                               double baseline = 0.0);

// Mean disc_score over a batch, 0 for an empty batch.
double mean_score(const net::Mlp& disc, std::span<const double> omega, const net::Batch& batch,
                  LossVariant variant = LossVariant::Wgan);

struct Advantages {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Values for each step; the value after the last step is taken as 0.
Advantages gae_advantages(std::span<const double> rewards, std::span<const double> values, double gamma,
                          double lambda);
void normalize_advantages(std::span<double> advantages);

// mean (V(s) - target)^2
bc::LossAndGrad value_loss(const net::Mlp& value, std::span<const double> params, const net::Batch& inputs,
                           std::span<const double> targets);

struct GailConfig {
  int iterations = 50;
  int trajectories_per_iter = 3;
  double disc_lr = 5e-5;
  double clip_bound = 0.01;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double collision_cost_beta = 10.0;
  int disc_updates_per_iter = 5;
  int disc_batch = 64;
  double value_lr = 1e-3;
  int value_epochs = 5;
  int value_batch = 64;
  std::vector<int> disc_hidden{64, 64};
  std::vector<int> value_hidden{64, 64};
  std::uint64_t seed = 0;
  LossVariant loss_variant = LossVariant::Wgan;
  // Subtract the critic's mean expert score from every cost. The critic
  // objective ignores constant offsets, and an offset acts as a per-step
  // bonus or penalty that rewards long or short episodes.
  bool anchor_costs = true;
  TrpoConfig trpo;  // kl_delta, entropy_coeff, CG and line-search settings

  void validate() const;
};

struct IterationDiagnostics {
  int iteration = 0;
  double disc_loss = 0.0;  // mean over this iteration's critic updates
  double mean_cost = 0.0;
  double kl = 0.0;          // of the accepted step, 0 when rejected
  double surrogate_improvement = 0.0;
  double goal_rate = 0.0;
  double collision_rate = 0.0;
  int trajectories = 0;
  std::size_t samples = 0;
  bool accepted = false;
  std::vector<scenario::ScenarioId> scenarios;
  std::vector<double> disc_max_abs_after_update;  // one entry per critic update
};

struct GailResult {
  net::NetworkSpec policy_spec;
  net::NetworkSpec disc_spec;
  net::NetworkSpec value_spec;
  net::ParamVector policy;
  net::ParamVector disc;
  net::ParamVector value;
  std::vector<IterationDiagnostics> diagnostics;
};

GailResult train_gail(const net::NetworkSpec& policy_spec, const net::ParamVector& bc_params,
                      const dataset::Dataset& expert, const GailConfig& cfg, const EnvConfig& env);

std::string diagnostics_csv(const std::vector<IterationDiagnostics>& diagnostics);

}  // namespace socnav::gail
