#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "socnav/gail.hpp"
#include "test_util.hpp"

using namespace socnav;
using namespace socnav::gail;
using socnav::testing::numeric_gradient;
using socnav::testing::random_vector;
using socnav::testing::relative_error;

namespace {

net::Batch random_batch(std::size_t rows, int dim, std::uint64_t seed, double shift = 0.0) {
  net::Batch b;
  Rng rng(seed);
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> r(static_cast<std::size_t>(dim));
    for (auto& x : r) x = rng.uniform(-1, 1) + shift;
    b.push(r);
  }
  return b;
}

PolicyBatch random_policy_batch(const net::Mlp& policy, std::span<const double> theta, std::size_t n,
                                std::uint64_t seed) {
  PolicyBatch pb;
  pb.states = random_batch(n, policy.spec().input_dim, seed);
  Rng rng(seed + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto out = net::policy_forward(policy, theta, pb.states.row(i));
    const Vec2 a = net::sample_action(out.action_mean, out.log_std, rng);
    pb.actions.push_back(a);
    pb.old_logprobs.push_back(net::gaussian_logprob(out.action_mean, out.log_std, a) + rng.uniform(-0.2, 0.2));
    pb.advantages.push_back(rng.uniform(-1, 1));
  }
  return pb;
}

EnvConfig short_env(int max_steps = 40) {
  EnvConfig env;
  env.sensor.n_rays = 5;
  env.max_steps = max_steps;
  return env;
}

}  // namespace

TEST(Critic, ZeroWeightsScoreZero) {
  const net::Mlp d(net::scalar_spec(4, {3}));
  const std::vector<double> zero(d.param_count(), 0.0);
  EXPECT_EQ(disc_score(d, zero, std::vector<double>{1, 2, 3, 4}), 0.0);
  EXPECT_EQ(disc_score(d, zero, std::vector<double>{1, 2, 3, 4}, LossVariant::ClassicGan), 0.5);
}

TEST(WganLoss, ConstantCriticAndEqualBatches) {
  const net::Mlp d(net::scalar_spec(3, {4}));
  std::vector<double> w(d.param_count(), 0.0);
  w.back() = 0.37;  // output bias
  const auto gen = random_batch(10, 3, 1), exp = random_batch(7, 3, 2);
  EXPECT_NEAR(wgan_disc_loss(d, w, gen, exp).loss, 0.0, 1e-15);
  const auto p = random_vector(d.param_count(), 3);
  EXPECT_NEAR(wgan_disc_loss(d, p, gen, gen).loss, 0.0, 1e-15);
}

TEST(WganLoss, GradientMatchesFiniteDifferences) {
  const net::Mlp d(net::scalar_spec(4, {6, 5}));
  ASSERT_LE(d.param_count(), 200u);
  const auto p = random_vector(d.param_count(), 4, 0.7);
  const auto gen = random_batch(9, 4, 5), exp = random_batch(11, 4, 6, 0.3);
  const auto lg = wgan_disc_loss(d, p, gen, exp);
  const auto fd = numeric_gradient([&](std::span<const double> q) { return wgan_disc_loss(d, q, gen, exp).loss; }, p);
  EXPECT_LT(relative_error(lg.grad, fd), 1e-4);
}

TEST(ClassicLoss, HalfEverywhere) {
  const net::Mlp d(net::scalar_spec(3, {2}));
  const std::vector<double> zero(d.param_count(), 0.0);
  const auto loss = classic_gail_loss(d, zero, random_batch(4, 3, 1), random_batch(5, 3, 2)).loss;
  EXPECT_NEAR(loss, -1.386294, 1e-6);
  EXPECT_NEAR(loss, 2.0 * std::log(0.5), 1e-15);
}

TEST(ClassicLoss, GradientMatchesFiniteDifferences) {
  const net::Mlp d(net::scalar_spec(4, {6, 5}));
  const auto p = random_vector(d.param_count(), 7, 0.7);
  const auto gen = random_batch(9, 4, 8), exp = random_batch(11, 4, 9, 0.3);
  const auto lg = classic_gail_loss(d, p, gen, exp);
  const auto fd =
      numeric_gradient([&](std::span<const double> q) { return classic_gail_loss(d, q, gen, exp).loss; }, p);
  EXPECT_LT(relative_error(lg.grad, fd), 1e-4);
}

TEST(ClassicLoss, SaturatedLogitsStayFinite) {
  const net::Mlp d(net::scalar_spec(1, {}));
  for (double bias : {-30.0, 30.0}) {
    const std::vector<double> w{0.0, bias};
    const auto lg = classic_gail_loss(d, w, random_batch(3, 1, 1), random_batch(3, 1, 2));
    EXPECT_TRUE(std::isfinite(lg.loss));
    for (double g : lg.grad) EXPECT_TRUE(std::isfinite(g));
  }
}

TEST(Clip, Examples) {
  std::vector<double> w{0.05, -0.2, 0.005, -0.01};
  clip_weights(w, 0.01);
  EXPECT_EQ(w, (std::vector<double>{0.01, -0.01, 0.005, -0.01}));
  EXPECT_THROW(clip_weights(w, 0.0), ConfigError);
}

TEST(Critic, AscentScoresGeneratedAboveExpert) {
  const net::Mlp d(net::scalar_spec(4, {8}));
  auto w = random_vector(d.param_count(), 10, 0.01);
  const auto gen = random_batch(64, 4, 11, 0.8), exp = random_batch(64, 4, 12, -0.8);
  bc::RmsPropState state;
  for (int i = 0; i < 5; ++i) {
    auto lg = wgan_disc_loss(d, w, gen, exp);
    for (double& g : lg.grad) g = -g;
    bc::rmsprop_step(w, lg.grad, state, 5e-5);
    clip_weights(w, 0.01);
  }
  EXPECT_GT(mean_score(d, w, gen), mean_score(d, w, exp));
}

TEST(Gae, TelescopingAndGeometricSums) {
  const auto a = gae_advantages(std::vector<double>{1, 1, 1}, std::vector<double>{0, 0, 0}, 0.5, 1.0);
  EXPECT_EQ(a.returns, (std::vector<double>{1.75, 1.5, 1.0}));

  const std::vector<double> r{0.3, -1.0, 2.0, 0.5}, v{0.1, 0.4, -0.2, 0.7};
  const auto z = gae_advantages(r, v, 0.9, 0.0);
  for (std::size_t t = 0; t < r.size(); ++t) {
    const double next = t + 1 < v.size() ? v[t + 1] : 0.0;
    EXPECT_NEAR(z.advantages[t], r[t] + 0.9 * next - v[t], 1e-15);
  }
  const auto zero = gae_advantages(std::vector<double>(5, 0.0), std::vector<double>(5, 0.0), 0.99, 0.95);
  for (double x : zero.advantages) EXPECT_EQ(x, 0.0);
}

TEST(Gae, NormalizeToZeroMeanUnitVariance) {
  std::vector<double> a{1, 2, 3, 4, 10};
  normalize_advantages(a);
  double m = 0, s = 0;
  for (double x : a) m += x / 5;
  for (double x : a) s += (x - m) * (x - m) / 5;
  EXPECT_NEAR(m, 0.0, 1e-14);
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(ValueLoss, GradientMatchesFiniteDifferences) {
  const net::Mlp v(net::scalar_spec(4, {6, 5}));
  const auto p = random_vector(v.param_count(), 13, 0.7);
  const auto x = random_batch(10, 4, 14);
  const auto y = random_vector(10, 15, 2.0);
  const auto lg = value_loss(v, p, x, y);
  const auto fd = numeric_gradient([&](std::span<const double> q) { return value_loss(v, q, x, y).loss; }, p);
  EXPECT_LT(relative_error(lg.grad, fd), 1e-4);
}

TEST(Surrogate, GradientMatchesFiniteDifferences) {
  const net::Mlp pol(net::policy_spec(4, {5, 4}));
  ASSERT_LE(pol.param_count(), 200u);
  auto theta = random_vector(pol.param_count(), 16, 0.6);
  theta[theta.size() - 2] = -0.4;
  theta[theta.size() - 1] = -0.9;
  const auto batch = random_policy_batch(pol, theta, 12, 17);
  for (double coeff : {0.0, 0.05}) {
    const auto lg = surrogate(pol, theta, batch, coeff);
    const auto fd = numeric_gradient([&](std::span<const double> q) { return surrogate(pol, q, batch, coeff).loss; },
                                     theta);
    EXPECT_LT(relative_error(lg.grad, fd), 1e-4);
  }
}

TEST(Fisher, ZeroVectorAndSymmetry) {
  const net::Mlp pol(net::policy_spec(3, {4}));
  auto theta = random_vector(pol.param_count(), 18, 0.7);
  theta[theta.size() - 2] = -0.5;
  const auto states = random_batch(8, 3, 19);
  for (double x : fisher_vector_product(pol, theta, states, std::vector<double>(theta.size(), 0.0), 0.1)) {
    EXPECT_EQ(x, 0.0);
  }
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto u = random_vector(theta.size(), 100 + s), v = random_vector(theta.size(), 200 + s);
    const auto fu = fisher_vector_product(pol, theta, states, u, 0.1);
    const auto fv = fisher_vector_product(pol, theta, states, v, 0.1);
    double a = 0, b = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      a += v[i] * fu[i];
      b += u[i] * fv[i];
    }
    EXPECT_NEAR(a, b, 1e-8);
  }
}

TEST(Fisher, MatchesDenseKlHessianOnTenParameterNet) {
  net::NetworkSpec spec;
  spec.input_dim = 3;
  spec.hidden = {};
  spec.heads = {2};
  spec.extra_params = 2;
  ASSERT_EQ(spec.param_count(), 10u);
  const net::Mlp pol(spec);
  auto theta = random_vector(10, 20, 0.8);
  theta[8] = -0.3;
  theta[9] = 0.2;
  const auto states = random_batch(6, 3, 21);

  // Dense Hessian of theta -> mean_kl(theta0, theta) at theta0 by central differences.
  const double h = 1e-4;
  Eigen::MatrixXd hess(10, 10);
  auto kl_at = [&](int i, double di, int j, double dj) {
    auto q = theta;
    q[static_cast<std::size_t>(i)] += di;
    q[static_cast<std::size_t>(j)] += dj;
    return mean_kl(pol, theta, q, states);
  };
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      hess(i, j) = (kl_at(i, h, j, h) - kl_at(i, h, j, -h) - kl_at(i, -h, j, h) + kl_at(i, -h, j, -h)) / (4 * h * h);
    }
  }
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto v = random_vector(10, 300 + s);
    const auto fv = fisher_vector_product(pol, theta, states, v, 0.0);
    const Eigen::VectorXd hv = hess * Eigen::Map<const Eigen::VectorXd>(v.data(), 10);
    EXPECT_LT(relative_error(fv, std::span<const double>(hv.data(), 10)), 1e-3);
  }
}

TEST(ConjugateGradient, ZeroAndIdentity) {
  const LinearOperator identity = [](std::span<const double> v) { return std::vector<double>(v.begin(), v.end()); };
  EXPECT_EQ(conjugate_gradient(identity, std::vector<double>(4, 0.0)), std::vector<double>(4, 0.0));
  const std::vector<double> b{1.5, -2.0, 0.25};
  const auto x = conjugate_gradient(identity, b, 1);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(x[i], b[i], 1e-15);
}

TEST(ConjugateGradient, MatchesDenseSolve) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = random_vector(64, 400 + seed);
    const Eigen::MatrixXd m = Eigen::Map<const Eigen::MatrixXd>(r.data(), 8, 8);
    const Eigen::MatrixXd a = m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(8, 8);
    const auto bv = random_vector(8, 500 + seed);
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(bv.data(), 8);
    const Eigen::VectorXd direct = a.ldlt().solve(b);
    const LinearOperator apply = [&](std::span<const double> v) {
      const Eigen::VectorXd y = a * Eigen::Map<const Eigen::VectorXd>(v.data(), 8);
      return std::vector<double>(y.data(), y.data() + 8);
    };
    const auto x = conjugate_gradient(apply, bv, 10, 1e-20);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(x[static_cast<std::size_t>(i)], direct(i), 1e-6);
  }
}

TEST(Trpo, ZeroAdvantagesKeepPolicy) {
  const net::Mlp pol(net::policy_spec(3, {4}));
  const auto theta = net::init_params(pol.spec(), 1, -1.0);
  auto batch = random_policy_batch(pol, theta.values, 10, 22);
  std::fill(batch.advantages.begin(), batch.advantages.end(), 0.0);
  const auto r = trpo_step(pol, theta, batch, TrpoConfig{});
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.params, theta);
}

TEST(Trpo, AcceptedStepsRespectTrustRegion) {
  const net::Mlp pol(net::policy_spec(3, {6}));
  int accepted = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto theta = net::init_params(pol.spec(), s, -0.8);
    auto batch = random_policy_batch(pol, theta.values, 40, 600 + s);
    normalize_advantages(batch.advantages);
    TrpoConfig cfg;
    const auto r = trpo_step(pol, theta, batch, cfg);
    if (!r.accepted) continue;
    ++accepted;
    EXPECT_LE(mean_kl(pol, theta.values, r.params.values, batch.states), cfg.kl_delta);
    EXPECT_GT(r.improvement, 0.0);
  }
  EXPECT_GT(accepted, 0);
}

TEST(Trpo, BanditMeanMovesTowardPositiveAdvantage) {
  // One constant state; actions on both sides of 0, advantage +1 exactly for a > 0.
  net::NetworkSpec spec = net::policy_spec(1, {});
  const net::Mlp pol(spec);
  std::vector<double> theta(pol.param_count(), 0.0);
  theta[theta.size() - 2] = theta[theta.size() - 1] = 0.0;
  PolicyBatch b;
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    b.states.push(std::vector<double>{1.0});
    const Vec2 a{rng.normal(), rng.normal()};
    b.actions.push_back(a);
    b.old_logprobs.push_back(net::gaussian_logprob({0, 0}, {0, 0}, a));
    b.advantages.push_back(a.x > 0 ? 1.0 : 0.0);
  }
  const net::ParamVector start{theta, spec.hash()};
  const auto r = trpo_step(pol, start, b, TrpoConfig{});
  ASSERT_TRUE(r.accepted);
  const auto mean = pol.forward(r.params.values, std::vector<double>{1.0});
  EXPECT_GT(mean[0], 0.0);
}

TEST(Rollout, LengthOneAndDeterministic) {
  const auto env = short_env();
  const net::Mlp pol(net::policy_spec(sensing::input_dim(env.sensor), {8}));
  const auto theta = net::init_params(pol.spec(), 2, -1.2);
  const auto scfg = scenario::make_scenario_config(scenario::ScenarioId::Crossing, 5, 0.3);
  Rng r1(9);
  EXPECT_EQ(rollout(pol, theta.values, scfg, env, 1, r1).steps.size(), 1u);
  Rng a(9), b(9);
  const auto ta = rollout(pol, theta.values, scfg, env, 30, a);
  const auto tb = rollout(pol, theta.values, scfg, env, 30, b);
  EXPECT_EQ(ta, tb);
  EXPECT_EQ(ta.start, scenario::build_scenario(scfg));
}

TEST(Rollout, LogprobsMatchSamplingPolicy) {
  const auto env = short_env();
  const net::Mlp pol(net::policy_spec(sensing::input_dim(env.sensor), {8}));
  const auto theta = net::init_params(pol.spec(), 3, -1.0);
  Rng rng(4);
  const auto t = rollout(pol, theta.values, scenario::make_scenario_config(scenario::ScenarioId::Passing, 1, 0.3), env,
                         25, rng);
  for (const auto& s : t.steps) {
    const auto out = net::policy_forward(pol, theta.values, sensing::network_input(s.obs, env.sensor.max_range));
    EXPECT_EQ(net::gaussian_logprob(out.action_mean, out.log_std, s.action), s.logprob);
  }
}

TEST(Rollout, CommandedVelocityIsExecuted) {
  const auto env = short_env();
  const net::Mlp pol(net::policy_spec(sensing::input_dim(env.sensor), {4}));
  const auto theta = net::init_params(pol.spec(), 7, -1.0);
  Rng rng(5);
  const auto t = rollout(pol, theta.values, scenario::make_scenario_config(scenario::ScenarioId::Crossing, 2, 0.0), env,
                         10, rng, ActionMode::Mean);
  sfm::World prev = t.start;
  for (const auto& s : t.steps) {
    const Vec2 heading = sfm::heading_of(prev.agents[0]);
    const Vec2 expect = to_world(s.action, heading);
    if (norm(expect) <= prev.agents[0].max_speed) {
      EXPECT_NEAR(s.world.agents[0].velocity.x, expect.x, 1e-12);
      EXPECT_NEAR(s.world.agents[0].velocity.y, expect.y, 1e-12);
    }
    prev = s.world;
  }
}

TEST(Rollout, ExpertPassingReachesGoal) {
  EnvConfig env;
  const net::Mlp unused(net::scalar_spec(1, {}));
  Rng rng(0);
  const auto t = rollout(unused, {}, scenario::make_scenario_config(scenario::ScenarioId::Passing, 0, 0.0), env,
                         env.max_steps, rng, ActionMode::Expert);
  EXPECT_EQ(t.outcome.kind, scenario::Outcome::GoalReached);
}

TEST(StepCosts, ZeroCriticAndCollisionPenalty) {
  const auto env = short_env();
  const net::Mlp pol(net::policy_spec(sensing::input_dim(env.sensor), {4}));
  const auto theta = net::init_params(pol.spec(), 1, -1.0);
  Rng rng(1);
  auto t = rollout(pol, theta.values, scenario::make_scenario_config(scenario::ScenarioId::Passing, 3, 0.3), env, 12,
                   rng);
  const net::Mlp disc(net::scalar_spec(sensing::input_dim(env.sensor) + 2, {4}));
  const std::vector<double> zero(disc.param_count(), 0.0);
  for (double c : step_costs(t, disc, zero, 10.0, env.sensor.max_range)) EXPECT_EQ(c, 0.0);
  t.steps.back().collision = true;
  const auto costs = step_costs(t, disc, zero, 10.0, env.sensor.max_range);
  EXPECT_EQ(costs.back(), 10.0);
  for (std::size_t i = 0; i + 1 < costs.size(); ++i) EXPECT_EQ(costs[i], 0.0);
  EXPECT_EQ(step_costs(t, disc, zero, 10.0, env.sensor.max_range), costs);
}

namespace {

dataset::Dataset tiny_expert(const EnvConfig& env) {
  dataset::DatasetConfig c;
  c.total_pairs = 300;
  c.seed = 3;
  c.env = env;
  return dataset::generate_expert_dataset(c);
}

GailConfig tiny_gail() {
  GailConfig g;
  g.iterations = 4;
  g.disc_hidden = {8};
  g.value_hidden = {8};
  g.seed = 11;
  return g;
}

}  // namespace

TEST(TrainGail, ZeroIterationsReturnsInitialPolicy) {
  const auto env = short_env();
  const auto expert = tiny_expert(env);
  const auto spec = net::policy_spec(sensing::input_dim(env.sensor), {8});
  const auto init = net::init_params(spec, 4, -1.2);
  auto cfg = tiny_gail();
  cfg.iterations = 0;
  const auto r = train_gail(spec, init, expert, cfg, env);
  EXPECT_EQ(r.policy, init);
  EXPECT_TRUE(r.diagnostics.empty());
}

TEST(TrainGail, InvariantsAndDeterminism) {
  const auto env = short_env();
  const auto expert = tiny_expert(env);
  const auto spec = net::policy_spec(sensing::input_dim(env.sensor), {8});
  const auto init = net::init_params(spec, 4, -1.2);
  const auto cfg = tiny_gail();
  const auto r = train_gail(spec, init, expert, cfg, env);
  ASSERT_EQ(r.diagnostics.size(), 4u);
  for (const auto& d : r.diagnostics) {
    EXPECT_EQ(d.trajectories, cfg.trajectories_per_iter);
    EXPECT_EQ(d.scenarios.size(), static_cast<std::size_t>(cfg.trajectories_per_iter));
    ASSERT_EQ(d.disc_max_abs_after_update.size(), static_cast<std::size_t>(cfg.disc_updates_per_iter));
    for (double m : d.disc_max_abs_after_update) EXPECT_LE(m, cfg.clip_bound);
    if (d.accepted) {
      EXPECT_LE(d.kl, cfg.trpo.kl_delta);
    }
  }
  for (double w : r.disc.values) EXPECT_LE(std::abs(w), cfg.clip_bound);
  const auto again = train_gail(spec, init, expert, cfg, env);
  EXPECT_EQ(again.policy, r.policy);
  EXPECT_EQ(again.disc, r.disc);
  EXPECT_EQ(diagnostics_csv(again.diagnostics), diagnostics_csv(r.diagnostics));
}

TEST(TrainGail, RejectsMismatchedSensor) {
  const auto env = short_env();
  const auto expert = tiny_expert(env);
  auto other = env;
  other.sensor.n_rays = 7;
  const auto spec = net::policy_spec(sensing::input_dim(other.sensor), {8});
  EXPECT_THROW(train_gail(spec, net::init_params(spec, 1, -1.2), expert, tiny_gail(), other), ConfigError);
}

TEST(TrainGail, ClassicVariantRuns) {
  const auto env = short_env();
  const auto expert = tiny_expert(env);
  const auto spec = net::policy_spec(sensing::input_dim(env.sensor), {8});
  auto cfg = tiny_gail();
  cfg.loss_variant = LossVariant::ClassicGan;
  cfg.iterations = 2;
  const auto r = train_gail(spec, net::init_params(spec, 4, -1.2), expert, cfg, env);
  EXPECT_EQ(r.diagnostics.size(), 2u);
  for (const auto& d : r.diagnostics) EXPECT_TRUE(std::isfinite(d.disc_loss));
}
