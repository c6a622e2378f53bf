#include "socnav/bc.hpp"

#include <numeric>

namespace socnav::bc {

void BcConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("bc.learning_rate must be > 0");
  if (!(decay_factor > 0.0)) throw ConfigError("bc.decay_factor must be > 0");
  if (decay_every_epochs < 1) throw ConfigError("bc.decay_every_epochs must be >= 1");
  if (epochs < 0) throw ConfigError("bc.epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("bc.batch_size must be >= 1");
  if (w_action < 0.0 || w_force < 0.0 || (w_action == 0.0 && w_force == 0.0)) {
    throw ConfigError("bc loss weights must be >= 0 and not both zero");
  }
}

SupervisedSet make_supervised_set(std::span<const dataset::DatasetRecord> records, double max_range) {
  SupervisedSet set;
  if (records.empty()) return set;
  set.input_dim = static_cast<int>(records.front().depth.size()) + 2;
  set.inputs.reserve(records.size() * static_cast<std::size_t>(set.input_dim));
  for (const auto& r : records) {
    if (r.depth.size() + 2 != static_cast<std::size_t>(set.input_dim)) throw Error("inconsistent depth length");
    sensing::append_network_input(set.inputs, r.depth, r.desired_force, max_range);
    set.actions.push_back(r.action);
    set.forces.push_back(r.social_force);
  }
  return set;
}

LossAndGrad bc_loss(const net::Mlp& mlp, std::span<const double> params, const SupervisedSet& set,
                    std::span<const std::size_t> batch, double w_action, double w_force) {
  if (batch.empty()) throw Error("bc_loss needs a non-empty batch");
  if (mlp.spec().output_dim() < 4) throw Error("bc_loss needs action and force heads");
  LossAndGrad out;
  out.grad.assign(mlp.param_count(), 0.0);
  // Each head averages over the batch and its two components.
  const double scale = 1.0 / (2.0 * static_cast<double>(batch.size()));
  net::Mlp::Tape tape;
  std::vector<double> cot(static_cast<std::size_t>(mlp.spec().output_dim()), 0.0);
  for (std::size_t i : batch) {
    mlp.forward(params, set.input(i), tape);
    const auto y = tape.output();
    const double ex = y[0] - set.actions[i].x, ey = y[1] - set.actions[i].y;
    const double fx = y[2] - set.forces[i].x, fy = y[3] - set.forces[i].y;
    out.loss += scale * (w_action * (ex * ex + ey * ey) + w_force * (fx * fx + fy * fy));
    cot[0] = 2.0 * scale * w_action * ex;
    cot[1] = 2.0 * scale * w_action * ey;
    cot[2] = 2.0 * scale * w_force * fx;
    cot[3] = 2.0 * scale * w_force * fy;
    mlp.backward(params, tape, cot, out.grad);
  }
  return out;
}

LossAndGrad bc_loss(const net::Mlp& mlp, std::span<const double> params,
                    std::span<const dataset::DatasetRecord> batch, double max_range, double w_action,
                    double w_force) {
  const auto set = make_supervised_set(batch, max_range);
  std::vector<std::size_t> idx(set.size());
  std::iota(idx.begin(), idx.end(), 0);
  return bc_loss(mlp, params, set, idx, w_action, w_force);
}

void rmsprop_step(std::span<double> params, std::span<const double> grad, RmsPropState& state, double lr,
                  double rho, double eps) {
  if (grad.size() != params.size()) throw Error("rmsprop: gradient size mismatch");
  if (state.mean_square.empty()) state.mean_square.assign(params.size(), 0.0);
  if (state.mean_square.size() != params.size()) throw Error("rmsprop: state size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& s = state.mean_square[i];
    s = rho * s + (1.0 - rho) * grad[i] * grad[i];
    params[i] -= lr * grad[i] / std::sqrt(s + eps);
  }
}

BcResult train_bc(const dataset::Dataset& train, const dataset::Dataset& eval, const BcConfig& cfg,
                  const net::ParamVector* initial) {
  cfg.validate();
  if (train.records.empty()) throw Error("train_bc needs a non-empty training set");
  const auto& sensor = train.meta.env.sensor;

  BcResult result;
  result.spec = net::policy_spec(sensing::input_dim(sensor), cfg.hidden);
  const net::Mlp mlp(result.spec);
  result.params = initial ? *initial : net::init_params(result.spec, cfg.seed, cfg.init_log_std);
  if (result.params.size() != mlp.param_count()) throw Error("initial parameters do not match the policy spec");

  const auto train_set = make_supervised_set(train.records, sensor.max_range);
  const auto eval_set = make_supervised_set(eval.records, sensor.max_range);
  std::vector<std::size_t> eval_idx(eval_set.size());
  std::iota(eval_idx.begin(), eval_idx.end(), 0);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(cfg.seed, 1));
  RmsPropState state;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    const double lr = learning_rate_at(cfg, epoch);
    double weighted = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::span<const std::size_t> batch(order.data() + start, std::min(bs, order.size() - start));
      const auto lg = bc_loss(mlp, result.params.values, train_set, batch, cfg.w_action, cfg.w_force);
      weighted += lg.loss * static_cast<double>(batch.size());
      rmsprop_step(result.params.values, lg.grad, state, lr);
    }
    EpochLoss e;
    e.epoch = epoch;
    e.train_loss = weighted / static_cast<double>(order.size());
    if (!eval_idx.empty()) {
      e.eval_loss = bc_loss(mlp, result.params.values, eval_set, eval_idx, cfg.w_action, cfg.w_force).loss;
    }
    result.curve.push_back(e);
  }
  return result;
}

std::string loss_curve_csv(const std::vector<EpochLoss>& curve) {
  std::string out = "epoch,train_loss,eval_loss\n";
  for (const auto& e : curve) {
    out += std::to_string(e.epoch) + ',' + format_double(e.train_loss) + ',';
    if (e.eval_loss) out += format_double(*e.eval_loss);
    out += '\n';
  }
  return out;
}

}  // namespace socnav::bc
