#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socnav/dataset.hpp"
#include "socnav/net.hpp"

namespace socnav::bc {

struct BcConfig {
  double learning_rate = 1e-4;
  double decay_factor = 0.9;
  int decay_every_epochs = 20;
  int epochs = 200;
  int batch_size = 64;
  double w_action = 1.0;
  double w_force = 0.5;
  std::uint64_t seed = 0;
  std::vector<int> hidden{64, 64};
  double init_log_std = std::log(0.3);

  void validate() const;
};

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Supervised targets in network form: input rows plus (action, force) labels.
struct SupervisedSet {
  int input_dim = 0;
  std::vector<double> inputs;   // row-major, size() * input_dim
  std::vector<Vec2> actions;
  std::vector<Vec2> forces;

  std::size_t size() const { return actions.size(); }
  std::span<const double> input(std::size_t i) const {
    return {inputs.data() + i * static_cast<std::size_t>(input_dim), static_cast<std::size_t>(input_dim)};
  }
};

SupervisedSet make_supervised_set(std::span<const dataset::DatasetRecord> records, double max_range);

// w_action * MSE(action_mean, action) + w_force * MSE(force_pred, force),
// averaged over the batch and the two components.
LossAndGrad bc_loss(const net::Mlp& mlp, std::span<const double> params, const SupervisedSet& set,
                    std::span<const std::size_t> batch, double w_action, double w_force);
LossAndGrad bc_loss(const net::Mlp& mlp, std::span<const double> params,
                    std::span<const dataset::DatasetRecord> batch, double max_range, double w_action, double w_force);

struct RmsPropState {
  std::vector<double> mean_square;
};

// s <- rho*s + (1-rho)*g^2;  p <- p - lr*g/sqrt(s+eps)
void rmsprop_step(std::span<double> params, std::span<const double> grad, RmsPropState& state, double lr,
                  double rho = 0.9, double eps = 1e-8);

inline double learning_rate_at(const BcConfig& cfg, int epoch) {
  return cfg.learning_rate * std::pow(cfg.decay_factor, epoch / cfg.decay_every_epochs);
}

struct EpochLoss {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> eval_loss;
};

struct BcResult {
  net::NetworkSpec spec;
  net::ParamVector params;
  std::vector<EpochLoss> curve;
};

// Policy initialised from cfg.seed unless `initial` is given.
BcResult train_bc(const dataset::Dataset& train, const dataset::Dataset& eval, const BcConfig& cfg,
                  const net::ParamVector* initial = nullptr);

std::string loss_curve_csv(const std::vector<EpochLoss>& curve);

}  // namespace socnav::bc
