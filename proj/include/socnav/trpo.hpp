#pragma once

#include <functional>
#include <span>
#include <vector>

#include "socnav/bc.hpp"
#include "socnav/net.hpp"

namespace socnav::gail {

struct TrpoConfig {
  double kl_delta = 0.01;
  double damping = 0.1;
  int cg_iters = 10;
  double cg_tol = 1e-10;
  int backtrack_steps = 10;
  double backtrack_factor = 0.5;
  double entropy_coeff = 0.0;
};

struct PolicyBatch {
  net::Batch states;
  std::vector<Vec2> actions;
  std::vector<double> old_logprobs;
  std::vector<double> advantages;

  std::size_t size() const { return actions.size(); }
};

// mean[exp(logpi - logpi_old) * A] + entropy_coeff * H
bc::LossAndGrad surrogate(const net::Mlp& policy, std::span<const double> theta, const PolicyBatch& batch,
                          double entropy_coeff, bool with_grad = true);

// Batch-mean KL(pi_old || pi) over the states.
double mean_kl(const net::Mlp& policy, std::span<const double> theta_old, std::span<const double> theta,
               const net::Batch& states);

// Hessian of mean_kl(theta, .) at theta, applied to v, plus damping * v.
std::vector<double> fisher_vector_product(const net::Mlp& policy, std::span<const double> theta,
                                          const net::Batch& states, std::span<const double> v, double damping);

using LinearOperator = std::function<std::vector<double>(std::span<const double>)>;

// Stops after `iters` iterations or once the squared residual drops below tol.
std::vector<double> conjugate_gradient(const LinearOperator& apply, std::span<const double> b, int iters = 10,
                                       double tol = 1e-10);

struct TrpoResult {
  net::ParamVector params;
  bool accepted = false;
  double kl = 0.0;
  double improvement = 0.0;
  int tries = 0;
};

TrpoResult trpo_step(const net::Mlp& policy, const net::ParamVector& theta_old, const PolicyBatch& batch,
                     const TrpoConfig& cfg);

}  // namespace socnav::gail
