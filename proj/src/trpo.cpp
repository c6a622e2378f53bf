#include "socnav/trpo.hpp"

#include <cmath>

namespace socnav::gail {

namespace {

bool log_std_active(double raw) { return raw >= net::kLogStdMin && raw <= net::kLogStdMax; }

double dot_product(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

bc::LossAndGrad surrogate(const net::Mlp& policy, std::span<const double> theta, const PolicyBatch& batch,
                          double entropy_coeff, bool with_grad) {
  if (batch.size() == 0) throw Error("surrogate needs a non-empty batch");
  const std::size_t ls_off = theta.size() - 2;
  const net::LogStd log_std = net::policy_log_std(theta);
  const double inv_var[2] = {std::exp(-2.0 * log_std[0]), std::exp(-2.0 * log_std[1])};
  const double n = static_cast<double>(batch.size());

  bc::LossAndGrad out;
  if (with_grad) out.grad.assign(theta.size(), 0.0);
  net::Mlp::Tape tape;
  std::vector<double> cot(static_cast<std::size_t>(policy.spec().output_dim()), 0.0);
  double d_log_std[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < batch.size(); ++i) {
    policy.forward(theta, batch.states.row(i), tape);
    const auto y = tape.output();
    const Vec2 mean{y[0], y[1]};
    const Vec2 a = batch.actions[i];
    const double lp = net::gaussian_logprob(mean, log_std, a);
    const double weight = std::exp(lp - batch.old_logprobs[i]) * batch.advantages[i] / n;
    out.loss += weight;
    if (!with_grad) continue;
    const double dx = a.x - mean.x, dy = a.y - mean.y;
    cot[0] = weight * dx * inv_var[0];
    cot[1] = weight * dy * inv_var[1];
    policy.backward(theta, tape, cot, out.grad);
    d_log_std[0] += weight * (dx * dx * inv_var[0] - 1.0);
    d_log_std[1] += weight * (dy * dy * inv_var[1] - 1.0);
  }
  out.loss += entropy_coeff * net::gaussian_entropy(log_std);
  if (with_grad) {
    for (int d = 0; d < 2; ++d) {
      if (log_std_active(theta[ls_off + d])) out.grad[ls_off + d] += d_log_std[d] + entropy_coeff;
    }
  }
  return out;
}

double mean_kl(const net::Mlp& policy, std::span<const double> theta_old, std::span<const double> theta,
               const net::Batch& states) {
  if (states.size() == 0) return 0.0;
  const auto ls_old = net::policy_log_std(theta_old);
  const auto ls_new = net::policy_log_std(theta);
  double total = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto y_old = policy.forward(theta_old, states.row(i));
    const auto y_new = policy.forward(theta, states.row(i));
    total += net::kl_diag_gaussian({y_old[0], y_old[1]}, ls_old, {y_new[0], y_new[1]}, ls_new);
  }
  return total / static_cast<double>(states.size());
}

std::vector<double> fisher_vector_product(const net::Mlp& policy, std::span<const double> theta,
                                          const net::Batch& states, std::span<const double> v, double damping) {
  if (v.size() != theta.size()) throw Error("fisher_vector_product: vector size mismatch");
  std::vector<double> out(theta.size(), 0.0);
  const std::size_t ls_off = theta.size() - 2;
  const auto log_std = net::policy_log_std(theta);
  const double inv_var[2] = {std::exp(-2.0 * log_std[0]), std::exp(-2.0 * log_std[1])};
  const double n = static_cast<double>(states.size());

  // Mean block: J^T diag(1/sigma^2) J v, averaged over states.
  net::Mlp::Tape tape;
  std::vector<double> cot(static_cast<std::size_t>(policy.spec().output_dim()), 0.0);
  for (std::size_t i = 0; i < states.size(); ++i) {
    policy.forward(theta, states.row(i), tape);
    const auto jv = policy.jvp(theta, tape, v);
    cot[0] = jv[0] * inv_var[0] / n;
    cot[1] = jv[1] * inv_var[1] / n;
    policy.backward(theta, tape, cot, out);
  }
  // Log-std block: the Fisher information of log sigma is 2 per dimension.
  if (states.size() > 0) {
    for (int d = 0; d < 2; ++d) {
      if (log_std_active(theta[ls_off + d])) out[ls_off + d] += 2.0 * v[ls_off + d];
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += damping * v[i];
  return out;
}

std::vector<double> conjugate_gradient(const LinearOperator& apply, std::span<const double> b, int iters,
                                       double tol) {
  std::vector<double> x(b.size(), 0.0);
  std::vector<double> r(b.begin(), b.end());
  std::vector<double> p = r;
  double rr = dot_product(r, r);
  for (int k = 0; k < iters && rr >= tol; ++k) {
    const auto ap = apply(p);
    const double pap = dot_product(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_new = dot_product(r, r);
    const double beta = rr_new / rr;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
    rr = rr_new;
  }
  return x;
}

TrpoResult trpo_step(const net::Mlp& policy, const net::ParamVector& theta_old, const PolicyBatch& batch,
                     const TrpoConfig& cfg) {
  if (batch.size() == 0) throw Error("trpo_step needs a non-empty batch");
  if (!(cfg.kl_delta > 0.0)) throw ConfigError("kl_delta must be > 0");
  TrpoResult result{theta_old, false, 0.0, 0.0, 0};

  const auto base = surrogate(policy, theta_old.values, batch, cfg.entropy_coeff);
  if (!std::isfinite(base.loss)) throw Error("non-finite surrogate objective");
  if (dot_product(base.grad, base.grad) == 0.0) return result;

  const auto fvp = [&](std::span<const double> v) {
    return fisher_vector_product(policy, theta_old.values, batch.states, v, cfg.damping);
  };
  const auto dir = conjugate_gradient(fvp, base.grad, cfg.cg_iters, cfg.cg_tol);
  const double shs = dot_product(dir, fvp(dir));
  if (!(shs > 0.0) || !std::isfinite(shs)) return result;
  const double scale = std::sqrt(2.0 * cfg.kl_delta / shs);

  double fraction = 1.0;
  net::ParamVector candidate = theta_old;
  for (int k = 0; k < cfg.backtrack_steps; ++k, fraction *= cfg.backtrack_factor) {
    result.tries = k + 1;
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      candidate.values[i] = theta_old.values[i] + fraction * scale * dir[i];
    }
    const double value = surrogate(policy, candidate.values, batch, cfg.entropy_coeff, false).loss;
    if (!std::isfinite(value)) throw Error("non-finite surrogate objective during line search");
    const double kl = mean_kl(policy, theta_old.values, candidate.values, batch.states);
    const double improvement = value - base.loss;
    if (kl <= cfg.kl_delta && improvement > 0.0) {
      result.params = candidate;
      result.accepted = true;
      result.kl = kl;
      result.improvement = improvement;
      return result;
    }
  }
  return result;
}

}  // namespace socnav::gail
