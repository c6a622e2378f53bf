#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "socnav/common.hpp"

// Small fully connected networks with hand-written derivatives.
//
// Parameter layout, per layer in order: weights (out x in, row-major) then
// biases (out). The final layer is linear and its outputs are the heads laid
// end to end. `extra_params` trailing scalars follow (the policy keeps its
// state-independent log standard deviations there).
namespace socnav::net {

enum class Activation { Tanh, Identity };

struct NetworkSpec {
  int input_dim = 1;
  std::vector<int> hidden;
  Activation activation = Activation::Tanh;
  std::vector<int> heads{1};
  int extra_params = 0;

  int output_dim() const;
  std::size_t param_count() const;
  std::uint64_t hash() const;
  void validate() const;
  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct ParamVector {
  std::vector<double> values;
  std::uint64_t spec_hash = 0;

  std::size_t size() const { return values.size(); }
  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

// Row-major stack of equally sized input vectors.
struct Batch {
  int dim = 0;
  std::vector<double> data;

  std::size_t size() const { return dim == 0 ? 0 : data.size() / static_cast<std::size_t>(dim); }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  void push(std::span<const double> r) {
    if (dim == 0) dim = static_cast<int>(r.size());
    if (r.size() != static_cast<std::size_t>(dim)) throw Error("batch row size mismatch");
    data.insert(data.end(), r.begin(), r.end());
  }
};

class Mlp {
 public:
  // acts[0] is the input, acts[l + 1] the output of layer l.
  struct Tape {
    std::vector<std::vector<double>> acts;
    std::span<const double> output() const { return acts.back(); }
  };

  explicit Mlp(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }
  std::size_t param_count() const { return param_count_; }
  std::size_t extras_offset() const { return param_count_ - static_cast<std::size_t>(spec_.extra_params); }

  void forward(std::span<const double> params, std::span<const double> input, Tape& tape) const;
  std::vector<double> forward(std::span<const double> params, std::span<const double> input) const;

  // Accumulates d<output, cotangent>/d params into grad (extras untouched).
  void backward(std::span<const double> params, const Tape& tape, std::span<const double> cotangent,
                std::span<double> grad) const;

  // Output tangent for a parameter tangent, at the point recorded in tape.
  std::vector<double> jvp(std::span<const double> params, const Tape& tape, std::span<const double> tangent) const;

 private:
  void check_params(std::span<const double> params) const;

  NetworkSpec spec_;
  std::vector<int> dims_;
  std::vector<std::size_t> offsets_;
  std::size_t param_count_ = 0;
};

std::vector<double> forward(const ParamVector& params, const NetworkSpec& spec, std::span<const double> input);
ParamVector backward(const ParamVector& params, const NetworkSpec& spec, std::span<const double> input,
                     std::span<const double> cotangent);

// Xavier-uniform weights, zero biases, extras set to extra_value.
ParamVector init_params(const NetworkSpec& spec, std::uint64_t seed, double extra_value = 0.0);

// ---------------------------------------------------------------------------
// Gaussian policy head.

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 1.0;

using LogStd = std::array<double, 2>;

// Heads: action_mean (2), social_force_pred (2); extras: log_std (2).
NetworkSpec policy_spec(int input_dim, std::vector<int> hidden);
// Single scalar head (value function, discriminator).
NetworkSpec scalar_spec(int input_dim, std::vector<int> hidden);

struct PolicyOutput {
  Vec2 action_mean;
  Vec2 social_force_pred;
  LogStd log_std{};
};

// Log-std params are the last two extras; the returned values are clamped.
LogStd policy_log_std(std::span<const double> params);
PolicyOutput policy_output(std::span<const double> params, const Mlp::Tape& tape);
PolicyOutput policy_forward(const Mlp& mlp, std::span<const double> params, std::span<const double> input);

double gaussian_logprob(Vec2 mean, const LogStd& log_std, Vec2 action);
Vec2 sample_action(Vec2 mean, const LogStd& log_std, Rng& rng);
// KL(p1 || p2) for diagonal Gaussians.
double kl_diag_gaussian(Vec2 mean1, const LogStd& log_std1, Vec2 mean2, const LogStd& log_std2);
double gaussian_entropy(const LogStd& log_std);

// ---------------------------------------------------------------------------
// Checkpoints: JSON header line with the network layout, then one value per line.

inline constexpr const char* kCheckpointTag = "socnav-params/1";

struct Checkpoint {
  NetworkSpec spec;
  ParamVector params;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::string_view text);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace socnav::net
