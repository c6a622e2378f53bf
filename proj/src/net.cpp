#include "socnav/net.hpp"

#include <algorithm>
#include <cmath>

#include "io.hpp"
#include "json.hpp"

namespace socnav::net {

int NetworkSpec::output_dim() const {
  int n = 0;
  for (int h : heads) n += h;
  return n;
}

void NetworkSpec::validate() const {
  if (input_dim < 1) throw ConfigError("network input_dim must be >= 1");
  for (int h : hidden) {
    if (h < 1) throw ConfigError("hidden layer sizes must be >= 1");
  }
  if (heads.empty()) throw ConfigError("network needs at least one head");
  for (int h : heads) {
    if (h < 1) throw ConfigError("head sizes must be >= 1");
  }
  if (extra_params < 0) throw ConfigError("extra_params must be >= 0");
}

std::size_t NetworkSpec::param_count() const {
  std::size_t n = 0;
  int in = input_dim;
  for (int h : hidden) {
    n += static_cast<std::size_t>(h) * (in + 1);
    in = h;
  }
  n += static_cast<std::size_t>(output_dim()) * (in + 1);
  return n + static_cast<std::size_t>(extra_params);
}

std::uint64_t NetworkSpec::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::int64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= static_cast<std::uint64_t>((v >> (8 * b)) & 0xff);
      h *= 0x100000001b3ULL;
    }
  };
  mix(input_dim);
  mix(static_cast<std::int64_t>(hidden.size()));
  for (int v : hidden) mix(v);
  mix(activation == Activation::Tanh ? 1 : 2);
  mix(static_cast<std::int64_t>(heads.size()));
  for (int v : heads) mix(v);
  mix(extra_params);
  return h;
}

Mlp::Mlp(NetworkSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  dims_.push_back(spec_.input_dim);
  for (int h : spec_.hidden) dims_.push_back(h);
  dims_.push_back(spec_.output_dim());
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(off);
    off += static_cast<std::size_t>(dims_[l + 1]) * (dims_[l] + 1);
  }
  param_count_ = off + static_cast<std::size_t>(spec_.extra_params);
}

void Mlp::check_params(std::span<const double> params) const {
  if (params.size() != param_count_) {
    throw Error("parameter vector has " + std::to_string(params.size()) + " entries, network expects " +
                std::to_string(param_count_));
  }
}

void Mlp::forward(std::span<const double> params, std::span<const double> input, Tape& tape) const {
  check_params(params);
  if (input.size() != static_cast<std::size_t>(spec_.input_dim)) {
    throw Error("input has " + std::to_string(input.size()) + " entries, network expects " +
                std::to_string(spec_.input_dim));
  }
  const std::size_t layers = offsets_.size();
  tape.acts.resize(layers + 1);
  tape.acts[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<std::size_t>(dims_[l]);
    const auto out = static_cast<std::size_t>(dims_[l + 1]);
    const double* w = params.data() + offsets_[l];
    const double* b = w + out * in;
    const double* a = tape.acts[l].data();
    auto& z = tape.acts[l + 1];
    z.resize(out);
    const bool squash = l + 1 < layers && spec_.activation == Activation::Tanh;
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) s += row[i] * a[i];
      z[o] = squash ? std::tanh(s) : s;
    }
  }
}

std::vector<double> Mlp::forward(std::span<const double> params, std::span<const double> input) const {
  Tape tape;
  forward(params, input, tape);
  return std::move(tape.acts.back());
}

void Mlp::backward(std::span<const double> params, const Tape& tape, std::span<const double> cotangent,
                   std::span<double> grad) const {
  check_params(params);
  if (grad.size() != param_count_) throw Error("gradient buffer size mismatch");
  if (cotangent.size() != static_cast<std::size_t>(spec_.output_dim())) throw Error("cotangent size mismatch");
  const std::size_t layers = offsets_.size();
  std::vector<double> delta(cotangent.begin(), cotangent.end());
  std::vector<double> prev;
  for (std::size_t l = layers; l-- > 0;) {
    const auto in = static_cast<std::size_t>(dims_[l]);
    const auto out = static_cast<std::size_t>(dims_[l + 1]);
    const double* w = params.data() + offsets_[l];
    double* gw = grad.data() + offsets_[l];
    double* gb = gw + out * in;
    const double* a = tape.acts[l].data();
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      double* grow = gw + o * in;
      for (std::size_t i = 0; i < in; ++i) grow[i] += d * a[i];
      gb[o] += d;
    }
    if (l == 0) break;
    prev.assign(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) prev[i] += row[i] * d;
    }
    if (spec_.activation == Activation::Tanh) {
      for (std::size_t i = 0; i < in; ++i) prev[i] *= 1.0 - a[i] * a[i];
    }
    delta.swap(prev);
  }
}

std::vector<double> Mlp::jvp(std::span<const double> params, const Tape& tape,
                             std::span<const double> tangent) const {
  check_params(params);
  if (tangent.size() != param_count_) throw Error("tangent size mismatch");
  const std::size_t layers = offsets_.size();
  std::vector<double> da(static_cast<std::size_t>(dims_[0]), 0.0);
  std::vector<double> dz;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<std::size_t>(dims_[l]);
    const auto out = static_cast<std::size_t>(dims_[l + 1]);
    const double* w = params.data() + offsets_[l];
    const double* dw = tangent.data() + offsets_[l];
    const double* db = dw + out * in;
    const double* a = tape.acts[l].data();
    dz.assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      double s = db[o];
      const double* row = w + o * in;
      const double* drow = dw + o * in;
      for (std::size_t i = 0; i < in; ++i) s += drow[i] * a[i] + row[i] * da[i];
      dz[o] = s;
    }
    if (l + 1 < layers && spec_.activation == Activation::Tanh) {
      const double* z = tape.acts[l + 1].data();
      for (std::size_t o = 0; o < out; ++o) dz[o] *= 1.0 - z[o] * z[o];
    }
    da.swap(dz);
  }
  return da;
}

std::vector<double> forward(const ParamVector& params, const NetworkSpec& spec, std::span<const double> input) {
  return Mlp(spec).forward(params.values, input);
}

ParamVector backward(const ParamVector& params, const NetworkSpec& spec, std::span<const double> input,
                     std::span<const double> cotangent) {
  const Mlp mlp(spec);
  Mlp::Tape tape;
  mlp.forward(params.values, input, tape);
  ParamVector grad{std::vector<double>(mlp.param_count(), 0.0), spec.hash()};
  mlp.backward(params.values, tape, cotangent, grad.values);
  return grad;
}

ParamVector init_params(const NetworkSpec& spec, std::uint64_t seed, double extra_value) {
  spec.validate();
  Rng rng(seed);
  ParamVector p{{}, spec.hash()};
  p.values.reserve(spec.param_count());
  std::vector<int> dims{spec.input_dim};
  dims.insert(dims.end(), spec.hidden.begin(), spec.hidden.end());
  dims.push_back(spec.output_dim());
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double bound = std::sqrt(6.0 / (dims[l] + dims[l + 1]));
    for (int k = 0; k < dims[l] * dims[l + 1]; ++k) p.values.push_back(rng.uniform(-bound, bound));
    for (int k = 0; k < dims[l + 1]; ++k) p.values.push_back(0.0);
  }
  for (int k = 0; k < spec.extra_params; ++k) p.values.push_back(extra_value);
  return p;
}

NetworkSpec policy_spec(int input_dim, std::vector<int> hidden) {
  return NetworkSpec{input_dim, std::move(hidden), Activation::Tanh, {2, 2}, 2};
}

NetworkSpec scalar_spec(int input_dim, std::vector<int> hidden) {
  return NetworkSpec{input_dim, std::move(hidden), Activation::Tanh, {1}, 0};
}

LogStd policy_log_std(std::span<const double> params) {
  const std::size_t off = params.size() - 2;
  return {std::clamp(params[off], kLogStdMin, kLogStdMax), std::clamp(params[off + 1], kLogStdMin, kLogStdMax)};
}

PolicyOutput policy_output(std::span<const double> params, const Mlp::Tape& tape) {
  const auto out = tape.output();
  PolicyOutput p;
  p.action_mean = {out[0], out[1]};
  if (out.size() >= 4) p.social_force_pred = {out[2], out[3]};
  p.log_std = policy_log_std(params);
  return p;
}

PolicyOutput policy_forward(const Mlp& mlp, std::span<const double> params, std::span<const double> input) {
  Mlp::Tape tape;
  mlp.forward(params, input, tape);
  return policy_output(params, tape);
}

double gaussian_logprob(Vec2 mean, const LogStd& log_std, Vec2 action) {
  const double zx = (action.x - mean.x) * std::exp(-log_std[0]);
  const double zy = (action.y - mean.y) * std::exp(-log_std[1]);
  return -0.5 * (zx * zx + zy * zy) - log_std[0] - log_std[1] - std::log(2.0 * kPi);
}

Vec2 sample_action(Vec2 mean, const LogStd& log_std, Rng& rng) {
  const double ex = rng.normal();
  const double ey = rng.normal();
  return {mean.x + std::exp(log_std[0]) * ex, mean.y + std::exp(log_std[1]) * ey};
}

double kl_diag_gaussian(Vec2 mean1, const LogStd& log_std1, Vec2 mean2, const LogStd& log_std2) {
  const double m1[2] = {mean1.x, mean1.y};
  const double m2[2] = {mean2.x, mean2.y};
  double kl = 0.0;
  for (int d = 0; d < 2; ++d) {
    const double var1 = std::exp(2.0 * log_std1[d]);
    const double var2 = std::exp(2.0 * log_std2[d]);
    const double dm = m1[d] - m2[d];
    kl += log_std2[d] - log_std1[d] + (var1 + dm * dm) / (2.0 * var2) - 0.5;
  }
  return kl;
}

double gaussian_entropy(const LogStd& log_std) {
  return log_std[0] + log_std[1] + std::log(2.0 * kPi) + 1.0;
}

// ---------------------------------------------------------------------------

namespace {

using json = nlohmann::json;

json spec_to_json(const NetworkSpec& s) {
  return json{{"input_dim", s.input_dim},
              {"hidden", s.hidden},
              {"activation", s.activation == Activation::Tanh ? "tanh" : "identity"},
              {"heads", s.heads},
              {"extra_params", s.extra_params}};
}

NetworkSpec spec_from_json(const json& j) {
  NetworkSpec s;
  s.input_dim = j.at("input_dim").get<int>();
  s.hidden = j.at("hidden").get<std::vector<int>>();
  const auto act = j.at("activation").get<std::string>();
  if (act == "tanh") s.activation = Activation::Tanh;
  else if (act == "identity") s.activation = Activation::Identity;
  else throw ParseError("unknown activation '" + act + "'", 0);
  s.heads = j.at("heads").get<std::vector<int>>();
  s.extra_params = j.at("extra_params").get<int>();
  s.validate();
  return s;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  json h{{"format", kCheckpointTag}, {"spec", spec_to_json(ckpt.spec)}, {"count", ckpt.params.size()}};
  std::string out = h.dump();
  out += '\n';
  for (double v : ckpt.params.values) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

Checkpoint parse_checkpoint(std::string_view text) {
  const auto eol = text.find('\n');
  if (eol == std::string_view::npos) throw ParseError("missing checkpoint header", text.size());
  Checkpoint c;
  std::size_t count = 0;
  try {
    const json h = json::parse(text.substr(0, eol));
    if (h.at("format").get<std::string>() != kCheckpointTag) throw ParseError("unsupported checkpoint format", 0);
    c.spec = spec_from_json(h.at("spec"));
    count = h.at("count").get<std::size_t>();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad checkpoint header: ") + e.what(), 0);
  }
  if (count != c.spec.param_count()) throw ParseError("checkpoint count does not match spec", 0);
  c.params.spec_hash = c.spec.hash();
  c.params.values.reserve(count);
  std::size_t pos = eol + 1;
  while (pos < text.size()) {
    const auto next = text.find('\n', pos);
    if (next == std::string_view::npos) throw ParseError("unterminated value line (truncated file?)", pos);
    c.params.values.push_back(parse_double(text.substr(pos, next - pos), pos));
    pos = next + 1;
  }
  if (c.params.size() != count) {
    throw ParseError("checkpoint declares " + std::to_string(count) + " values, found " +
                         std::to_string(c.params.size()),
                     text.size());
  }
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  io::write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) { return parse_checkpoint(io::read_file(path)); }

}  // namespace socnav::net
