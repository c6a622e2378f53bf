#pragma once

#include <cstdint>
#include <string>

#include "socnav/bc.hpp"
#include "socnav/env.hpp"
#include "socnav/eval.hpp"
#include "socnav/gail.hpp"

namespace socnav {

// Top-level run configuration. Module seeds are derived from `seed`.
struct Config {
  std::uint64_t seed = 1;
  EnvConfig env;
  std::size_t total_pairs = 10000;
  std::size_t eval_count = 2000;
  std::string timestamp = "1970-01-01T00:00:00Z";
  bc::BcConfig bc;
  gail::GailConfig gail;
  eval::EvalConfig eval;

  void validate() const;

  dataset::DatasetConfig dataset_config() const;
  std::uint64_t split_seed() const { return derive_seed(seed, 1); }
  bc::BcConfig bc_config() const;
  gail::GailConfig gail_config() const;
};

// Keys absent from the JSON keep their defaults; unknown keys are rejected.
Config parse_config(std::string_view json_text);
Config load_config(const std::string& path);
std::string format_config(const Config& cfg);

}  // namespace socnav
