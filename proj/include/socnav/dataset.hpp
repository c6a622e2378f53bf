#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "socnav/env.hpp"

namespace socnav::dataset {

enum class Perspective { Agent, Pedestrian };

// One expert state-action pair. All vectors are in the recorded body's frame
// at the time of the observation.
struct DatasetRecord {
  scenario::ScenarioId scenario = scenario::ScenarioId::Passing;
  int episode = 0;
  int step = 0;
  Perspective perspective = Perspective::Agent;
  int body_id = 0;
  std::vector<double> depth;  // raw meters
  Vec2 desired_force;         // unit or zero
  Vec2 social_force;          // m/s^2, field-of-view neighbors only
  Vec2 action;                // m/s, expert post-step velocity

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

struct DatasetConfig {
  std::size_t total_pairs = 10000;
  std::uint64_t seed = 0;
  EnvConfig env;
  // Stored verbatim so regeneration is byte-identical.
  std::string timestamp = "1970-01-01T00:00:00Z";

  friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

struct Dataset {
  DatasetConfig meta;
  std::vector<DatasetRecord> records;

  std::size_t size() const { return records.size(); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

inline constexpr const char* kFormatTag = "socnav-dataset/1";

Dataset generate_expert_dataset(const DatasetConfig& cfg);

// World sequence of one generation episode (index 0 is the initial world).
std::vector<sfm::World> replay_episode(const DatasetConfig& cfg, scenario::ScenarioId id, int episode,
                                       int steps);

// Field-of-view social force on `body_id`, expressed in its body frame.
Vec2 social_force_label(const sfm::World& world, int body_id, const EnvConfig& env);

// Seeded shuffle; the first eval_count shuffled records form `eval`. Each side
// keeps the original record order.
std::pair<Dataset, Dataset> split_dataset(const Dataset& d, std::size_t eval_count, std::uint64_t seed);

std::string serialize_dataset(const Dataset& d);
Dataset parse_dataset(std::string_view text);
void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace socnav::dataset
