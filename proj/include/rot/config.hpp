#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rot/engine.hpp"
#include "rot/train.hpp"

namespace rot {

using Json = nlohmann::ordered_json;

/// One JSON shape per config struct. Readers start from the defaults,
/// override the keys present and reject unknown keys or bad values with a
/// ConfigError naming the field path ("train.batch_size").
Json to_json(const ModelConfig& c);
Json to_json(const TrainConfig& c);
Json to_json(const InferenceLimits& c);
Json to_json(const TaskSpec& t);

ModelConfig model_config_from_json(const Json& j, const std::string& path = "model");
TrainConfig train_config_from_json(const Json& j, const std::string& path = "train");
InferenceLimits limits_from_json(const Json& j, const std::string& path = "limits");
TaskSpec task_spec_from_json(const Json& j, const std::string& path = "task");

/// Shared configuration of every subcommand.
struct RunConfig {
  std::vector<TaskSpec> tasks{{Task::Add, 2}};
  ThoughtType thought = ThoughtType::Rot;
  std::vector<std::uint64_t> seeds{0};
  std::size_t n = 1'000;           // problems per task and seed
  std::string checkpoint;          // model to evaluate; empty means the oracle
  std::string out;                 // output directory
  std::size_t workers = 1;
  ModelConfig model;
  TrainConfig train = desk_preset();
  InferenceLimits limits;
};

Json to_json(const RunConfig& c);
RunConfig run_config_from_json(const Json& j);

}  // namespace rot
