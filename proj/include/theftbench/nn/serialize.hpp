#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "theftbench/nn/model.hpp"

namespace theftbench::nn {

inline constexpr const char* kModelFormatVersion = "theftbench-model/1";

nlohmann::ordered_json layer_to_json(const LayerSpec& spec);
LayerSpec layer_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json architecture_to_json(const ModelArchitecture& arch);
ModelArchitecture architecture_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json model_to_json(const TrainedModel& model);
// Throws SchemaError on version, layer or parameter-shape mismatches.
TrainedModel model_from_json(const nlohmann::ordered_json& j);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace theftbench::nn
