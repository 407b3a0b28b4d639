#pragma once

#include <json.hpp>

#include "cicam/combiner.hpp"
#include "cicam/datagen.hpp"
#include "cicam/localizer.hpp"
#include "cicam/network.hpp"
#include "cicam/trainer.hpp"

namespace cicam {

// JSON round-trip for every config persisted in checkpoints, run manifests,
// or accepted via --config. Field names mirror the struct members.
nlohmann::json to_json(const BackboneConfig& c);
BackboneConfig backbone_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const NetworkConfig& c);
NetworkConfig network_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SceneSpec& c);
SceneSpec scene_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CombinerConfig& c);
CombinerConfig combiner_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const LocalizerConfig& c);
LocalizerConfig localizer_config_from_json(const nlohmann::json& j);

}  // namespace cicam
