#include "cicam/config_json.hpp"

using nlohmann::json;

namespace cicam {

json to_json(const BackboneConfig& c) {
  return {{"stage_channels", c.stage_channels},
          {"convs_per_stage", c.convs_per_stage},
          {"nonlocal_after_stage", c.nonlocal_after_stage},
          {"embed_ratio", c.embed_ratio}};
}

BackboneConfig backbone_config_from_json(const json& j) {
  BackboneConfig c;
  if (j.contains("stage_channels")) c.stage_channels = j.at("stage_channels").get<std::vector<int>>();
  if (j.contains("convs_per_stage")) c.convs_per_stage = j.at("convs_per_stage").get<int>();
  if (j.contains("nonlocal_after_stage"))
    c.nonlocal_after_stage = j.at("nonlocal_after_stage").get<std::vector<int>>();
  if (j.contains("embed_ratio")) c.embed_ratio = j.at("embed_ratio").get<int>();
  return c;
}

json to_json(const NetworkConfig& c) {
  return {{"backbone", to_json(c.backbone)},
          {"num_classes", c.num_classes},
          {"image_size", c.image_size},
          {"enhance_per_channel", c.enhance_per_channel},
          {"pool_enabled", c.pool_enabled},
          {"aggregate", c.aggregate == Aggregate::all_classes ? "all-classes" : "predicted"}};
}

NetworkConfig network_config_from_json(const json& j) {
  NetworkConfig c;
  if (j.contains("backbone")) c.backbone = backbone_config_from_json(j.at("backbone"));
  if (j.contains("num_classes")) c.num_classes = j.at("num_classes").get<int>();
  if (j.contains("image_size")) c.image_size = j.at("image_size").get<int>();
  if (j.contains("enhance_per_channel"))
    c.enhance_per_channel = j.at("enhance_per_channel").get<bool>();
  if (j.contains("pool_enabled")) c.pool_enabled = j.at("pool_enabled").get<bool>();
  if (j.contains("aggregate"))
    c.aggregate = j.at("aggregate").get<std::string>() == "all-classes"
                      ? Aggregate::all_classes
                      : Aggregate::predicted;
  return c;
}

json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
          {"epochs", c.epochs},               {"lambda", c.lambda},
          {"beta1", c.beta1},                 {"beta2", c.beta2},
          {"adam_eps", c.adam_eps},           {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
  if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
  if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
  if (j.contains("beta1")) c.beta1 = j.at("beta1").get<double>();
  if (j.contains("beta2")) c.beta2 = j.at("beta2").get<double>();
  if (j.contains("adam_eps")) c.adam_eps = j.at("adam_eps").get<double>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json to_json(const SceneSpec& c) {
  return {{"image_size", c.image_size},
          {"num_classes", c.num_classes},
          {"cooccurrence_rate", c.cooccurrence_rate},
          {"foreground_scale", c.foreground_scale},
          {"seed", c.seed}};
}

SceneSpec scene_spec_from_json(const json& j) {
  SceneSpec c;
  if (j.contains("image_size")) c.image_size = j.at("image_size").get<int>();
  if (j.contains("num_classes")) c.num_classes = j.at("num_classes").get<int>();
  if (j.contains("cooccurrence_rate"))
    c.cooccurrence_rate = j.at("cooccurrence_rate").get<double>();
  if (j.contains("foreground_scale"))
    c.foreground_scale = j.at("foreground_scale").get<double>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json to_json(const CombinerConfig& c) {
  return {{"gamma", gamma_kind_name(c.kind)}, {"p", c.p}, {"q", c.q}, {"scale", c.scale}};
}

CombinerConfig combiner_config_from_json(const json& j) {
  CombinerConfig c;
  if (j.contains("gamma")) c.kind = parse_gamma_kind(j.at("gamma").get<std::string>());
  if (j.contains("p")) c.p = j.at("p").get<double>();
  if (j.contains("q")) c.q = j.at("q").get<double>();
  if (j.contains("scale")) c.scale = j.at("scale").get<double>();
  return c;
}

json to_json(const LocalizerConfig& c) {
  return {{"theta", c.theta}, {"connectivity", c.connectivity}};
}

LocalizerConfig localizer_config_from_json(const json& j) {
  LocalizerConfig c;
  if (j.contains("theta")) c.theta = j.at("theta").get<double>();
  if (j.contains("connectivity")) c.connectivity = j.at("connectivity").get<int>();
  return c;
}

}  // namespace cicam
