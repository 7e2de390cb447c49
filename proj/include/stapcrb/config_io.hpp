#ifndef STAPCRB_CONFIG_IO_HPP
#define STAPCRB_CONFIG_IO_HPP

#include <string>

#include <json.hpp>

#include "stapcrb/scene.hpp"

namespace stapcrb {

/// Keys are the SceneConfig field names. Missing keys keep their defaults;
/// unknown keys are rejected.
SceneConfig scene_from_json(const nlohmann::json& j, SceneConfig base = default_scene());
nlohmann::json scene_to_json(const SceneConfig& cfg);

SceneConfig load_scene_file(const std::string& path);
void save_scene_file(const SceneConfig& cfg, const std::string& path);

nlohmann::json truth_to_json(const TargetTruth& t);
TargetTruth truth_from_json(const nlohmann::json& j);

}  // namespace stapcrb

#endif  // STAPCRB_CONFIG_IO_HPP
