#pragma once

#include <string>

#include "lsfusion/pipeline.hpp"

namespace lsfusion {

// JSON round trip for FusionConfig. Missing keys keep their defaults, so a
// config file only needs the values it changes.
FusionConfig fusion_config_from_json(const std::string& text);
std::string fusion_config_to_json(const FusionConfig& cfg);

FusionConfig load_fusion_config(const std::string& path);
void save_fusion_config(const std::string& path, const FusionConfig& cfg);

}  // namespace lsfusion
