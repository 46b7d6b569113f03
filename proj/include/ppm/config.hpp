#pragma once
// Flat key = value configuration files ('#' starts a comment) and their
// mapping onto PipelineConfig.

#include <map>
#include <string>

#include "ppm/pipeline.hpp"

namespace ppm::config {

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_file(const std::string& path);
KeyValues parse_text(const std::string& text);

// Builds a PipelineConfig; unknown keys raise std::invalid_argument so typos
// do not silently fall back to defaults.
pipeline::PipelineConfig build_pipeline_config(const KeyValues& kv);

}  // namespace ppm::config
