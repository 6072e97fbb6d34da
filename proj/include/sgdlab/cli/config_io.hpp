#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgdlab/harness/config.hpp"

namespace sgdlab::cli {

// TOML unless the extension is .json. Errors name the file.
nlohmann::json load_config_file(const std::filesystem::path& path);
nlohmann::json parse_config_text(std::string_view text, bool is_json, std::string_view origin);
nlohmann::json preset_tree(std::string_view name);

// "a.b=value"; the value is read as JSON when it parses, as a string otherwise.
void apply_override(nlohmann::json& tree, std::string_view assignment);
void set_path(nlohmann::json& tree, std::string_view dotted, nlohmann::json value);

// Rejects unknown keys, naming them.
ExperimentConfig config_from_tree(const nlohmann::json& tree);
// Expands an optional [sweep] block (key, values) into one config per value.
std::vector<ExperimentConfig> configs_from_tree(const nlohmann::json& tree);

}  // namespace sgdlab::cli
