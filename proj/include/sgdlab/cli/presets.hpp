#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace sgdlab::cli {

// Bundled figure configs (configs/*.toml), keyed by file stem.
const std::vector<std::pair<std::string_view, std::string_view>>& preset_table();

}  // namespace sgdlab::cli
