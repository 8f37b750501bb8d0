#pragma once

#include "butterfly/params.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace butterfly {

// Flat `section.key_unit = value` text format. Lengths are given in mm, angles in
// degrees, masses in grams; values are converted to SI when applied. Lines starting
// with '#' are comments. Unknown keys are rejected.
struct ConfigKeyInfo {
    std::string_view key;
    std::string_view description;
};

const std::vector<ConfigKeyInfo>& config_keys();

// Applies the assignments in `text` on top of `base`. Errors: Parse (with line
// number) for malformed lines, Validation for unknown keys or unusable values.
// The result is not validated as a whole.
Configuration apply_config_text(std::string_view text, Configuration base);

Configuration load_config_file(const std::filesystem::path& path, Configuration base);

// Applies a single `key = value` override.
void set_config_value(Configuration& config, std::string_view key, std::string_view value);

// Canonical text: every key in fixed order, numbers in the shortest decimal that
// parses back to the identical SI double.
std::string serialize_config(const Configuration& config);

}  // namespace butterfly
