#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bolusopt/scenario.hpp"

namespace bolusopt {

/// A named parameter set as stored on disk. Values use the preset key
/// vocabulary of the model (see parameter_keys).
struct Preset {
  std::string name;
  std::string model;  // "bergman" | "hovorka"
  int version = 1;
  std::string source;
  std::map<std::string, double> parameters;
};

/// Keys accepted in a preset or in a scenario's "parameters" block.
std::vector<std::string_view> parameter_keys(std::string_view model);

/// Builds a model from a complete key/value set; missing or unknown keys
/// are InvalidInput.
Model build_model(std::string_view model, const std::map<std::string, double>& values);

/// BOLUSOPT_PRESET_DIR if set, else the directory installed with the build.
std::filesystem::path default_preset_dir();

Preset parse_preset(std::string_view text);
std::string serialize_preset(const Preset& preset);
Preset load_preset(const std::string& name, const std::filesystem::path& dir);
/// Preset names (file stems) found in `dir`, sorted.
std::vector<std::string> list_presets(const std::filesystem::path& dir);

/// Scenario documents are JSON objects; every level rejects unknown keys.
/// A scenario names a preset and/or gives parameter values; explicit values
/// override the preset's.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& preset_dir);
std::string serialize_scenario(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path, const std::filesystem::path& preset_dir);

/// Reads a whole file; InvalidInput if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace bolusopt
