#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "omle/pomdp.hpp"

namespace omle {

/// JSON model layout:
///   {"S":..,"A":..,"O":..,"H":..,
///    "mu1":     [S],
///    "trans":   [H-1][A][S_next][S_cur],
///    "emis":    [H][O][S],
///    "rewards": [H][O]}
/// Parsing checks shapes and reports the offending field; stochasticity is
/// left to validate().
nlohmann::json model_to_json(const TabularPomdp& model);
TabularPomdp model_from_json(const nlohmann::json& j);

TabularPomdp load_model(const std::filesystem::path& path);
void save_model(const TabularPomdp& model, const std::filesystem::path& path);

/// Reads and parses a JSON file, wrapping parse errors in ValidationError.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace omle
