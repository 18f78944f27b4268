#pragma once

#include <filesystem>
#include <istream>
#include <set>
#include <string>
#include <string_view>

#include "json.hpp"
#include "tbcnn/trainer.hpp"

namespace tbcnn {

// Text format:
//
//   # comment
//   [model]
//   variant = d
//   n_c = 300
//   [train]
//   learning_rate = 0.01
//
// Sections are model, train and rae. Unknown sections or keys, malformed
// values and duplicate keys raise ConfigError with the line number.
// Returns the "section.key" names that were assigned.
std::set<std::string> apply_config(std::istream& in, TrainConfig& config,
                                   std::string_view source = "<config>");
std::set<std::string> apply_config_file(const std::filesystem::path& path,
                                        TrainConfig& config);

// Sets one field from its textual value.
void set_option(TrainConfig& config, std::string_view section, std::string_view key,
                std::string_view value);

// Renders every field; apply_config on the result reproduces `config`.
std::string to_config_text(const TrainConfig& config);

nlohmann::json to_json(const TrainConfig& config);
TrainConfig config_from_json(const nlohmann::json& j);

}  // namespace tbcnn
