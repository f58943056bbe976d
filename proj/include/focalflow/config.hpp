#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "focalflow/training.hpp"

namespace focalflow {

// Flat key = value view of a training configuration. Dotted keys address the
// nested objective.* and anchor.* blocks. Map order doubles as the canonical
// serialization order.
using KeyValues = std::map<std::string, std::string>;

// Lines of "key = value"; '#' starts a comment, blank lines are skipped.
// Duplicate keys: last one wins.
KeyValues parse_key_values(const std::string& text);
KeyValues load_key_values(const std::filesystem::path& path);
std::string serialize_key_values(const KeyValues& kv);

// "key=value" from the command line.
void apply_assignment(KeyValues& kv, const std::string& assignment);

// Unset keys keep their defaults; unknown keys raise ConfigError naming the
// key. The result is validated.
TrainConfig config_from_keys(const KeyValues& kv);

// Every key, fully resolved, such that config_from_keys is the exact inverse.
KeyValues keys_from_config(const TrainConfig& cfg);

}  // namespace focalflow
