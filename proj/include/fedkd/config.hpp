#pragma once

#include <map>
#include <string>
#include <vector>

#include "fedkd/federation.hpp"

namespace fedkd {

std::string method_to_string(Method m);
Method method_from_string(const std::string& s);

std::string dropout_policy_to_string(DropoutPolicy p);
DropoutPolicy dropout_policy_from_string(const std::string& s);

// Config field registry: key name plus string get/set, in canonical order.
struct ConfigField {
  std::string key;
  std::string (*get)(const ExperimentConfig&);
  void (*set)(ExperimentConfig&, const std::string&);
};

const std::vector<ConfigField>& config_fields();

ExperimentConfig default_config();

// Applies key=value overrides on top of a base config; unknown keys and
// malformed values raise ConfigError naming the key. Validates the result.
ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv,
                                 ExperimentConfig base = ExperimentConfig{});

// Flat `key = value` text, one field per line, canonical order. Parses back
// losslessly.
std::string serialize_config(const ExperimentConfig& cfg);

// Parses flat key = value text ('#' starts a comment).
ExperimentConfig parse_config_text(const std::string& text,
                                   ExperimentConfig base = ExperimentConfig{});

ExperimentConfig parse_config_file(const std::string& path,
                                   ExperimentConfig base = ExperimentConfig{});

}  // namespace fedkd
