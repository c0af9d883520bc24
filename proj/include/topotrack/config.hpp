// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "topotrack/pipeline.hpp"

namespace topotrack {

/// Pipeline configuration plus CLI extras, loadable from a flat JSON file
/// with dotted keys ("snake.alpha": 0.1) and overridable with
/// --set key=value pairs using the same names. Unknown keys are rejected.
struct CliConfig {
  PipelineConfig pipeline;
  int compare_margin = 2;  // inset of the plain-snake seed rectangle, px

  /// Validates every component invariant; throws ConfigError.
  void validate() const;
};

/// Parses a flat dotted-key JSON object. Throws ConfigError on unknown
/// keys, type mismatches, or malformed JSON.
CliConfig config_from_json(const std::string& json_text);

/// Applies "key=value" overrides on top of an existing config.
void apply_override(CliConfig& cfg, const std::string& key_value);

/// All recognized keys with their current values, as a dotted-key JSON
/// object (the same shape config_from_json accepts).
std::string config_to_json(const CliConfig& cfg);

}  // namespace topotrack
