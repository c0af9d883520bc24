// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#include "topotrack/config.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "json.hpp"
#include "topotrack/errors.hpp"

namespace topotrack {

void CliConfig::validate() const {
  pipeline.validate();
  if (compare_margin < 1) throw ConfigError("compare.margin must be >= 1");
}

namespace {

using nlohmann::json;

struct KeyHandler {
  std::function<void(CliConfig&, const json&)> set;
  std::function<json(const CliConfig&)> get;
};

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config: '" + key + "' must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("config: '" + key + "' must be an integer");
  return v.get<int>();
}

const std::map<std::string, KeyHandler>& handlers() {
  static const std::map<std::string, KeyHandler> table = {
      {"snake.alpha",
       {[](CliConfig& c, const json& v) { c.pipeline.snake.alpha = as_number(v, "snake.alpha"); },
        [](const CliConfig& c) { return json(c.pipeline.snake.alpha); }}},
      {"snake.beta",
       {[](CliConfig& c, const json& v) { c.pipeline.snake.beta = as_number(v, "snake.beta"); },
        [](const CliConfig& c) { return json(c.pipeline.snake.beta); }}},
      {"snake.gamma",
       {[](CliConfig& c, const json& v) { c.pipeline.snake.gamma = as_number(v, "snake.gamma"); },
        [](const CliConfig& c) { return json(c.pipeline.snake.gamma); }}},
      {"snake.w_line",
       {[](CliConfig& c, const json& v) { c.pipeline.snake.w_line = as_number(v, "snake.w_line"); },
        [](const CliConfig& c) { return json(c.pipeline.snake.w_line); }}},
      {"snake.w_edge",
       {[](CliConfig& c, const json& v) { c.pipeline.snake.w_edge = as_number(v, "snake.w_edge"); },
        [](const CliConfig& c) { return json(c.pipeline.snake.w_edge); }}},
      {"snake.w_term",
       {[](CliConfig& c, const json& v) { c.pipeline.snake.w_term = as_number(v, "snake.w_term"); },
        [](const CliConfig& c) { return json(c.pipeline.snake.w_term); }}},
      {"snake.max_iterations",
       {[](CliConfig& c, const json& v) {
          c.pipeline.snake.max_iterations = as_int(v, "snake.max_iterations");
        },
        [](const CliConfig& c) { return json(c.pipeline.snake.max_iterations); }}},
      {"snake.move_tol",
       {[](CliConfig& c, const json& v) {
          c.pipeline.snake.move_tol = as_number(v, "snake.move_tol");
        },
        [](const CliConfig& c) { return json(c.pipeline.snake.move_tol); }}},
      {"snake.resample_spacing",
       {[](CliConfig& c, const json& v) {
          c.pipeline.snake.resample_spacing = as_number(v, "snake.resample_spacing");
        },
        [](const CliConfig& c) { return json(c.pipeline.snake.resample_spacing); }}},
      {"snake.resample_every",
       {[](CliConfig& c, const json& v) {
          c.pipeline.snake.resample_every = as_int(v, "snake.resample_every");
        },
        [](const CliConfig& c) { return json(c.pipeline.snake.resample_every); }}},
      {"segmenter.polarity",
       {[](CliConfig& c, const json& v) {
          if (!v.is_string() || (v != "bright" && v != "dark"))
            throw ConfigError("config: 'segmenter.polarity' must be \"bright\" or \"dark\"");
          c.pipeline.segmenter.polarity =
              v == "bright" ? Polarity::BrightForeground : Polarity::DarkForeground;
        },
        [](const CliConfig& c) {
          return json(c.pipeline.segmenter.polarity == Polarity::BrightForeground ? "bright"
                                                                                  : "dark");
        }}},
      {"segmenter.morph_radius",
       {[](CliConfig& c, const json& v) {
          c.pipeline.segmenter.morph_radius = as_int(v, "segmenter.morph_radius");
        },
        [](const CliConfig& c) { return json(c.pipeline.segmenter.morph_radius); }}},
      {"segmenter.min_area",
       {[](CliConfig& c, const json& v) {
          c.pipeline.segmenter.min_area = as_int(v, "segmenter.min_area");
        },
        [](const CliConfig& c) { return json(c.pipeline.segmenter.min_area); }}},
      {"align.L",
       {[](CliConfig& c, const json& v) { c.pipeline.align.L = as_int(v, "align.L"); },
        [](const CliConfig& c) { return json(c.pipeline.align.L); }}},
      {"align.w_min",
       {[](CliConfig& c, const json& v) { c.pipeline.align.w_min = as_number(v, "align.w_min"); },
        [](const CliConfig& c) { return json(c.pipeline.align.w_min); }}},
      {"align.adjacency_gap",
       {[](CliConfig& c, const json& v) {
          c.pipeline.align.adjacency_gap = as_int(v, "align.adjacency_gap");
        },
        [](const CliConfig& c) { return json(c.pipeline.align.adjacency_gap); }}},
      {"align.exact_limit",
       {[](CliConfig& c, const json& v) {
          c.pipeline.align.exact_limit = as_int(v, "align.exact_limit");
        },
        [](const CliConfig& c) { return json(c.pipeline.align.exact_limit); }}},
      {"energy.sigma",
       {[](CliConfig& c, const json& v) { c.pipeline.sigma = as_number(v, "energy.sigma"); },
        [](const CliConfig& c) { return json(c.pipeline.sigma); }}},
      {"compare.margin",
       {[](CliConfig& c, const json& v) { c.compare_margin = as_int(v, "compare.margin"); },
        [](const CliConfig& c) { return json(c.compare_margin); }}},
  };
  return table;
}

}  // namespace

CliConfig config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be a flat object");

  CliConfig cfg;
  const auto& table = handlers();
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto h = table.find(it.key());
    if (h == table.end()) throw ConfigError("config: unknown key '" + it.key() + "'");
    h->second.set(cfg, it.value());
  }
  cfg.validate();
  return cfg;
}

void apply_override(CliConfig& cfg, const std::string& key_value) {
  auto eq = key_value.find('=');
  if (eq == std::string::npos)
    throw ConfigError("config: override '" + key_value + "' is not key=value");
  std::string key = key_value.substr(0, eq);
  std::string value = key_value.substr(eq + 1);

  const auto& table = handlers();
  auto h = table.find(key);
  if (h == table.end()) throw ConfigError("config: unknown key '" + key + "'");

  json v = json::parse(value, nullptr, false);
  if (v.is_discarded()) v = json(value);  // bare strings are fine for string keys
  h->second.set(cfg, v);
}

std::string config_to_json(const CliConfig& cfg) {
  nlohmann::ordered_json j;
  for (const auto& [key, handler] : handlers()) j[key] = handler.get(cfg);
  return j.dump(2);
}

}  // namespace topotrack
