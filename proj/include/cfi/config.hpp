#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfi/assignment.hpp"
#include "cfi/attention.hpp"
#include "cfi/errors.hpp"
#include "cfi/item.hpp"
#include "cfi/mergers.hpp"
#include "cfi/ranker.hpp"
#include "cfi/scenario.hpp"

namespace cfi {

/// Extra series for plot-data export.
struct PlotOptions {
  std::vector<double> p0_sweep;  // control shares for the single-kernel sweep
  Position focus_position = 0;   // source position tracked by the sweep
};

/// A scenario file plus the optional run parameters stored alongside it.
struct ScenarioConfig {
  std::string name;
  Scenario scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replications;
  PlotOptions plot;
};

namespace detail {

using nlohmann::json;

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{"name",  "items",          "r0",         "r1",   "u",
                                          "h",     "p0",             "p1",         "ph",   "strategy",
                                          "seed",  "replications",   "assignment", "plot", "holdout_ranker"};
  return keys;
}

inline const json& require(const json& root, const std::string& key) {
  auto it = root.find(key);
  if (it == root.end()) throw ConfigError("required field is missing", key);
  return *it;
}

inline double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError("expected a number", field);
  return v.get<double>();
}

inline std::uint64_t as_count(const json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError("expected a non-negative integer", field);
  return v.get<std::uint64_t>();
}

inline std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError("expected a string", field);
  return v.get<std::string>();
}

inline std::vector<std::string> as_id_list(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError("expected an array of item ids", field);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& e = v[i];
    const std::string f = field + "[" + std::to_string(i) + "]";
    if (e.is_string()) out.push_back(e.get<std::string>());
    else if (e.is_number_integer()) out.push_back(std::to_string(e.get<std::int64_t>()));
    else throw ConfigError("expected a string or integer item id", f);
  }
  return out;
}

}  // namespace detail

/// Parses a scenario from JSON text. Errors name the offending field, and
/// syntax errors carry the line and column.
inline ScenarioConfig parse_scenario_config(const std::string& text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : root.items()) {
    if (!detail::known_config_keys().count(key)) throw ConfigError("unknown field", key);
  }

  ScenarioConfig cfg;
  if (root.contains("name")) cfg.name = detail::as_string(root["name"], "name");

  const auto r0_names = detail::as_id_list(detail::require(root, "r0"), "r0");
  const auto r1_names = detail::as_id_list(detail::require(root, "r1"), "r1");
  const auto item_names = root.contains("items") ? detail::as_id_list(root["items"], "items") : r0_names;
  try {
    cfg.scenario.items = ItemUniverse::from_names(item_names);
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), "items");
  }
  const ItemUniverse& items = cfg.scenario.items;
  if (items.size() == 0) throw ConfigError("scenario needs at least one item", "items");

  ExperimentDesign& design = cfg.scenario.design;
  design.r0 = ranker_from_names(items, r0_names, "r0");
  design.r1 = ranker_from_names(items, r1_names, "r1");

  const json& u = detail::require(root, "u");
  cfg.scenario.utility.assign(items.size(), 0.0);
  if (u.is_object()) {
    std::vector<bool> seen(items.size(), false);
    for (const auto& [key, value] : u.items()) {
      const std::string field = "u." + key;
      if (!items.contains(key)) throw ConfigError("unknown item id '" + key + "'", field);
      const double x = detail::as_number(value, field);
      if (x < 0.0) throw ConfigError("utility must be non-negative", field);
      const ItemIndex i = items.index_of(key);
      cfg.scenario.utility[i] = x;
      seen[i] = true;
    }
    for (ItemIndex i = 0; i < items.size(); ++i) {
      if (!seen[i]) throw ConfigError("missing utility for item '" + items.id(i).str() + "'", "u");
    }
  } else {
    throw ConfigError("expected an object mapping item id to utility", "u");
  }

  const json& h = detail::require(root, "h");
  if (!h.is_array()) throw ConfigError("expected an array of numbers", "h");
  if (h.size() != items.size()) {
    throw ConfigError("has " + std::to_string(h.size()) + " entries, expected one per item (" +
                          std::to_string(items.size()) + ")",
                      "h");
  }
  std::vector<double> hv;
  for (std::size_t i = 0; i < h.size(); ++i) hv.push_back(detail::as_number(h[i], "h[" + std::to_string(i) + "]"));
  try {
    cfg.scenario.attention = AttentionFunction(std::move(hv));
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), "h");
  }

  design.probabilities.control = detail::as_number(detail::require(root, "p0"), "p0");
  design.probabilities.treatment = detail::as_number(detail::require(root, "p1"), "p1");
  design.probabilities.holdout = root.contains("ph") ? detail::as_number(root["ph"], "ph") : 0.0;

  const std::string strategy = detail::as_string(detail::require(root, "strategy"), "strategy");
  const auto parsed = parse_strategy(strategy);
  if (!parsed) throw ConfigError("unknown strategy '" + strategy + "' (consistent | naive | spot-labeling)", "strategy");
  design.strategy = *parsed;

  if (root.contains("holdout_ranker")) {
    const auto v = detail::as_string(root["holdout_ranker"], "holdout_ranker");
    if (v == "r0") design.governance.holdout_source = Source::R0;
    else if (v == "r1") design.governance.holdout_source = Source::R1;
    else throw ConfigError("expected \"r0\" or \"r1\"", "holdout_ranker");
  }
  if (root.contains("assignment")) {
    const auto v = detail::as_string(root["assignment"], "assignment");
    if (v == "bernoulli") design.scheme = AssignmentScheme::Bernoulli;
    else if (v == "fixed") design.scheme = AssignmentScheme::FixedSize;
    else throw ConfigError("expected \"bernoulli\" or \"fixed\"", "assignment");
  }

  if (root.contains("seed")) cfg.seed = detail::as_count(root["seed"], "seed");
  if (root.contains("replications")) cfg.replications = detail::as_count(root["replications"], "replications");

  if (root.contains("plot")) {
    const json& plot = root["plot"];
    if (!plot.is_object()) throw ConfigError("expected an object", "plot");
    for (const auto& [key, value] : plot.items()) {
      if (key == "p0_sweep") {
        if (!value.is_array()) throw ConfigError("expected an array of numbers", "plot.p0_sweep");
        for (std::size_t i = 0; i < value.size(); ++i) {
          cfg.plot.p0_sweep.push_back(detail::as_number(value[i], "plot.p0_sweep[" + std::to_string(i) + "]"));
        }
      } else if (key == "focus_position") {
        const auto p = detail::as_count(value, "plot.focus_position");
        if (p < 1 || p > items.size()) throw ConfigError("must lie in 1..n", "plot.focus_position");
        cfg.plot.focus_position = static_cast<Position>(p);
      } else {
        throw ConfigError("unknown field", "plot." + key);
      }
    }
  }

  cfg.scenario.validate();
  return cfg;
}

inline ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    auto cfg = parse_scenario_config(ss.str());
    if (cfg.name.empty()) cfg.name = path;
    return cfg;
  } catch (const ConfigError& e) {
    throw e.with_prefix(path);
  }
}

}  // namespace cfi
