// SPDX-License-Identifier: Apache-2.0
#include "mmo/sim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mmo/sim/channel.hpp"

namespace mmo::sim {

using nlohmann::json;

const char* scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Uplink: return "uplink";
    case ScenarioKind::Sensor: return "sensor";
    case ScenarioKind::Relay: return "relay";
  }
  return "?";
}

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::ClosedForm: return "closed_form";
    case Algorithm::Oracle: return "oracle";
    case Algorithm::NonRobust: return "non_robust";
  }
  return "?";
}

PowerConstraint ConstraintSpec::build(Index n) const {
  if (family == "per_antenna") {
    if (static_cast<Index>(budgets.size()) != n) {
      throw ConfigError("constraint: " + std::to_string(budgets.size()) + " budgets for " + std::to_string(n) +
                        " antennas");
    }
    return per_antenna(budgets);
  }
  if (family == "joint") return JointConstraint{total, cap};
  if (family == "sum_power") return sum_power(n, total);
  return ShapingConstraint{shape_scale * exponential_corr(shape_base, n)};
}

double ConstraintSpec::total_power(Index n) const {
  if (family == "per_antenna") {
    double acc = 0.0;
    for (double b : budgets) acc += b;
    return acc;
  }
  if (family == "shaping") return shape_scale * static_cast<double>(n);
  return total;
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
    if (!known) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "closed_form") return Algorithm::ClosedForm;
  if (s == "oracle") return Algorithm::Oracle;
  if (s == "non_robust") return Algorithm::NonRobust;
  throw ConfigError("algorithms: unknown algorithm '" + s + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (snr_db.empty()) throw ConfigError("snr_db must not be empty");
  for (double s : snr_db) {
    if (!std::isfinite(s)) throw ConfigError("snr_db entries must be finite");
  }
  if (algorithms.empty()) throw ConfigError("algorithms must not be empty");
  for (double r : {rx_correlation, tx_correlation, constraint.shape_base}) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("correlation magnitudes must lie in [0, 1)");
  }
  const auto& c = constraint;
  if (c.family == "per_antenna") {
    if (c.budgets.empty()) throw ConfigError("constraint.budgets required for per_antenna");
    for (double b : c.budgets) {
      if (!(b > 0.0)) throw ConfigError("constraint.budgets must be positive");
    }
  } else if (c.family == "joint") {
    if (!(c.total > 0.0) || !(c.cap > 0.0)) throw ConfigError("constraint.total and constraint.cap must be positive");
  } else if (c.family == "sum_power") {
    if (!(c.total > 0.0)) throw ConfigError("constraint.total must be positive");
  } else if (c.family == "shaping") {
    if (!(c.shape_scale > 0.0)) throw ConfigError("constraint.scale must be positive");
  } else {
    throw ConfigError("constraint.family must be per_antenna, joint, sum_power or shaping");
  }
  const bool per_antenna_family = c.family == "per_antenna";
  auto antennas_match = [&](Index n, const char* what) {
    if (per_antenna_family && static_cast<Index>(c.budgets.size()) != n) {
      throw ConfigError(std::string("constraint.budgets must have one entry per ") + what);
    }
  };
  switch (scenario) {
    case ScenarioKind::Uplink:
      if (uplink.users < 1 || uplink.user_antennas < 1 || uplink.bs_antennas < 1) throw ConfigError("uplink dimensions must be positive");
      antennas_match(uplink.user_antennas, "user antenna");
      for (Algorithm a : algorithms) {
        if (a == Algorithm::NonRobust) throw ConfigError("non_robust applies to the relay scenario only");
      }
      break;
    case ScenarioKind::Sensor:
      if (sensor.sensor_counts.empty()) throw ConfigError("sensor.sensors must not be empty");
      for (Index k : sensor.sensor_counts) {
        if (k < 1) throw ConfigError("sensor.sensors entries must be positive");
      }
      if (sensor.sensor_antennas < 1 || sensor.fusion_antennas < 1 || sensor.block_dim < 1) throw ConfigError("sensor dimensions must be positive");
      antennas_match(sensor.sensor_antennas, "sensor antenna");
      for (Algorithm a : algorithms) {
        if (a == Algorithm::NonRobust) throw ConfigError("non_robust applies to the relay scenario only");
      }
      break;
    case ScenarioKind::Relay:
      if (relay.hops < 1 || relay.antennas < 1) throw ConfigError("relay dimensions must be positive");
      antennas_match(relay.antennas, "relay antenna");
      if (relay.error_variances.empty()) throw ConfigError("relay.error_variances must not be empty");
      for (double e : relay.error_variances) {
        if (!(e >= 0.0 && e < 1.0)) throw ConfigError("relay.error_variances entries must lie in [0, 1)");
      }
      if (!(relay.error_correlation >= 0.0 && relay.error_correlation < 1.0)) throw ConfigError("relay.error_correlation must lie in [0, 1)");
      if (relay.objective < 1 || relay.objective > 6) throw ConfigError("relay.objective must lie in 1..6");
      if (relay.objective == 2) throw ConfigError("relay.objective 2 needs a weight matrix, which configs do not carry");
      for (Algorithm a : algorithms) {
        if (a == Algorithm::Oracle) throw ConfigError("no oracle is available for the relay scenario");
      }
      break;
  }
  if (oracle.restarts < 1 || oracle.max_iters < 1) throw ConfigError("oracle.restarts and oracle.max_iters must be positive");
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(doc, "config", {"scenario", "name", "seed", "trials", "snr_db", "algorithms", "output", "strict",
                             "record_timing", "correlation", "constraint", "uplink", "sensor", "relay", "oracle"});
  ExperimentConfig cfg;
  if (!doc.contains("scenario")) throw ConfigError("config: 'scenario' is required");
  std::string kind;
  read(doc, "scenario", kind, "config");
  if (kind == "uplink") cfg.scenario = ScenarioKind::Uplink;
  else if (kind == "sensor") cfg.scenario = ScenarioKind::Sensor;
  else if (kind == "relay") cfg.scenario = ScenarioKind::Relay;
  else throw ConfigError("config.scenario must be uplink, sensor or relay");
  for (const char* other : {"uplink", "sensor", "relay"}) {
    if (doc.contains(other) && kind != other) throw ConfigError(std::string("config: section '") + other + "' does not match the scenario");
  }
  cfg.name = kind;
  read(doc, "name", cfg.name, "config");
  read(doc, "seed", cfg.seed, "config");
  read(doc, "trials", cfg.trials, "config");
  read(doc, "snr_db", cfg.snr_db, "config");
  read(doc, "strict", cfg.strict, "config");
  read(doc, "record_timing", cfg.record_timing, "config");
  if (doc.contains("output")) {
    std::string out;
    read(doc, "output", out, "config");
    cfg.output = out;
  }
  if (doc.contains("algorithms")) {
    std::vector<std::string> names;
    read(doc, "algorithms", names, "config");
    cfg.algorithms.clear();
    for (const auto& n : names) {
      const Algorithm a = parse_algorithm(n);
      if (std::find(cfg.algorithms.begin(), cfg.algorithms.end(), a) != cfg.algorithms.end()) {
        throw ConfigError("algorithms: duplicate entry '" + n + "'");
      }
      cfg.algorithms.push_back(a);
    }
  }
  if (doc.contains("correlation")) {
    const json& c = doc["correlation"];
    check_keys(c, "correlation", {"rx", "tx"});
    read(c, "rx", cfg.rx_correlation, "correlation");
    read(c, "tx", cfg.tx_correlation, "correlation");
  }
  if (doc.contains("constraint")) {
    const json& c = doc["constraint"];
    check_keys(c, "constraint", {"family", "budgets", "total", "cap", "base", "scale"});
    read(c, "family", cfg.constraint.family, "constraint");
    read(c, "budgets", cfg.constraint.budgets, "constraint");
    read(c, "total", cfg.constraint.total, "constraint");
    read(c, "cap", cfg.constraint.cap, "constraint");
    read(c, "base", cfg.constraint.shape_base, "constraint");
    read(c, "scale", cfg.constraint.shape_scale, "constraint");
  }
  if (doc.contains("uplink")) {
    const json& u = doc["uplink"];
    check_keys(u, "uplink", {"users", "user_antennas", "bs_antennas"});
    read(u, "users", cfg.uplink.users, "uplink");
    read(u, "user_antennas", cfg.uplink.user_antennas, "uplink");
    read(u, "bs_antennas", cfg.uplink.bs_antennas, "uplink");
  }
  if (doc.contains("sensor")) {
    const json& s = doc["sensor"];
    check_keys(s, "sensor", {"sensors", "sensor_antennas", "fusion_antennas", "block_dim"});
    if (s.contains("sensors")) {
      if (s["sensors"].is_array()) read(s, "sensors", cfg.sensor.sensor_counts, "sensor");
      else {
        Index k = 0;
        read(s, "sensors", k, "sensor");
        cfg.sensor.sensor_counts = {k};
      }
    }
    read(s, "sensor_antennas", cfg.sensor.sensor_antennas, "sensor");
    read(s, "fusion_antennas", cfg.sensor.fusion_antennas, "sensor");
    read(s, "block_dim", cfg.sensor.block_dim, "sensor");
  }
  if (doc.contains("relay")) {
    const json& r = doc["relay"];
    check_keys(r, "relay", {"hops", "antennas", "error_variances", "error_correlation", "objective"});
    read(r, "hops", cfg.relay.hops, "relay");
    read(r, "antennas", cfg.relay.antennas, "relay");
    read(r, "error_variances", cfg.relay.error_variances, "relay");
    read(r, "error_correlation", cfg.relay.error_correlation, "relay");
    read(r, "objective", cfg.relay.objective, "relay");
  }
  if (doc.contains("oracle")) {
    const json& o = doc["oracle"];
    check_keys(o, "oracle", {"restarts", "max_iters"});
    read(o, "restarts", cfg.oracle.restarts, "oracle");
    read(o, "max_iters", cfg.oracle.max_iters, "oracle");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace mmo::sim
