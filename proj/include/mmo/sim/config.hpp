// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmo/constraints.hpp"

namespace mmo::sim {

enum class ScenarioKind { Uplink, Sensor, Relay };
enum class Algorithm { ClosedForm, Oracle, NonRobust };

const char* scenario_name(ScenarioKind kind);
const char* algorithm_name(Algorithm a);

/// Per-node power limit as written in the config.
struct ConstraintSpec {
  std::string family = "per_antenna";  // per_antenna | joint | sum_power | shaping
  std::vector<double> budgets;          // per_antenna
  double total = 0.0;                   // joint, sum_power
  double cap = 0.0;                     // joint
  double shape_base = 0.6;              // shaping: [i, j] = base^{|i - j|}
  double shape_scale = 1.0;

  /// Builds the constraint for an n-antenna node.
  PowerConstraint build(Index n) const;
  /// Total transmit power used in the SNR definition.
  double total_power(Index n) const;
};

struct UplinkSetup {
  Index users = 2;
  Index user_antennas = 4;
  Index bs_antennas = 8;
};

struct SensorSetup {
  std::vector<Index> sensor_counts{2};
  Index sensor_antennas = 4;
  Index fusion_antennas = 8;
  Index block_dim = 4;
};

struct RelaySetup {
  Index hops = 2;
  Index antennas = 4;
  std::vector<double> error_variances{0.0};
  double error_correlation = 0.6;
  int objective = 1;
};

struct OracleSetup {
  int restarts = 2;
  int max_iters = 300;
};

struct ExperimentConfig {
  ScenarioKind scenario = ScenarioKind::Uplink;
  std::string name;
  std::uint64_t seed = 1;
  int trials = 100;
  std::vector<double> snr_db;
  std::vector<Algorithm> algorithms{Algorithm::ClosedForm};
  std::optional<std::string> output;
  bool strict = false;
  bool record_timing = false;
  double rx_correlation = 0.0;
  double tx_correlation = 0.0;
  ConstraintSpec constraint;
  UplinkSetup uplink;
  SensorSetup sensor;
  RelaySetup relay;
  OracleSetup oracle;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Parses the JSON document. Unknown keys, wrong types and out-of-range values
/// raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace mmo::sim
