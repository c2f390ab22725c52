// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmo/sim/config.hpp"

namespace mmo::sim {

struct RunRecord {
  std::string scenario;
  std::string algorithm;
  int trial = 0;
  double snr_db = 0.0;
  std::string metric_name;
  double value = 0.0;
  double wall_time_ms = 0.0;
  bool converged = true;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  int parallel = 1;
  /// Restricts the run to these algorithms (intersected with the config).
  std::optional<std::vector<Algorithm>> only;
};

/// Runs every (variant, algorithm, trial, snr) cell. Trial t draws its
/// channels from an RNG seeded with seed ^ t, so records do not depend on
/// scheduling. Output is sorted by (scenario, algorithm, trial, snr).
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// CSV text with the mandatory header row.
std::string format_csv(const std::vector<RunRecord>& records);

/// Writes through a temporary file and renames it into place.
void write_csv_atomic(const std::string& path, const std::vector<RunRecord>& records);

/// Mean value per (scenario, algorithm, snr).
struct CurvePoint {
  std::string scenario;
  std::string algorithm;
  double snr_db = 0.0;
  double mean = 0.0;
  int count = 0;
};
std::vector<CurvePoint> summarize(const std::vector<RunRecord>& records);

}  // namespace mmo::sim
