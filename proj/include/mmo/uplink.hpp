// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "mmo/constraints.hpp"
#include "mmo/structure.hpp"

namespace mmo {

struct UplinkScenario {
  std::vector<CMatrix> channels;  // H_k: BS antennas x user antennas
  CMatrix noise_cov;              // R_n
  std::vector<CMatrix> weights;   // W_k: streams x streams
  std::vector<PowerConstraint> constraints;

  Index users() const { return static_cast<Index>(channels.size()); }
  /// Dimension and definiteness checks; throws InvalidInput.
  void validate() const;
};

struct PrecoderState {
  std::vector<StructuredSolution> precoders;  // F_k
  std::vector<CMatrix> rotations;             // Q_k
  std::vector<CMatrix> realized;              // X_k = F_k Q_k
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
};

struct StopRule {
  double rel_tol = 1e-6;
  int max_iter = 200;
};

/// R_n + sum_{j != k} H_j X_j W_j X_j^H H_j^H.
CMatrix interference_covariance(const UplinkScenario& sc, const std::vector<CMatrix>& realized, Index k);

/// U_SNR U_W^H aligning the eigenvectors of S = F^H H^H K^-1 H F with those of W.
CMatrix optimal_rotation_uplink(const CMatrix& f, const CMatrix& h, const CMatrix& k_cov, const CMatrix& w);

/// New structured precoder for user k given the others.
StructuredSolution update_precoder(const UplinkScenario& sc, const PrecoderState& state, Index k);

/// log|R_n + sum_k H_k X_k W_k X_k^H H_k^H| - log|R_n|.
double sum_rate(const UplinkScenario& sc, const std::vector<CMatrix>& realized);

/// Per-user block term log|I + W_k X_k^H H_k^H K_k^-1 H_k X_k|.
double user_block_objective(const UplinkScenario& sc, const std::vector<CMatrix>& realized, Index k);

/// Scaled identity-padded precoders at the largest feasible scale.
PrecoderState initial_uplink_state(const UplinkScenario& sc);

/// Alternating per-user updates in ascending order. An update is kept only
/// when it does not lower the sum rate, so the trace is non-decreasing.
PrecoderState alternating_solve_uplink(const UplinkScenario& sc, const std::optional<PrecoderState>& init = std::nullopt,
                                       const StopRule& stop = {});

}  // namespace mmo
