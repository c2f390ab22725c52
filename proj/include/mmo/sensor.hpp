// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "mmo/constraints.hpp"
#include "mmo/structure.hpp"
#include "mmo/uplink.hpp"

namespace mmo {

/// Correlated-source compression problem. Sensor k observes a block of
/// `block_dims[k]` source entries and sends X_k x_k over H_k.
struct SensorScenario {
  CMatrix source_cov;                   // C_x, PD
  std::vector<CMatrix> channels;        // H_k: receive x transmit antennas
  std::vector<CMatrix> noise_covs;      // R_nk
  std::vector<CMatrix> per_sensor_cov;  // diagonal blocks of C_x
  std::vector<PowerConstraint> constraints;

  Index sensors() const { return static_cast<Index>(channels.size()); }
  std::vector<Index> block_dims() const;
  Index block_offset(Index k) const;
  void validate() const;

  /// Fills per_sensor_cov from the diagonal blocks of source_cov.
  static SensorScenario make(CMatrix source_cov, const std::vector<Index>& block_dims,
                             std::vector<CMatrix> channels, std::vector<CMatrix> noise_covs,
                             std::vector<PowerConstraint> constraints);
};

struct FusionState {
  std::vector<StructuredSolution> compressors_F;
  std::vector<CMatrix> rotations;
  std::vector<CMatrix> compressors_X;  // F_k Q_k R_xk^{-1/2}
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
};

/// Permutation swapping block rows 0 and k (zero-based), so that conjugating a
/// block-diagonal matrix moves block k to the front and block 0 to slot k.
RMatrix build_permutation(const std::vector<Index>& block_dims, Index k);

/// P11 - P12 (P22 + Xi)^-1 P21.
CMatrix schur_complement_phi(const CMatrix& p11, const CMatrix& p12, const CMatrix& p21, const CMatrix& p22,
                             const CMatrix& xi);

/// Block-diagonal matrix of X_j^H H_j^H R_j^-1 H_j X_j in the permuted order
/// used for sensor k (all blocks except k).
CMatrix sensor_xi(const SensorScenario& sc, const std::vector<CMatrix>& x, Index k);

/// Schur complement Phi_k of the permuted C_x^-1 for the current compressors.
CMatrix sensor_phi(const SensorScenario& sc, const std::vector<CMatrix>& x, Index k);

/// U_SNR Ubar^H pairing the descending eigenvalues of F^H H^H R^-1 H F with the
/// ascending eigenvalues of phi_term.
CMatrix optimal_rotation_sensor(const CMatrix& f, const CMatrix& h, const CMatrix& noise_cov,
                                const CMatrix& phi_term);

/// Structured whitened compressor for sensor k given the others.
StructuredSolution update_compressor(const SensorScenario& sc, const FusionState& state, Index k);

/// log|C^-1 + blkdiag(X_k^H H_k^H R_k^-1 H_k X_k)| - log|C^-1|.
double mutual_information(const SensorScenario& sc, const std::vector<CMatrix>& x);

FusionState initial_fusion_state(const SensorScenario& sc);

FusionState alternating_solve_sensors(const SensorScenario& sc, const std::optional<FusionState>& init = std::nullopt,
                                      const StopRule& stop = {});

}  // namespace mmo
