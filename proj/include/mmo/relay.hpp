// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmo/constraints.hpp"
#include "mmo/structure.hpp"
#include "mmo/uplink.hpp"

namespace mmo {

/// Detection objectives for the cascade, all minimized.
enum class ObjectiveKind {
  LogDetMse = 1,        // log|Phi|
  WeightedMse = 2,      // Tr(W Phi)
  MaxMse = 3,           // max_i [Phi]_ii, additively Schur-convex
  SumLogMse = 4,        // sum_i log [Phi]_ii, additively Schur-concave
  MaxCholesky = 5,      // max_i [L]_ii^2 with decision feedback, multiplicatively Schur-convex
  NegSumInvCholesky = 6 // -sum_i sigma^2 / [L]_ii^2 with decision feedback, multiplicatively Schur-concave
};

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::LogDetMse;
  std::optional<CMatrix> weight_matrix;  // required for WeightedMse

  bool uses_feedback() const {
    return kind == ObjectiveKind::MaxCholesky || kind == ObjectiveKind::NegSumInvCholesky;
  }
  void validate(Index streams) const;
};

ObjectiveKind objective_kind_from_index(int index);

struct RelayScenario {
  std::vector<CMatrix> est_channels;  // H^_k: receive x transmit antennas of hop k
  std::vector<CMatrix> error_covs;    // Psi_k, transmit side
  std::vector<double> noise_vars;     // sigma^2_nk
  double source_var = 1.0;
  Index source_dim = 0;               // streams leaving the source
  std::vector<PowerConstraint> constraints;
  ObjectiveSpec objective;

  Index hops() const { return static_cast<Index>(est_channels.size()); }
  /// Column count of F_k (input dimension of hop k).
  Index input_dim(Index k) const;
  void validate() const;
};

struct MseMatrix {
  CMatrix matrix;
  CMatrix cholesky_L;
};

struct HopState {
  std::vector<StructuredSolution> forwarders_F;
  std::vector<CMatrix> rotations_Q;
  std::vector<CMatrix> amplifications_M;
  std::vector<double> noise_levels;  // K_nk = level * I
  CMatrix feedback_C;
  std::vector<double> objective_trace;  // minimized objective, non-increasing
  int iterations = 0;
  bool converged = false;
};

/// sigma^2 + Tr(F F^H Psi).
double hop_noise_level(const CMatrix& f, const CMatrix& psi, double noise_var);

/// (K^-1/2 H^ F F^H H^^H K^-1/2 + I)^{1/2} for K = level * I.
CMatrix hop_amplification(const CMatrix& f, const CMatrix& h_est, double level);

/// A_k = M_k^-1 K_k^-1/2 H^_k F_k.
CMatrix hop_operator(const CMatrix& f, const CMatrix& h_est, double level);

/// Q_k = V_{A_k} U_{A_{k-1}}^H for k >= 1 (zero-based); entry 0 is unused
/// and set to the identity.
std::vector<CMatrix> inner_rotations(const std::vector<CMatrix>& hop_ops);

/// Columns of the DFT matrix (1/sqrt(N)) exp(-2 pi i jk / N).
CMatrix dft_matrix(Index n);

/// Source-side rotation for the objective. Needs the remaining hop operators
/// for the decision-feedback case.
CMatrix first_rotation(const ObjectiveSpec& spec, const std::vector<CMatrix>& hop_ops);

/// All rotations (first plus inner).
std::vector<CMatrix> cascade_rotations(const ObjectiveSpec& spec, const std::vector<CMatrix>& hop_ops);

/// A_K Q_K ... A_1 Q_1.
CMatrix cascade_product(const std::vector<CMatrix>& hop_ops, const std::vector<CMatrix>& rotations);

/// sigma^2 (I - B^H B), the matrix whose Cholesky factor sets the feedback.
CMatrix mse_tilde(double source_var, const CMatrix& product);

/// diag(L_ii) L^-1 for L L^H = mse_tilde.
CMatrix feedback_matrix(const CMatrix& mse_tilde_matrix);

/// sigma^2 C C^H - sigma^2 C B^H B C^H with its Cholesky factor.
MseMatrix cascade_mse_matrix(double source_var, const CMatrix& product, const CMatrix& feedback);

/// Objective evaluated on the MSE matrix with the given feedback matrix.
double objective_from_mse(const ObjectiveSpec& spec, double source_var, const MseMatrix& mse);

/// Descending eigenvalues of F^H H^^H K^-1 H^ F for each hop.
std::vector<RVector> hop_eigenvalues(const RelayScenario& sc, const std::vector<CMatrix>& forwarders);

enum class EigenForm { SumMse, SumRate };

/// Sum-MSE: sum_i sigma^2 (1 - prod_k t_ki); sum-rate: -sum_i log(1 - prod_k t_ki),
/// t = lambda / (1 + lambda), over `streams` source streams.
double f_eigen(EigenForm form, double source_var, const std::vector<RVector>& hop_eigs, Index streams);

/// Per-stream MSE profile sigma^2 (1 - prod_k t_ki), ascending.
RVector eigen_mse_profile(double source_var, const std::vector<RVector>& hop_eigs, Index streams);

/// Objective evaluated from per-hop eigenvalues with optimal rotations and feedback.
double objective_from_eigen(const ObjectiveSpec& spec, double source_var, const std::vector<RVector>& hop_eigs,
                            Index streams);

/// Matrix path: hop operators, Table rotations, feedback, MSE matrix, objective.
struct CascadeEvaluation {
  std::vector<CMatrix> hop_ops;
  std::vector<CMatrix> rotations;
  CMatrix product;
  CMatrix feedback;
  MseMatrix mse;
  double objective = 0.0;
};
CascadeEvaluation evaluate_cascade(const RelayScenario& sc, const std::vector<CMatrix>& forwarders);

/// Robust structured forwarder for hop k given the other hops.
StructuredSolution robust_update_hop(const RelayScenario& sc, const HopState& state, Index k);

HopState initial_hop_state(const RelayScenario& sc);

HopState cascade_solve(const RelayScenario& sc, const std::optional<HopState>& init = std::nullopt,
                       const StopRule& stop = {});

/// Sum rate -sum log(1 - prod t) of the forwarders under the scenario's error statistics.
double relay_sum_rate(const RelayScenario& sc, const std::vector<CMatrix>& forwarders);

/// Forwarders of the state as dense matrices.
std::vector<CMatrix> dense_forwarders(const HopState& state);

/// Copy of the scenario with all error covariances set to zero.
RelayScenario perfect_csi(const RelayScenario& sc);

}  // namespace mmo
