// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "mmo/constraints.hpp"
#include "mmo/random.hpp"

namespace mmo {

struct OracleReport {
  double best_objective = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  double feasibility_residual = 0.0;
  bool converged = false;
};

/// Smooth functional of several matrix variables. The gradient G_k follows
/// the convention f(X + eps D) = f(X) + eps * sum_k Re tr(G_k^H D_k) + o(eps).
struct MatrixObjective {
  std::function<double(const std::vector<CMatrix>&)> value;
  std::function<std::vector<CMatrix>(const std::vector<CMatrix>&)> gradient;
};

struct GradientOptions {
  int max_iters = 400;
  int restarts = 8;  // including the supplied start
  double rel_tol = 1e-10;
  double initial_step = 1.0;
  double armijo_slope = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 50;
  bool check_gradient = true;
  std::uint64_t seed = 0x5eed;
};

struct OracleResult {
  OracleReport report;
  std::vector<CMatrix> variables;
};

/// Projection onto the constraint set, with `ok` cleared when an iterative
/// projection (weighted family) hits its iteration cap.
CMatrix project(const PowerConstraint& c, const CMatrix& x, bool* ok = nullptr);

/// Central-difference check of the gradient along a random direction.
/// Returns the relative error.
double gradient_check(const MatrixObjective& f, const std::vector<CMatrix>& at, Rng& rng);

/// Projected gradient ascent with Armijo backtracking and random restarts.
/// Throws InvalidInput when the analytic gradient disagrees with central
/// differences by more than 1e-4 relative.
OracleResult projected_gradient(const MatrixObjective& f, const std::vector<PowerConstraint>& constraints,
                                const std::vector<CMatrix>& init, const GradientOptions& opts = {});

/// Random point of the constraint set built from random unitaries and a
/// feasible singular-value profile.
CMatrix random_feasible(const PowerConstraint& c, Index rows, Index cols, Rng& rng);

/// Samples feasible points (random boundary points plus perturbations of the
/// candidate) and reports whether none of them dominates the eigenvalues of
/// F^H pi F componentwise with a strict gain above 1e-6.
bool pareto_dominance_check(const CMatrix& candidate, const CMatrix& pi, const PowerConstraint& c,
                            int samples, Rng& rng);

/// Exhaustive search of sum log(1 + g_i p_i) on a power grid for at most
/// three channels. A coarse pass locates the optimum, then windows at the
/// requested step are searched until the best point stops moving.
RVector grid_waterfill(const RVector& gains, double budget,
                       double cap = std::numeric_limits<double>::infinity(), double step = 1e-4);

// Objective builders used as independent baselines.

/// log|I + X^H pi X|.
MatrixObjective single_user_log_det(const CMatrix& pi);

/// log|R_n + sum_k H_k X_k W_k X_k^H H_k^H| - log|R_n|.
MatrixObjective uplink_sum_rate_objective(const std::vector<CMatrix>& channels, const CMatrix& noise_cov,
                                          const std::vector<CMatrix>& weights);

/// Sensor mutual information log|C^-1 + blkdiag(X_k^H G_k X_k)| - log|C^-1|
/// with G_k = H_k^H R_k^-1 H_k.
MatrixObjective sensor_mutual_info_objective(const CMatrix& source_cov, const std::vector<CMatrix>& channels,
                                             const std::vector<CMatrix>& noise_covs);

/// Negative total LMMSE error -tr((C^-1 + blkdiag(X_k^H G_k X_k))^-1).
MatrixObjective sensor_lmmse_objective(const CMatrix& source_cov, const std::vector<CMatrix>& channels,
                                       const std::vector<CMatrix>& noise_covs);

}  // namespace mmo
