// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mmo/constraints.hpp"
#include "mmo/waterfill.hpp"

namespace mmo {

/// Precoder in factored form: dense = left_basis * diag(gains) * right^H,
/// where right is the leading r columns of right_unitary.
struct StructuredSolution {
  CMatrix left_basis;      // n x r
  RVector gains;           // r, non-negative
  CMatrix right_unitary;   // m x m
  CMatrix dense;           // n x m
  std::optional<RVector> weights_alpha;
  bool converged = true;

  /// Recomputes `dense` from the factors.
  void assemble();
  /// Replaces the right unitary and reassembles.
  void set_right_unitary(const CMatrix& q);
};

StructuredSolution make_solution(CMatrix left_basis, RVector gains, Index cols);

/// Hermitian square root of the shape, padded or truncated to n x cols.
/// Throws UnsupportedRank when rank(shape) exceeds min(n, cols).
StructuredSolution solve_shaping(const CMatrix& shape, Index cols,
                                 const Tolerances& tol = default_tolerances());

/// Eigenbasis of pi with squared gains from the scalarizer under the joint
/// total/cap limits.
StructuredSolution solve_joint(const CMatrix& pi, double total, double cap,
                               const Scalarizer& scalarize, Index cols,
                               const Tolerances& tol = default_tolerances());

struct SubgradientResult {
  RVector alpha;
  int iterations = 0;
  bool converged = false;
};

/// Dual weight search. `gap(alpha)` returns Tr(Omega_i F F^H) - P_i for the
/// structure evaluated at alpha. Weights are kept on the simplex
/// sum alpha_i P_i = 1 and updated multiplicatively with step s0/sqrt(t).
SubgradientResult subgradient_weights(const std::function<RVector(const RVector&)>& gap,
                                      const RVector& budgets, const RVector& alpha0,
                                      const Tolerances& tol = default_tolerances());

/// Weighted-family structure Omega^{-1/2} U diag(gains) with
/// Omega = sum alpha_i Omega_i. The returned solution is always feasible
/// (post-scaled if the dual search stopped early); `converged` reports
/// whether the weight search met its tolerances.
StructuredSolution solve_weighted(const CMatrix& pi, const WeightedConstraint& c,
                                  const Scalarizer& scalarize, Index cols,
                                  const std::optional<RVector>& alpha0 = std::nullopt,
                                  const Tolerances& tol = default_tolerances());

/// Family dispatch for a single-variable problem max phi(lambda(F^H pi F)).
StructuredSolution solve_structure(const CMatrix& pi, const PowerConstraint& c,
                                   const Scalarizer& scalarize, Index cols,
                                   const std::optional<RVector>& alpha0 = std::nullopt,
                                   const Tolerances& tol = default_tolerances());

/// Scalar log-det objective log|I + F^H pi F|.
double log_det_objective(const CMatrix& pi, const CMatrix& f);

}  // namespace mmo
