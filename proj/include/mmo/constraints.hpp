// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "mmo/types.hpp"

namespace mmo {

/// F F^H <= shape in the Loewner order.
struct ShapingConstraint {
  CMatrix shape;
};

/// Tr(F F^H) <= total and F F^H <= cap * I.
struct JointConstraint {
  double total = 1.0;
  double cap = 1.0;
};

/// Tr(weights[i] F F^H) <= budgets[i] for every i.
struct WeightedConstraint {
  std::vector<CMatrix> weights;
  std::vector<double> budgets;
};

using PowerConstraint = std::variant<ShapingConstraint, JointConstraint, WeightedConstraint>;

/// Per-antenna limits: weights are e_i e_i^T.
WeightedConstraint per_antenna(const std::vector<double>& budgets);

/// Plain sum-power limit as a single weighted constraint with identity weight.
WeightedConstraint sum_power(Index n, double total);

/// Throws InvalidInput when parameters are out of range or dimensions clash
/// with an n-row variable.
void validate(const PowerConstraint& c, Index rows, const Tolerances& tol = default_tolerances());

/// Largest violation of the constraint by F. Non-positive means feasible.
/// Trace constraints report absolute excess, Loewner constraints the largest
/// eigenvalue of the excess matrix.
double feasibility_residual(const PowerConstraint& c, const CMatrix& f);

bool is_feasible(const PowerConstraint& c, const CMatrix& f, double slack = 1e-6);

/// Largest c >= 0 with c*F feasible (F nonzero). For the shaping family the
/// rows of F must span a subspace covered by the shape.
double feasible_scale(const PowerConstraint& c, const CMatrix& f);

/// Row count implied by the constraint (antennas on the transmit side).
Index constraint_rows(const PowerConstraint& c);

const char* family_name(const PowerConstraint& c);

}  // namespace mmo
