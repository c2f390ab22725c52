// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "mmo/types.hpp"

namespace mmo {

struct WaterfillResult {
  RVector powers;
  double water_level = 0.0;
  std::vector<bool> active_mask;
};

/// Maximizes sum log(1 + g_i p_i) subject to sum p_i <= budget, p >= 0.
/// Zero gains receive zero power.
WaterfillResult waterfill(const RVector& gains, double budget,
                          const Tolerances& tol = default_tolerances());

/// Same objective with the additional per-channel cap p_i <= cap.
WaterfillResult waterfill_capped(const RVector& gains, double budget, double cap,
                                 const Tolerances& tol = default_tolerances());

/// Per-channel concave utility shapes of x = gain * power.
enum class UtilityShape {
  Log,           // log(1 + x)
  CascadeRate,   // log(1 + x) - log(1 + (1 - c) x)
  CascadeMse,    // c x / (1 + x)
  CascadeSinr,   // (1 + x) / (1 + (1 - c) x)
};

struct ChannelUtility {
  UtilityShape shape = UtilityShape::Log;
  double gain = 0.0;
  double coupling = 1.0;  // c in [0, 1]
  double weight = 1.0;
};

double utility_value(const ChannelUtility& u, double power);

/// Maximizes sum w_i phi_i(g_i p_i) over sum p_i <= budget, 0 <= p_i <= cap by
/// bisection on the budget multiplier. Budget left over on flat (linear)
/// channels is handed to the channels whose marginal equals the multiplier.
RVector allocate_concave(const std::vector<ChannelUtility>& channels, double budget,
                         double cap = std::numeric_limits<double>::infinity(),
                         const Tolerances& tol = default_tolerances());

/// Separable objective over per-mode powers, used by the structure solvers to
/// turn mode gains into powers. `allocate(gains, budget, cap)` returns the
/// powers; `value(gains, powers)` the achieved objective.
struct Scalarizer {
  std::function<RVector(const RVector&, double, double)> allocate;
  std::function<double(const RVector&, const RVector&)> value;
};

/// sum log(1 + g_i p_i), solved by capped water-filling.
Scalarizer log_det_scalarizer();

/// sum log(1 + w_i g_i p_i): mode gains scaled by a paired weight profile
/// (missing weights count as zero).
Scalarizer weighted_log_scalarizer(const RVector& mode_weights);

/// Per-mode utilities with fixed shape, coupling and weight; the mode gain is
/// supplied by the solver at allocation time.
Scalarizer utility_scalarizer(std::vector<ChannelUtility> modes);

}  // namespace mmo
