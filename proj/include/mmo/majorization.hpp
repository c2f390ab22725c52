// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmo/types.hpp"

namespace mmo {

/// True when y majorizes x additively: sorted partial sums of x never exceed
/// those of y and the totals agree to 1e-9.
bool majorizes_additive(const RVector& x, const RVector& y);

/// Multiplicative analogue on non-negative vectors (partial products, totals
/// equal to 1e-9 relative).
bool majorizes_multiplicative(const RVector& x, const RVector& y);

}  // namespace mmo
