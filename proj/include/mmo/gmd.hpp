// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmo/types.hpp"

namespace mmo {

/// Geometric mean decomposition of a diagonal matrix diag(s) = Q R P^H with R
/// upper triangular and every diagonal entry of R equal to the geometric mean
/// of s. Built from 2x2 Givens pairs.
struct GmdFactors {
  RMatrix q;
  RMatrix r;
  RMatrix p;
};

GmdFactors gmd_diagonal(const RVector& s, double tol = 1e-10);

}  // namespace mmo
