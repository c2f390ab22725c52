// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "mmo/types.hpp"

namespace mmo {

using Rng = std::mt19937_64;

/// Circular complex Gaussian entries, real and imaginary parts N(0, 1/2).
CMatrix complex_gaussian(Index rows, Index cols, Rng& rng);

/// Haar-distributed unitary (QR of a Gaussian matrix with phase correction).
CMatrix random_unitary(Index n, Rng& rng);

/// G G^H / cols + shift * I for a Gaussian G of size n x cols.
CMatrix random_psd(Index n, Rng& rng, double shift = 0.0);

/// Real vector with entries uniform on [lo, hi).
RVector random_uniform(Index n, Rng& rng, double lo = 0.0, double hi = 1.0);

}  // namespace mmo
