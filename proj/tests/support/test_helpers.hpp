// Shared fixtures for the unit suites.
#pragma once

#include <cmath>

#include "mmo/random.hpp"
#include "mmo/spectral.hpp"
#include "mmo/types.hpp"

namespace mmo::testing {

inline CMatrix random_hermitian(Index n, Rng& rng) {
  const CMatrix g = complex_gaussian(n, n, rng);
  return 0.5 * (g + g.adjoint());
}

inline CMatrix exp_corr(Index n, double r) {
  CMatrix out(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) out(i, j) = std::pow(r, std::abs(static_cast<double>(i - j)));
  }
  return out;
}

inline CMatrix diag_matrix(std::initializer_list<double> values) {
  RVector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return v.cast<Complex>().asDiagonal();
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1e-12, std::abs(a), std::abs(b)});
}

}  // namespace mmo::testing
