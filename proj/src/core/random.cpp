// SPDX-License-Identifier: Apache-2.0
#include "mmo/random.hpp"

#include <cmath>

namespace mmo {

CMatrix complex_gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CMatrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      out(i, j) = Complex(re, im);
    }
  }
  return out;
}

CMatrix random_unitary(Index n, Rng& rng) {
  const CMatrix g = complex_gaussian(n, n, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(j) *= d / mag;
  }
  return q;
}

CMatrix random_psd(Index n, Rng& rng, double shift) {
  const CMatrix g = complex_gaussian(n, n, rng);
  CMatrix out = g * g.adjoint() / static_cast<double>(n);
  out += shift * CMatrix::Identity(n, n);
  return 0.5 * (out + out.adjoint());
}

RVector random_uniform(Index n, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  RVector out(n);
  for (Index i = 0; i < n; ++i) out(i) = u(rng);
  return out;
}

}  // namespace mmo
