// SPDX-License-Identifier: Apache-2.0
#include "mmo/gmd.hpp"

#include <algorithm>
#include <cmath>

namespace mmo {

namespace {

void swap_index(RMatrix& r, RMatrix& q, RMatrix& p, Index a, Index b) {
  if (a == b) return;
  r.row(a).swap(r.row(b));
  r.col(a).swap(r.col(b));
  q.col(a).swap(q.col(b));
  p.col(a).swap(p.col(b));
}

}  // namespace

GmdFactors gmd_diagonal(const RVector& s, double tol) {
  const Index n = s.size();
  if ((s.array() <= 0.0).any()) throw InvalidInput("gmd_diagonal: entries must be positive");
  GmdFactors out;
  out.r = s.asDiagonal();
  out.q = RMatrix::Identity(n, n);
  out.p = RMatrix::Identity(n, n);
  if (n <= 1) return out;
  const double mean = std::exp(s.array().log().mean());
  for (Index k = 0; k + 1 < n; ++k) {
    const double dk = out.r(k, k);
    if (std::abs(dk - mean) <= tol * mean) continue;
    // Partner on the other side of the mean.
    Index partner = -1;
    for (Index j = k + 1; j < n; ++j) {
      const double dj = out.r(j, j);
      if ((dk > mean && dj <= mean) || (dk < mean && dj >= mean)) {
        partner = j;
        break;
      }
    }
    if (partner < 0) break;
    swap_index(out.r, out.q, out.p, k + 1, partner);
    const double d1 = out.r(k, k);
    const double d2 = out.r(k + 1, k + 1);
    double c = 1.0;
    if (std::abs(d1 - d2) > tol * mean) c = std::sqrt(std::clamp((mean * mean - d2 * d2) / (d1 * d1 - d2 * d2), 0.0, 1.0));
    const double sn = std::sqrt(std::max(0.0, 1.0 - c * c));
    RMatrix g1(2, 2);
    g1 << c, -sn, sn, c;
    RMatrix g2(2, 2);
    g2 << c * d1, -sn * d2, sn * d2, c * d1;
    g2 /= mean;
    const RMatrix block = out.r.block(k, k, 2, 2);
    RMatrix rotated = g2.transpose() * block * g1;
    rotated(1, 0) = 0.0;
    out.r.block(k, k, 2, 2) = rotated;
    if (k > 0) out.r.block(0, k, k, 2) = out.r.block(0, k, k, 2) * g1;
    out.q.middleCols(k, 2) = out.q.middleCols(k, 2) * g2;
    out.p.middleCols(k, 2) = out.p.middleCols(k, 2) * g1;
  }
  return out;
}

}  // namespace mmo
