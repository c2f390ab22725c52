// SPDX-License-Identifier: Apache-2.0
#include "mmo/majorization.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace mmo {

namespace {

std::vector<double> sorted_desc(const RVector& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace

bool majorizes_additive(const RVector& x, const RVector& y) {
  if (x.size() != y.size()) throw InvalidInput("majorizes_additive: length mismatch");
  const auto a = sorted_desc(x);
  const auto b = sorted_desc(y);
  double sa = 0.0;
  double sb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    if (i + 1 < a.size() && sa > sb + 1e-9) return false;
  }
  return std::abs(sa - sb) <= 1e-9;
}

bool majorizes_multiplicative(const RVector& x, const RVector& y) {
  if (x.size() != y.size()) throw InvalidInput("majorizes_multiplicative: length mismatch");
  if ((x.array() < 0.0).any() || (y.array() < 0.0).any()) {
    throw InvalidInput("majorizes_multiplicative: entries must be non-negative");
  }
  const auto a = sorted_desc(x);
  const auto b = sorted_desc(y);
  double pa = 1.0;
  double pb = 1.0;
  for (size_t i = 0; i < a.size(); ++i) {
    pa *= a[i];
    pb *= b[i];
    if (i + 1 < a.size() && pa > pb * (1.0 + 1e-9) + 1e-300) return false;
  }
  return std::abs(pa - pb) <= 1e-9 * std::max(std::abs(pa), std::abs(pb)) ||
         (pa == 0.0 && pb == 0.0);
}

}  // namespace mmo
