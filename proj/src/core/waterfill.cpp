// SPDX-License-Identifier: Apache-2.0
#include "mmo/waterfill.hpp"

#include <algorithm>
#include <cmath>

namespace mmo {

namespace {

void check_inputs(const RVector& gains, double budget) {
  if (gains.size() == 0) throw InvalidInput("water-filling: empty gain vector");
  if (!(budget > 0.0) || !std::isfinite(budget)) throw InvalidInput("water-filling: budget must be positive");
  for (Index i = 0; i < gains.size(); ++i) {
    if (!(gains(i) >= 0.0) || !std::isfinite(gains(i))) throw InvalidInput("water-filling: gains must be finite and non-negative");
  }
}

RVector fill_at(const RVector& gains, double mu, double cap) {
  RVector p = RVector::Zero(gains.size());
  for (Index i = 0; i < gains.size(); ++i) {
    if (gains(i) <= 0.0) continue;
    p(i) = std::clamp(mu - 1.0 / gains(i), 0.0, cap);
  }
  return p;
}

// Re-solves the level exactly on the active set found by bisection.
WaterfillResult refine(const RVector& gains, double budget, double cap, double mu) {
  const Index n = gains.size();
  double level = mu;
  for (int pass = 0; pass < 4; ++pass) {
    const RVector p = fill_at(gains, level, cap);
    double fixed = 0.0;
    double inv_sum = 0.0;
    int free_count = 0;
    for (Index i = 0; i < n; ++i) {
      if (gains(i) <= 0.0) continue;
      if (p(i) >= cap) {
        fixed += cap;
      } else if (p(i) > 0.0) {
        inv_sum += 1.0 / gains(i);
        ++free_count;
      }
    }
    if (free_count == 0) break;
    const double exact = (budget - fixed + inv_sum) / free_count;
    const RVector q = fill_at(gains, exact, cap);
    if ((q.array() > 0.0).count() != (p.array() > 0.0).count() ||
        (q.array() >= cap).count() != (p.array() >= cap).count()) {
      break;
    }
    level = exact;
  }
  WaterfillResult out;
  out.powers = fill_at(gains, level, cap);
  out.water_level = level;
  out.active_mask.resize(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) out.active_mask[static_cast<size_t>(i)] = out.powers(i) > 0.0;
  return out;
}

}  // namespace

WaterfillResult waterfill(const RVector& gains, double budget, const Tolerances& tol) {
  return waterfill_capped(gains, budget, std::numeric_limits<double>::infinity(), tol);
}

WaterfillResult waterfill_capped(const RVector& gains, double budget, double cap, const Tolerances& tol) {
  check_inputs(gains, budget);
  if (!(cap > 0.0)) throw InvalidInput("water-filling: cap must be positive");
  const Index n = gains.size();
  const auto positive = (gains.array() > 0.0).count();
  if (positive == 0) {
    WaterfillResult out;
    out.powers = RVector::Zero(n);
    out.active_mask.assign(static_cast<size_t>(n), false);
    return out;
  }
  if (std::isfinite(cap) && static_cast<double>(positive) * cap <= budget) {
    WaterfillResult out;
    out.powers = RVector::Zero(n);
    out.active_mask.assign(static_cast<size_t>(n), false);
    double top_inv = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (gains(i) > 0.0) {
        out.powers(i) = cap;
        out.active_mask[static_cast<size_t>(i)] = true;
        top_inv = std::max(top_inv, 1.0 / gains(i));
      }
    }
    out.water_level = top_inv + cap;
    return out;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (gains(i) <= 0.0) continue;
    lo = std::min(lo, 1.0 / gains(i));
    hi = std::max(hi, 1.0 / gains(i));
  }
  hi += budget;
  for (int it = 0; it < tol.waterfill_bisection_iters; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (fill_at(gains, mid, cap).sum() > budget) hi = mid; else lo = mid;
  }
  return refine(gains, budget, cap, lo);
}

double utility_value(const ChannelUtility& u, double power) {
  const double x = u.gain * power;
  const double c = u.coupling;
  switch (u.shape) {
    case UtilityShape::Log: return u.weight * std::log1p(x);
    case UtilityShape::CascadeRate: return u.weight * (std::log1p(x) - std::log1p((1.0 - c) * x));
    case UtilityShape::CascadeMse: return u.weight * c * x / (1.0 + x);
    case UtilityShape::CascadeSinr: return u.weight * (1.0 + x) / (1.0 + (1.0 - c) * x);
  }
  return 0.0;
}

namespace {

// Marginal utility with respect to power at p = 0.
double initial_marginal(const ChannelUtility& u) {
  const double base = u.weight * u.gain;
  return u.shape == UtilityShape::Log ? base : base * u.coupling;
}

// Power at which the marginal utility falls to nu (unclamped, may be <= 0).
double power_at(const ChannelUtility& u, double nu) {
  const double g = u.gain;
  const double c = u.coupling;
  const double q = u.weight * g / nu;
  double x = 0.0;
  switch (u.shape) {
    case UtilityShape::Log:
      x = q - 1.0;
      break;
    case UtilityShape::CascadeRate: {
      const double r = q * c;
      const double a = 1.0 - c;
      if (a <= 1e-14) {
        x = r - 1.0;
      } else {
        const double b = 2.0 - c;
        const double disc = b * b - 4.0 * a * (1.0 - r);
        x = disc <= 0.0 ? 0.0 : (-b + std::sqrt(disc)) / (2.0 * a);
      }
      break;
    }
    case UtilityShape::CascadeMse:
      x = std::sqrt(std::max(q * c, 0.0)) - 1.0;
      break;
    case UtilityShape::CascadeSinr: {
      const double a = 1.0 - c;
      if (a <= 1e-14) return q * c > 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
      x = (std::sqrt(std::max(q * c, 0.0)) - 1.0) / a;
      break;
    }
  }
  return x / g;
}

double marginal_at(const ChannelUtility& u, double p) {
  const double x = u.gain * p;
  const double c = u.coupling;
  const double wg = u.weight * u.gain;
  switch (u.shape) {
    case UtilityShape::Log: return wg / (1.0 + x);
    case UtilityShape::CascadeRate: return wg * c / ((1.0 + x) * (1.0 + (1.0 - c) * x));
    case UtilityShape::CascadeMse: return wg * c / ((1.0 + x) * (1.0 + x));
    case UtilityShape::CascadeSinr: {
      const double d = 1.0 + (1.0 - c) * x;
      return wg * c / (d * d);
    }
  }
  return 0.0;
}

RVector allocation_at(const std::vector<ChannelUtility>& ch, double nu, double cap) {
  RVector p = RVector::Zero(static_cast<Index>(ch.size()));
  for (size_t i = 0; i < ch.size(); ++i) {
    if (ch[i].gain <= 0.0 || initial_marginal(ch[i]) <= nu) continue;
    p(static_cast<Index>(i)) = std::clamp(power_at(ch[i], nu), 0.0, cap);
  }
  return p;
}

}  // namespace

RVector allocate_concave(const std::vector<ChannelUtility>& channels, double budget, double cap,
                         const Tolerances& tol) {
  if (channels.empty()) throw InvalidInput("allocate_concave: no channels");
  if (!(budget > 0.0)) throw InvalidInput("allocate_concave: budget must be positive");
  const auto n = static_cast<Index>(channels.size());
  double hi = 0.0;
  int usable = 0;
  for (const auto& c : channels) {
    if (c.coupling < 0.0 || c.coupling > 1.0 + 1e-12) throw InvalidInput("allocate_concave: coupling outside [0, 1]");
    if (c.gain > 0.0 && initial_marginal(c) > 0.0) {
      hi = std::max(hi, initial_marginal(c));
      ++usable;
    }
  }
  RVector p = RVector::Zero(n);
  if (usable == 0) return p;
  if (std::isfinite(cap) && usable * cap <= budget) {
    for (Index i = 0; i < n; ++i) {
      const auto& c = channels[static_cast<size_t>(i)];
      if (c.gain > 0.0 && initial_marginal(c) > 0.0) p(i) = cap;
    }
    return p;
  }
  double lo = hi;
  while (allocation_at(channels, lo, cap).sum() < budget && lo > 1e-300) lo *= 0.5;
  for (int it = 0; it < tol.waterfill_bisection_iters; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    if (allocation_at(channels, mid, cap).sum() > budget) lo = mid; else hi = mid;
  }
  p = allocation_at(channels, hi, cap);
  double left = budget - p.sum();
  // Hand the remainder to channels that sit exactly at the multiplier.
  const RVector upper = allocation_at(channels, lo, cap);
  for (Index i = 0; i < n && left > 0.0; ++i) {
    const double add = std::clamp(upper(i) - p(i), 0.0, left);
    p(i) += add;
    left -= add;
  }
  while (left > 1e-15) {
    Index best = -1;
    double best_marginal = 0.0;
    for (Index i = 0; i < n; ++i) {
      const auto& c = channels[static_cast<size_t>(i)];
      if (c.gain <= 0.0 || p(i) >= cap) continue;
      const double m = marginal_at(c, p(i));
      if (m > best_marginal) {
        best_marginal = m;
        best = i;
      }
    }
    if (best < 0) break;
    const double add = std::min(left, cap - p(best));
    p(best) += add;
    left -= add;
  }
  return p;
}

Scalarizer log_det_scalarizer() {
  Scalarizer s;
  s.allocate = [](const RVector& g, double budget, double cap) {
    return waterfill_capped(g, budget, cap).powers;
  };
  s.value = [](const RVector& g, const RVector& p) {
    return (g.array() * p.array()).log1p().sum();
  };
  return s;
}

Scalarizer weighted_log_scalarizer(const RVector& mode_weights) {
  auto scaled = [mode_weights](const RVector& g) {
    RVector out = RVector::Zero(g.size());
    for (Index i = 0; i < g.size() && i < mode_weights.size(); ++i) out(i) = g(i) * mode_weights(i);
    return out;
  };
  Scalarizer s;
  s.allocate = [scaled](const RVector& g, double budget, double cap) {
    return waterfill_capped(scaled(g), budget, cap).powers;
  };
  s.value = [scaled](const RVector& g, const RVector& p) {
    return (scaled(g).array() * p.array()).log1p().sum();
  };
  return s;
}

Scalarizer utility_scalarizer(std::vector<ChannelUtility> modes) {
  auto bind = [modes](const RVector& g) {
    std::vector<ChannelUtility> ch(static_cast<size_t>(g.size()));
    for (Index i = 0; i < g.size(); ++i) {
      if (static_cast<size_t>(i) < modes.size()) ch[static_cast<size_t>(i)] = modes[static_cast<size_t>(i)];
      else ch[static_cast<size_t>(i)].weight = 0.0;
      ch[static_cast<size_t>(i)].gain = g(i);
    }
    return ch;
  };
  Scalarizer s;
  s.allocate = [bind](const RVector& g, double budget, double cap) {
    return allocate_concave(bind(g), budget, cap);
  };
  s.value = [bind](const RVector& g, const RVector& p) {
    const auto ch = bind(g);
    double acc = 0.0;
    for (size_t i = 0; i < ch.size(); ++i) acc += utility_value(ch[i], p(static_cast<Index>(i)));
    return acc;
  };
  return s;
}

}  // namespace mmo
