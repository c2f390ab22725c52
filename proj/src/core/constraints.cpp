// SPDX-License-Identifier: Apache-2.0
#include "mmo/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmo/spectral.hpp"

namespace mmo {

WeightedConstraint per_antenna(const std::vector<double>& budgets) {
  WeightedConstraint w;
  const auto n = static_cast<Index>(budgets.size());
  for (Index i = 0; i < n; ++i) {
    CMatrix e = CMatrix::Zero(n, n);
    e(i, i) = 1.0;
    w.weights.push_back(e);
  }
  w.budgets = budgets;
  return w;
}

WeightedConstraint sum_power(Index n, double total) {
  WeightedConstraint w;
  w.weights.push_back(CMatrix::Identity(n, n));
  w.budgets.push_back(total);
  return w;
}

Index constraint_rows(const PowerConstraint& c) {
  if (const auto* s = std::get_if<ShapingConstraint>(&c)) return s->shape.rows();
  if (const auto* w = std::get_if<WeightedConstraint>(&c)) {
    return w->weights.empty() ? -1 : w->weights.front().rows();
  }
  return -1;
}

const char* family_name(const PowerConstraint& c) {
  switch (c.index()) {
    case 0: return "shaping";
    case 1: return "joint";
    default: return "weighted";
  }
}

namespace {

void check_psd(const CMatrix& a, const char* what, const Tolerances& tol) {
  if (a.rows() != a.cols()) throw InvalidInput(std::string(what) + " must be square");
  if (!all_finite(a)) throw InvalidInput(std::string(what) + " has non-finite entries");
  if ((a - a.adjoint()).norm() > 1e-8 * std::max(1.0, a.norm())) {
    throw InvalidInput(std::string(what) + " must be Hermitian");
  }
  const double lo = min_eigenvalue(a);
  const double hi = std::max(1.0, max_eigenvalue(a));
  if (lo < -tol.psd_reject * hi) throw NotPsd(std::string(what) + " is not positive semidefinite");
}

}  // namespace

void validate(const PowerConstraint& c, Index rows, const Tolerances& tol) {
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ShapingConstraint>) {
          check_psd(k.shape, "shaping matrix", tol);
          if (rows >= 0 && k.shape.rows() != rows) throw InvalidInput("shaping matrix dimension mismatch");
        } else if constexpr (std::is_same_v<T, JointConstraint>) {
          if (!(k.total > 0.0) || !std::isfinite(k.total)) throw InvalidInput("joint constraint: total power must be positive");
          if (!(k.cap > 0.0)) throw InvalidInput("joint constraint: cap must be positive");
        } else {
          if (k.weights.empty()) throw InvalidInput("weighted constraint: empty list");
          if (k.weights.size() != k.budgets.size()) throw InvalidInput("weighted constraint: weights/budgets length mismatch");
          for (size_t i = 0; i < k.weights.size(); ++i) {
            check_psd(k.weights[i], "weight matrix", tol);
            if (rows >= 0 && k.weights[i].rows() != rows) throw InvalidInput("weight matrix dimension mismatch");
            if (!(k.budgets[i] > 0.0) || !std::isfinite(k.budgets[i])) throw InvalidInput("weighted constraint: budgets must be positive");
          }
          CMatrix sum = CMatrix::Zero(k.weights[0].rows(), k.weights[0].cols());
          for (const auto& w : k.weights) sum += w;
          if (min_eigenvalue(sum) <= 1e-12 * std::max(1.0, max_eigenvalue(sum))) {
            throw InvalidInput("weighted constraint: no positive combination of weights is definite");
          }
        }
      },
      c);
}

double feasibility_residual(const PowerConstraint& c, const CMatrix& f) {
  const CMatrix cov = f * f.adjoint();
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ShapingConstraint>) {
          return max_eigenvalue(cov - k.shape);
        } else if constexpr (std::is_same_v<T, JointConstraint>) {
          const double trace_excess = cov.trace().real() - k.total;
          const double spectral_excess = max_eigenvalue(cov) - k.cap;
          return std::max(trace_excess, spectral_excess);
        } else {
          double worst = -std::numeric_limits<double>::infinity();
          for (size_t i = 0; i < k.weights.size(); ++i) {
            worst = std::max(worst, (k.weights[i] * cov).trace().real() - k.budgets[i]);
          }
          return worst;
        }
      },
      c);
}

bool is_feasible(const PowerConstraint& c, const CMatrix& f, double slack) {
  return feasibility_residual(c, f) <= slack;
}

double feasible_scale(const PowerConstraint& c, const CMatrix& f) {
  const CMatrix cov = f * f.adjoint();
  const double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ShapingConstraint>) {
          // Largest c with c^2 cov <= shape; singular shapes fall back to bisection.
          if (cov.norm() == 0.0) return inf;
          const double shape_min = min_eigenvalue(k.shape);
          if (shape_min > 1e-8 * std::max(1.0, max_eigenvalue(k.shape))) {
            const CMatrix root_inv = hermitian_inv_sqrt(k.shape);
            const double top = max_eigenvalue(root_inv * cov * root_inv);
            if (top <= 0.0) return inf;
            double s = 1.0 / std::sqrt(top);
            // Pull inside the same Loewner tolerance the bisection uses.
            for (double step = 1e-12; s > 0.0 && max_eigenvalue(s * s * cov - k.shape) > 1e-12; step *= 2.0) {
              s *= 1.0 - std::min(step, 0.5);
            }
            return s;
          }
          double lo = 0.0;
          double hi = 1.0;
          while (max_eigenvalue(hi * hi * cov - k.shape) <= 1e-12 && hi < 1e12) hi *= 2.0;
          for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (max_eigenvalue(mid * mid * cov - k.shape) <= 1e-12) lo = mid; else hi = mid;
          }
          return lo;
        } else if constexpr (std::is_same_v<T, JointConstraint>) {
          const double tr = cov.trace().real();
          const double top = max_eigenvalue(cov);
          double s = inf;
          if (tr > 0.0) s = std::min(s, std::sqrt(k.total / tr));
          if (top > 0.0) s = std::min(s, std::sqrt(k.cap / top));
          return s;
        } else {
          double s = inf;
          for (size_t i = 0; i < k.weights.size(); ++i) {
            const double tr = (k.weights[i] * cov).trace().real();
            if (tr > 0.0) s = std::min(s, std::sqrt(k.budgets[i] / tr));
          }
          return s;
        }
      },
      c);
}

}  // namespace mmo
