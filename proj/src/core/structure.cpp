// SPDX-License-Identifier: Apache-2.0
#include "mmo/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmo/spectral.hpp"

namespace mmo {

void StructuredSolution::assemble() {
  const Index r = gains.size();
  dense = left_basis.leftCols(r) * gains.asDiagonal() * right_unitary.leftCols(r).adjoint();
}

void StructuredSolution::set_right_unitary(const CMatrix& q) {
  if (q.rows() != right_unitary.rows() || !is_unitary(q, 1e-8)) {
    throw InvalidInput("set_right_unitary: expected a unitary of matching size");
  }
  right_unitary = q;
  assemble();
}

StructuredSolution make_solution(CMatrix left_basis, RVector gains, Index cols) {
  StructuredSolution s;
  const Index r = std::min<Index>(gains.size(), std::min(left_basis.cols(), cols));
  s.left_basis = left_basis.leftCols(r);
  s.gains = gains.head(r).cwiseMax(0.0);
  s.right_unitary = CMatrix::Identity(cols, cols);
  s.assemble();
  return s;
}

double log_det_objective(const CMatrix& pi, const CMatrix& f) {
  const CMatrix s = f.adjoint() * pi * f;
  return log_det_hpd(CMatrix::Identity(s.rows(), s.cols()) + s);
}

StructuredSolution solve_shaping(const CMatrix& shape, Index cols, const Tolerances& tol) {
  const HermitianSorted d = sorted_evd(shape, tol);
  const Index n = shape.rows();
  if (n > 0 && d.eigvals.minCoeff() < -tol.psd_reject * std::max(1.0, d.eigvals.cwiseAbs().maxCoeff())) {
    throw NotPsd("solve_shaping: shape is not positive semidefinite");
  }
  const double floor = tol.psd_clamp * std::max(1.0, n > 0 ? d.eigvals.maxCoeff() : 0.0);
  const auto rank = static_cast<Index>((d.eigvals.array() > floor).count());
  if (rank > std::min(n, cols)) {
    throw UnsupportedRank("solve_shaping: shape rank " + std::to_string(rank) +
                          " exceeds the variable dimensions");
  }
  const RVector roots = d.eigvals.cwiseMax(0.0).cwiseSqrt();
  if (cols == n) {
    StructuredSolution s;
    s.left_basis = d.eigvecs;
    s.gains = roots;
    s.right_unitary = d.eigvecs;
    s.assemble();
    return s;
  }
  const Index r = std::min(n, cols);
  return make_solution(d.eigvecs.leftCols(r), roots.head(r), cols);
}

StructuredSolution solve_joint(const CMatrix& pi, double total, double cap, const Scalarizer& scalarize,
                               Index cols, const Tolerances& tol) {
  if (!(total > 0.0) || !(cap > 0.0)) throw InvalidInput("solve_joint: total and cap must be positive");
  const HermitianSorted d = sorted_evd(pi, tol);
  const Index n = pi.rows();
  if (n > 0 && d.eigvals.minCoeff() < -tol.psd_reject * std::max(1.0, d.eigvals.cwiseAbs().maxCoeff())) {
    throw NotPsd("solve_joint: matrix is not positive semidefinite");
  }
  const Index r = std::min(n, cols);
  const RVector modes = d.eigvals.head(r).cwiseMax(0.0);
  RVector powers = scalarize.allocate(modes, total, cap);
  powers = powers.cwiseMax(0.0).cwiseMin(cap);
  return make_solution(d.eigvecs.leftCols(r), powers.cwiseSqrt(), cols);
}

SubgradientResult subgradient_weights(const std::function<RVector(const RVector&)>& gap,
                                      const RVector& budgets, const RVector& alpha0, const Tolerances& tol) {
  const Index m = budgets.size();
  if (alpha0.size() != m) throw InvalidInput("subgradient_weights: alpha0 length mismatch");
  if ((alpha0.array() < 0.0).any()) throw InvalidInput("subgradient_weights: alpha0 must be non-negative");
  SubgradientResult out;
  RVector g0 = gap(alpha0);
  if ((g0.array() <= 0.0).all()) {
    out.alpha = alpha0;
    out.converged = true;
    return out;
  }
  auto normalize = [&](RVector a) {
    const double scale = a.dot(budgets);
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      a = RVector::Ones(m) / budgets.sum();
    } else {
      a /= scale;
    }
    return a;
  };
  RVector alpha = normalize(alpha0.cwiseMax(1e-12 / std::max(1.0, budgets.maxCoeff())));
  RVector g = gap(alpha);
  for (int t = 1; t <= tol.subgradient_max_iters; ++t) {
    out.iterations = t;
    const RVector rel = g.cwiseQuotient(budgets);
    const bool feasible = rel.maxCoeff() <= tol.subgradient_violation;
    const bool slack = (alpha.cwiseProduct(g)).cwiseAbs().maxCoeff() <= tol.subgradient_slackness;
    if (feasible && slack) {
      out.converged = true;
      break;
    }
    const double step = 1.0 / std::sqrt(static_cast<double>(t));
    for (Index i = 0; i < m; ++i) alpha(i) *= std::exp(std::clamp(step * rel(i), -5.0, 5.0));
    alpha = normalize(alpha);
    g = gap(alpha);
  }
  out.alpha = alpha;
  return out;
}

namespace {

struct WeightedEval {
  CMatrix left;  // Omega^{-1/2} U_r
  RVector gains;
  RVector gaps;
  double value = -std::numeric_limits<double>::infinity();
};

}  // namespace

StructuredSolution solve_weighted(const CMatrix& pi, const WeightedConstraint& c, const Scalarizer& scalarize,
                                  Index cols, const std::optional<RVector>& alpha0, const Tolerances& tol) {
  validate(PowerConstraint{c}, pi.rows(), tol);
  const Index n = pi.rows();
  const auto m = static_cast<Index>(c.weights.size());
  const Index r = std::min(n, cols);
  RVector budgets(m);
  for (Index i = 0; i < m; ++i) budgets(i) = c.budgets[static_cast<size_t>(i)];

  auto evaluate = [&](const RVector& alpha) {
    CMatrix omega = CMatrix::Zero(n, n);
    for (Index i = 0; i < m; ++i) omega += alpha(i) * c.weights[static_cast<size_t>(i)];
    omega = 0.5 * (omega + omega.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(omega);
    RVector ev = es.eigenvalues();
    const double top = std::max(ev.maxCoeff(), 1e-300);
    if (ev.minCoeff() <= top / tol.weight_condition_limit) {
      ev.array() += tol.weight_regularization * omega.trace().real() / static_cast<double>(n) + 1e-300;
    }
    const CMatrix inv_sqrt = es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
    const HermitianSorted d = sorted_evd(inv_sqrt * pi * inv_sqrt, tol);
    const RVector modes = d.eigvals.head(r).cwiseMax(0.0);
    const double budget = alpha.dot(budgets);
    RVector powers = scalarize.allocate(modes, budget, std::numeric_limits<double>::infinity()).cwiseMax(0.0);
    WeightedEval e;
    e.left = inv_sqrt * d.eigvecs.leftCols(r);
    e.gains = powers.cwiseSqrt();
    const CMatrix f = e.left * e.gains.asDiagonal();
    const CMatrix cov = f * f.adjoint();
    e.gaps.resize(m);
    for (Index i = 0; i < m; ++i) e.gaps(i) = (c.weights[static_cast<size_t>(i)] * cov).trace().real() - budgets(i);
    // Objective after scaling onto the feasible set.
    double s = 1.0;
    for (Index i = 0; i < m; ++i) {
      const double tr = e.gaps(i) + budgets(i);
      if (tr > budgets(i)) s = std::min(s, std::sqrt(budgets(i) / tr));
    }
    e.gains *= s;
    // Mode gains of F^H pi F for the scaled solution.
    const CMatrix fs = e.left * e.gains.asDiagonal();
    const RVector achieved = (fs.adjoint() * pi * fs).diagonal().real();
    e.value = scalarize.value(RVector::Ones(r), achieved);
    return e;
  };

  WeightedEval best;
  RVector best_alpha;
  auto gap_fn = [&](const RVector& alpha) {
    WeightedEval e = evaluate(alpha);
    if (e.value > best.value) {
      best = e;
      best_alpha = alpha;
    }
    return e.gaps;
  };

  RVector start = alpha0.value_or(RVector::Ones(m) / budgets.sum());
  if (start.size() != m) start = RVector::Ones(m) / budgets.sum();
  const SubgradientResult sr = subgradient_weights(gap_fn, budgets, start, tol);
  StructuredSolution out = make_solution(best.left, best.gains, cols);
  out.weights_alpha = best_alpha;
  out.converged = sr.converged;
  return out;
}

StructuredSolution solve_structure(const CMatrix& pi, const PowerConstraint& c, const Scalarizer& scalarize,
                                   Index cols, const std::optional<RVector>& alpha0, const Tolerances& tol) {
  if (const auto* s = std::get_if<ShapingConstraint>(&c)) return solve_shaping(s->shape, cols, tol);
  if (const auto* j = std::get_if<JointConstraint>(&c)) return solve_joint(pi, j->total, j->cap, scalarize, cols, tol);
  return solve_weighted(pi, std::get<WeightedConstraint>(c), scalarize, cols, alpha0, tol);
}

}  // namespace mmo
