// SPDX-License-Identifier: Apache-2.0
#include "mmo/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "mmo/spectral.hpp"

namespace mmo {

namespace {

double inner(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b) {
  double acc = 0.0;
  for (size_t k = 0; k < a.size(); ++k) acc += (a[k].adjoint() * b[k]).trace().real();
  return acc;
}

std::vector<CMatrix> axpy(const std::vector<CMatrix>& x, double t, const std::vector<CMatrix>& d) {
  std::vector<CMatrix> out(x.size());
  for (size_t k = 0; k < x.size(); ++k) out[k] = x[k] + t * d[k];
  return out;
}

// Singular values onto {0 <= x <= hi, sum x^2 <= total}.
RVector clip_ball_box(const RVector& s, double total, double hi) {
  RVector x = s.cwiseMin(hi);
  if (x.squaredNorm() <= total) return x;
  double lo_nu = 0.0;
  double hi_nu = 1.0;
  auto at = [&](double nu) { return (s / (1.0 + nu)).cwiseMin(hi); };
  while (at(hi_nu).squaredNorm() > total) hi_nu *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo_nu + hi_nu);
    if (at(mid).squaredNorm() > total) lo_nu = mid; else hi_nu = mid;
  }
  return at(hi_nu);
}

CMatrix with_singular_values(const SingularTriple& d, const RVector& s, Index rows, Index cols) {
  const Index r = s.size();
  return d.left.leftCols(r) * s.cast<Complex>().asDiagonal() * d.right.leftCols(r).adjoint() +
         CMatrix::Zero(rows, cols);
}

// Euclidean projection onto Tr(Omega X X^H) <= budget.
CMatrix project_ellipsoid(const Eigen::SelfAdjointEigenSolver<CMatrix>& es, double budget, const CMatrix& z) {
  const RVector w = es.eigenvalues().cwiseMax(0.0);
  const CMatrix y = es.eigenvectors().adjoint() * z;
  const RVector row_energy = y.rowwise().squaredNorm();
  auto value = [&](double nu) {
    double acc = 0.0;
    for (Index i = 0; i < w.size(); ++i) acc += w(i) * row_energy(i) / ((1.0 + nu * w(i)) * (1.0 + nu * w(i)));
    return acc;
  };
  if (value(0.0) <= budget) return z;
  double lo = 0.0;
  double hi = 1.0;
  while (value(hi) > budget) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (value(mid) > budget) lo = mid; else hi = mid;
  }
  RVector scale(w.size());
  for (Index i = 0; i < w.size(); ++i) scale(i) = 1.0 / (1.0 + hi * w(i));
  return es.eigenvectors() * (scale.cast<Complex>().asDiagonal() * y);
}

}  // namespace

CMatrix project(const PowerConstraint& c, const CMatrix& x, bool* ok) {
  if (ok) *ok = true;
  if (const auto* s = std::get_if<ShapingConstraint>(&c)) {
    // Clip singular values in coordinates whitened by the shape.
    const Index n = s->shape.rows();
    const CMatrix shape = s->shape + 1e-12 * std::max(1.0, s->shape.trace().real() / static_cast<double>(n)) *
                                         CMatrix::Identity(n, n);
    const CMatrix root = hermitian_sqrt(shape);
    const CMatrix inv_root = hermitian_inv_sqrt(shape);
    const CMatrix y = inv_root * x;
    const auto d = sorted_svd(y);
    if (d.singvals.size() == 0 || d.singvals.maxCoeff() <= 1.0) return x;
    return root * with_singular_values(d, d.singvals.cwiseMin(1.0), x.rows(), x.cols());
  }
  if (const auto* j = std::get_if<JointConstraint>(&c)) {
    const auto d = sorted_svd(x);
    if (d.singvals.size() == 0) return x;
    const RVector s = clip_ball_box(d.singvals, j->total, std::sqrt(j->cap));
    if ((s - d.singvals).cwiseAbs().maxCoeff() == 0.0) return x;
    return with_singular_values(d, s, x.rows(), x.cols());
  }
  const auto& w = std::get<WeightedConstraint>(c);
  std::vector<Eigen::SelfAdjointEigenSolver<CMatrix>> solvers;
  solvers.reserve(w.weights.size());
  for (const auto& om : w.weights) solvers.emplace_back(0.5 * (om + om.adjoint()));
  if (is_feasible(c, x, 0.0)) return x;
  // Dykstra's alternating projections.
  const size_t m = w.weights.size();
  CMatrix current = x;
  std::vector<CMatrix> correction(m, CMatrix::Zero(x.rows(), x.cols()));
  for (int it = 0; it < 500; ++it) {
    const CMatrix before = current;
    for (size_t i = 0; i < m; ++i) {
      const CMatrix y = current + correction[i];
      const CMatrix p = project_ellipsoid(solvers[i], w.budgets[i], y);
      correction[i] = y - p;
      current = p;
    }
    if ((current - before).norm() <= 1e-8 * std::max(1.0, x.norm()) && feasibility_residual(c, current) <= 1e-9) {
      return current;
    }
  }
  if (ok) *ok = false;
  // Leave the iterate feasible even when Dykstra stalls.
  const double scale = feasible_scale(c, current);
  return std::isfinite(scale) ? CMatrix(std::min(1.0, scale) * current) : current;
}

double gradient_check(const MatrixObjective& f, const std::vector<CMatrix>& at, Rng& rng) {
  std::vector<CMatrix> dir(at.size());
  double scale = 0.0;
  for (size_t k = 0; k < at.size(); ++k) {
    dir[k] = complex_gaussian(at[k].rows(), at[k].cols(), rng);
    scale += at[k].squaredNorm();
  }
  const double h = 1e-5 * std::max(1.0, std::sqrt(scale));
  const double numeric = (f.value(axpy(at, h, dir)) - f.value(axpy(at, -h, dir))) / (2.0 * h);
  const double analytic = inner(f.gradient(at), dir);
  return std::abs(numeric - analytic) / std::max({1e-8, std::abs(numeric), std::abs(analytic)});
}

namespace {

OracleResult ascend(const MatrixObjective& f, const std::vector<PowerConstraint>& cons,
                    std::vector<CMatrix> x, const GradientOptions& opts) {
  OracleResult out;
  bool proj_ok = true;
  for (size_t k = 0; k < x.size(); ++k) {
    bool ok = true;
    x[k] = project(cons[k], x[k], &ok);
    proj_ok = proj_ok && ok;
  }
  double value = f.value(x);
  double step = opts.initial_step;
  int it = 0;
  bool converged = false;
  int quiet = 0;
  for (; it < opts.max_iters; ++it) {
    const std::vector<CMatrix> g = f.gradient(x);
    bool accepted = false;
    for (int b = 0; b < opts.max_backtracks; ++b) {
      std::vector<CMatrix> trial(x.size());
      bool ok_all = true;
      for (size_t k = 0; k < x.size(); ++k) {
        bool ok = true;
        trial[k] = project(cons[k], x[k] + step * g[k], &ok);
        ok_all = ok_all && ok;
      }
      std::vector<CMatrix> diff(x.size());
      for (size_t k = 0; k < x.size(); ++k) diff[k] = trial[k] - x[k];
      const double tv = f.value(trial);
      const double predicted = inner(g, diff);
      if (std::isfinite(tv) && tv >= value + opts.armijo_slope * predicted && tv >= value) {
        const double gain = tv - value;
        x = std::move(trial);
        value = tv;
        proj_ok = proj_ok && ok_all;
        accepted = true;
        step *= 2.0;
        quiet = gain <= opts.rel_tol * std::max(1.0, std::abs(value)) ? quiet + 1 : 0;
        break;
      }
      step *= opts.shrink;
    }
    if (!accepted || quiet >= 3) {
      converged = true;
      ++it;
      break;
    }
  }
  out.variables = std::move(x);
  out.report.best_objective = value;
  out.report.iterations = it;
  double resid = 0.0;
  for (size_t k = 0; k < cons.size(); ++k) {
    resid = std::max(resid, feasibility_residual(cons[k], out.variables[k]));
  }
  out.report.feasibility_residual = resid;
  out.report.converged = converged && proj_ok && resid <= 1e-6;
  return out;
}

}  // namespace

OracleResult projected_gradient(const MatrixObjective& f, const std::vector<PowerConstraint>& constraints,
                                const std::vector<CMatrix>& init, const GradientOptions& opts) {
  if (constraints.size() != init.size()) throw InvalidInput("projected_gradient: one constraint per variable");
  Rng rng(opts.seed);
  if (opts.check_gradient) {
    const double err = gradient_check(f, init, rng);
    if (err > 1e-4) throw InvalidInput("projected_gradient: gradient check failed (rel err " + std::to_string(err) + ")");
  }
  OracleResult best = ascend(f, constraints, init, opts);
  int total_iters = best.report.iterations;
  for (int r = 1; r < opts.restarts; ++r) {
    std::vector<CMatrix> start(init.size());
    for (size_t k = 0; k < init.size(); ++k) {
      start[k] = random_feasible(constraints[k], init[k].rows(), init[k].cols(), rng);
    }
    OracleResult cand = ascend(f, constraints, start, opts);
    total_iters += cand.report.iterations;
    if (cand.report.best_objective > best.report.best_objective) best = std::move(cand);
  }
  best.report.iterations = total_iters;
  return best;
}

CMatrix random_feasible(const PowerConstraint& c, Index rows, Index cols, Rng& rng) {
  const Index r = std::min(rows, cols);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const CMatrix u = random_unitary(rows, rng);
  const CMatrix v = random_unitary(cols, rng);
  RVector s(r);
  for (Index i = 0; i < r; ++i) s(i) = unit(rng);
  CMatrix y = u.leftCols(r) * s.cast<Complex>().asDiagonal() * v.leftCols(r).adjoint();
  CMatrix out;
  if (const auto* sh = std::get_if<ShapingConstraint>(&c)) {
    // Singular values of y are at most one, so root * y stays under the shape.
    out = hermitian_sqrt(sh->shape) * y;
  } else if (const auto* j = std::get_if<JointConstraint>(&c)) {
    RVector t = s * std::sqrt(j->cap);
    const double energy = t.squaredNorm();
    const double limit = j->total * unit(rng);
    if (energy > limit && energy > 0.0) t *= std::sqrt(limit / energy);
    out = u.leftCols(r) * t.cast<Complex>().asDiagonal() * v.leftCols(r).adjoint();
  } else {
    const double scale = feasible_scale(c, y);
    out = (std::isfinite(scale) ? scale * unit(rng) : 0.0) * y;
  }
  if (feasibility_residual(c, out) > 1e-9) out *= 1.0 - 1e-9;
  return out;
}

bool pareto_dominance_check(const CMatrix& candidate, const CMatrix& pi, const PowerConstraint& c, int samples,
                            Rng& rng) {
  auto spectrum = [&](const CMatrix& f) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(f.adjoint() * pi * f, Eigen::EigenvaluesOnly);
    return RVector(es.eigenvalues().reverse());
  };
  const RVector base = spectrum(candidate);
  auto dominates = [&](const CMatrix& f) {
    const RVector lam = spectrum(f);
    bool strict = false;
    for (Index i = 0; i < lam.size(); ++i) {
      if (lam(i) < base(i) - 1e-9 * std::max(1.0, std::abs(base(i)))) return false;
      if (lam(i) > base(i) + 1e-6) strict = true;
    }
    return strict;
  };
  auto to_boundary = [&](const CMatrix& f) {
    const double s = feasible_scale(c, f);
    return std::isfinite(s) ? CMatrix(s * (1.0 - 1e-12) * f) : f;
  };
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::max(candidate.norm(), 1e-3);
  for (int t = 0; t < samples; ++t) {
    CMatrix f;
    if (t % 2 == 0) {
      f = to_boundary(random_feasible(c, candidate.rows(), candidate.cols(), rng));
    } else {
      const double eps = std::pow(10.0, -1.0 - 3.0 * std::abs(normal(rng)) / 2.0);
      f = to_boundary(candidate + eps * scale * complex_gaussian(candidate.rows(), candidate.cols(), rng));
    }
    if (feasibility_residual(c, f) > 1e-9) continue;
    if (dominates(f)) return false;
  }
  return true;
}

RVector grid_waterfill(const RVector& gains, double budget, double cap, double step) {
  const Index n = gains.size();
  if (n == 0) throw InvalidInput("grid_waterfill: empty gains");
  if (n > 3) throw UnsupportedRank("grid_waterfill: at most three channels");
  if (!(budget > 0.0) || !(step > 0.0)) throw InvalidInput("grid_waterfill: budget and step must be positive");
  const double hi = std::min(cap, budget);
  auto objective = [&](const RVector& p) { return (gains.array() * p.array()).log1p().sum(); };
  // Last channel takes whatever the others leave (objective is increasing).
  auto complete = [&](RVector p) {
    const double used = p.head(n - 1).sum();
    p(n - 1) = std::clamp(budget - used, 0.0, hi);
    return p;
  };
  if (n == 1) {
    RVector p(1);
    p(0) = hi;
    return p;
  }
  auto search = [&](const RVector& centre, double width, double h) {
    RVector best = complete(centre);
    double best_value = objective(best);
    const int steps = static_cast<int>(std::ceil(2.0 * width / h));
    RVector p = RVector::Zero(n);
    auto visit = [&](const RVector& q) {
      if (q.head(n - 1).sum() > budget + 1e-12) return;
      const RVector full = complete(q);
      const double v = objective(full);
      if (v > best_value) {
        best_value = v;
        best = full;
      }
    };
    auto axis = [&](Index k, int i) {
      const double lo = std::max(0.0, centre(k) - width);
      return std::min(hi, lo + i * h);
    };
    for (int i = 0; i <= steps; ++i) {
      p(0) = axis(0, i);
      if (n == 2) {
        visit(p);
        continue;
      }
      for (int j = 0; j <= steps; ++j) {
        p(1) = axis(1, j);
        visit(p);
      }
    }
    return best;
  };
  const double coarse = std::max(step, hi / 400.0);
  RVector centre = RVector::Constant(n, 0.5 * hi);
  RVector best = search(centre, 0.5 * hi + coarse, coarse);
  for (int round = 0; round < 200; ++round) {
    const RVector next = search(best, 3.0 * coarse > 50 * step ? 50 * step : 3.0 * coarse, step);
    if ((next - best).cwiseAbs().maxCoeff() < 0.5 * step) break;
    best = next;
  }
  return best;
}

MatrixObjective single_user_log_det(const CMatrix& pi) {
  MatrixObjective f;
  f.value = [pi](const std::vector<CMatrix>& x) {
    const CMatrix s = x[0].adjoint() * pi * x[0];
    return log_det_hpd(CMatrix::Identity(s.rows(), s.cols()) + s);
  };
  f.gradient = [pi](const std::vector<CMatrix>& x) {
    const CMatrix s = CMatrix::Identity(x[0].cols(), x[0].cols()) + x[0].adjoint() * pi * x[0];
    return std::vector<CMatrix>{2.0 * pi * x[0] * s.inverse()};
  };
  return f;
}

MatrixObjective uplink_sum_rate_objective(const std::vector<CMatrix>& channels, const CMatrix& noise_cov,
                                          const std::vector<CMatrix>& weights) {
  const double base = log_det_hpd(noise_cov);
  auto total = [channels, noise_cov, weights](const std::vector<CMatrix>& x) {
    CMatrix a = noise_cov;
    for (size_t k = 0; k < x.size(); ++k) {
      const CMatrix hx = channels[k] * x[k];
      a += hx * weights[k] * hx.adjoint();
    }
    return a;
  };
  MatrixObjective f;
  f.value = [total, base](const std::vector<CMatrix>& x) { return log_det_hpd(total(x)) - base; };
  f.gradient = [total, channels, weights](const std::vector<CMatrix>& x) {
    const CMatrix inv = total(x).llt().solve(CMatrix::Identity(channels[0].rows(), channels[0].rows()));
    std::vector<CMatrix> g(x.size());
    for (size_t k = 0; k < x.size(); ++k) g[k] = 2.0 * channels[k].adjoint() * inv * channels[k] * x[k] * weights[k];
    return g;
  };
  return f;
}

namespace {

struct SensorParts {
  CMatrix source_inv;
  std::vector<CMatrix> gram;  // H^H R^-1 H per sensor
  std::vector<Index> offsets;
  Index total = 0;
};

SensorParts sensor_parts(const CMatrix& source_cov, const std::vector<CMatrix>& channels,
                         const std::vector<CMatrix>& noise_covs) {
  SensorParts p;
  p.source_inv = source_cov.llt().solve(CMatrix::Identity(source_cov.rows(), source_cov.cols()));
  p.source_inv = 0.5 * (p.source_inv + p.source_inv.adjoint());
  for (size_t k = 0; k < channels.size(); ++k) {
    p.gram.push_back(channels[k].adjoint() * noise_covs[k].llt().solve(channels[k]));
  }
  return p;
}

CMatrix sensor_information(const SensorParts& p, const std::vector<CMatrix>& x) {
  CMatrix b = p.source_inv;
  Index off = 0;
  for (size_t k = 0; k < x.size(); ++k) {
    const Index nk = x[k].cols();
    b.block(off, off, nk, nk) += x[k].adjoint() * p.gram[k] * x[k];
    off += nk;
  }
  return b;
}

}  // namespace

MatrixObjective sensor_mutual_info_objective(const CMatrix& source_cov, const std::vector<CMatrix>& channels,
                                             const std::vector<CMatrix>& noise_covs) {
  const SensorParts parts = sensor_parts(source_cov, channels, noise_covs);
  const double base = log_det_hpd(parts.source_inv);
  MatrixObjective f;
  f.value = [parts, base](const std::vector<CMatrix>& x) { return log_det_hpd(sensor_information(parts, x)) - base; };
  f.gradient = [parts](const std::vector<CMatrix>& x) {
    const CMatrix b = sensor_information(parts, x);
    const CMatrix inv = b.llt().solve(CMatrix::Identity(b.rows(), b.cols()));
    std::vector<CMatrix> g(x.size());
    Index off = 0;
    for (size_t k = 0; k < x.size(); ++k) {
      const Index nk = x[k].cols();
      g[k] = 2.0 * parts.gram[k] * x[k] * inv.block(off, off, nk, nk);
      off += nk;
    }
    return g;
  };
  return f;
}

MatrixObjective sensor_lmmse_objective(const CMatrix& source_cov, const std::vector<CMatrix>& channels,
                                       const std::vector<CMatrix>& noise_covs) {
  const SensorParts parts = sensor_parts(source_cov, channels, noise_covs);
  MatrixObjective f;
  f.value = [parts](const std::vector<CMatrix>& x) {
    const CMatrix b = sensor_information(parts, x);
    return -b.llt().solve(CMatrix::Identity(b.rows(), b.cols())).trace().real();
  };
  f.gradient = [parts](const std::vector<CMatrix>& x) {
    const CMatrix b = sensor_information(parts, x);
    const CMatrix inv = b.llt().solve(CMatrix::Identity(b.rows(), b.cols()));
    const CMatrix inv2 = inv * inv;
    std::vector<CMatrix> g(x.size());
    Index off = 0;
    for (size_t k = 0; k < x.size(); ++k) {
      const Index nk = x[k].cols();
      g[k] = 2.0 * parts.gram[k] * x[k] * inv2.block(off, off, nk, nk);
      off += nk;
    }
    return g;
  };
  return f;
}

}  // namespace mmo
