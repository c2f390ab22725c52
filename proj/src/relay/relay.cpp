// SPDX-License-Identifier: Apache-2.0
#include "mmo/relay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mmo/gmd.hpp"
#include "mmo/spectral.hpp"

namespace mmo {

void ObjectiveSpec::validate(Index streams) const {
  if (kind != ObjectiveKind::WeightedMse) return;
  if (!weight_matrix) throw InvalidInput("objective: weighted MSE needs a weight matrix");
  const CMatrix& w = *weight_matrix;
  if (w.rows() != streams || w.cols() != streams) throw InvalidInput("objective: weight matrix must match the stream count");
  if ((w - w.adjoint()).norm() > 1e-8 * std::max(1.0, w.norm())) throw InvalidInput("objective: weight matrix must be Hermitian");
  if (min_eigenvalue(w) < -1e-10 * std::max(1.0, w.norm())) throw NotPsd("objective: weight matrix must be PSD");
}

ObjectiveKind objective_kind_from_index(int index) {
  if (index < 1 || index > 6) throw InvalidInput("objective index must lie in 1..6");
  return static_cast<ObjectiveKind>(index);
}

Index RelayScenario::input_dim(Index k) const {
  return k == 0 ? source_dim : est_channels[static_cast<size_t>(k - 1)].rows();
}

void RelayScenario::validate() const {
  const auto k = est_channels.size();
  if (k == 0) throw InvalidInput("relay: at least one hop is required");
  if (error_covs.size() != k || noise_vars.size() != k || constraints.size() != k) {
    throw InvalidInput("relay: per-hop lists must have equal length");
  }
  if (source_dim <= 0) throw InvalidInput("relay: source dimension must be positive");
  if (!(source_var > 0.0)) throw InvalidInput("relay: source variance must be positive");
  for (size_t i = 0; i < k; ++i) {
    const CMatrix& h = est_channels[i];
    if (h.rows() == 0 || h.cols() == 0 || !all_finite(h)) throw InvalidInput("relay: bad channel estimate");
    const CMatrix& psi = error_covs[i];
    if (psi.rows() != h.cols() || psi.cols() != h.cols()) throw InvalidInput("relay: error covariance size mismatch");
    if (min_eigenvalue(psi) < -1e-10 * std::max(1.0, psi.norm())) throw NotPsd("relay: error covariance must be PSD");
    if (!(noise_vars[i] > 0.0)) throw InvalidInput("relay: noise variance must be positive");
    mmo::validate(constraints[i], h.cols());
  }
  objective.validate(source_dim);
}

double hop_noise_level(const CMatrix& f, const CMatrix& psi, double noise_var) {
  return noise_var + (f * f.adjoint() * psi).trace().real();
}

CMatrix hop_amplification(const CMatrix& f, const CMatrix& h_est, double level) {
  const CMatrix t = h_est * f;
  const CMatrix s = t * t.adjoint() / level + CMatrix::Identity(t.rows(), t.rows());
  return hermitian_sqrt(s);
}

CMatrix hop_operator(const CMatrix& f, const CMatrix& h_est, double level) {
  const CMatrix m = hop_amplification(f, h_est, level);
  return m.llt().solve(h_est * f) / std::sqrt(level);
}

std::vector<CMatrix> inner_rotations(const std::vector<CMatrix>& hop_ops) {
  std::vector<CMatrix> q(hop_ops.size());
  if (hop_ops.empty()) return q;
  q[0] = CMatrix::Identity(hop_ops[0].cols(), hop_ops[0].cols());
  SingularTriple prev = sorted_svd(hop_ops[0]);
  for (size_t k = 1; k < hop_ops.size(); ++k) {
    SingularTriple cur = sorted_svd(hop_ops[k]);
    q[k] = cur.right * prev.left.adjoint();
    prev = std::move(cur);
  }
  return q;
}

CMatrix dft_matrix(Index n) {
  CMatrix d(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(j * k) / static_cast<double>(n);
      d(j, k) = scale * Complex(std::cos(angle), std::sin(angle));
    }
  }
  return d;
}

namespace {

// Products of aligned singular values along the chain, one per source stream.
RVector chain_gains(const std::vector<CMatrix>& hop_ops) {
  const Index n = hop_ops.front().cols();
  RVector g = RVector::Ones(n);
  for (const CMatrix& a : hop_ops) {
    const RVector s = sorted_svd(a).singvals;
    for (Index i = 0; i < n; ++i) g(i) *= i < s.size() ? s(i) : 0.0;
  }
  return g;
}

RVector weight_profile(const ObjectiveSpec& spec, Index streams) {
  RVector w = sorted_evd(*spec.weight_matrix).eigvals.cwiseMax(0.0);
  w.conservativeResize(streams);
  return w;
}

}  // namespace

CMatrix first_rotation(const ObjectiveSpec& spec, const std::vector<CMatrix>& hop_ops) {
  if (hop_ops.empty()) throw InvalidInput("first_rotation: no hops");
  const CMatrix v = sorted_svd(hop_ops.front()).right;
  const Index n = v.rows();
  switch (spec.kind) {
    case ObjectiveKind::WeightedMse:
      return v * sorted_evd(*spec.weight_matrix).eigvecs.adjoint();
    case ObjectiveKind::MaxMse:
      return v * dft_matrix(n).adjoint();
    case ObjectiveKind::MaxCholesky: {
      const RVector g = chain_gains(hop_ops);
      const RVector d = (1.0 - g.array().square()).max(1e-300).sqrt().matrix();
      const GmdFactors gmd = gmd_diagonal(d);
      return v * gmd.p.cast<Complex>();
    }
    default:
      return v;
  }
}

std::vector<CMatrix> cascade_rotations(const ObjectiveSpec& spec, const std::vector<CMatrix>& hop_ops) {
  std::vector<CMatrix> q = inner_rotations(hop_ops);
  q[0] = first_rotation(spec, hop_ops);
  return q;
}

CMatrix cascade_product(const std::vector<CMatrix>& hop_ops, const std::vector<CMatrix>& rotations) {
  if (hop_ops.size() != rotations.size() || hop_ops.empty()) throw InvalidInput("cascade_product: size mismatch");
  CMatrix b = hop_ops[0] * rotations[0];
  for (size_t k = 1; k < hop_ops.size(); ++k) b = hop_ops[k] * rotations[k] * b;
  return b;
}

CMatrix mse_tilde(double source_var, const CMatrix& product) {
  const Index n = product.cols();
  CMatrix m = source_var * (CMatrix::Identity(n, n) - product.adjoint() * product);
  return 0.5 * (m + m.adjoint());
}

CMatrix feedback_matrix(const CMatrix& mse_tilde_matrix) {
  Eigen::LLT<CMatrix> llt(mse_tilde_matrix);
  if (llt.info() != Eigen::Success) throw NotPsd("feedback_matrix: MSE matrix is not positive definite");
  const CMatrix l = llt.matrixL();
  const CMatrix l_inv = l.triangularView<Eigen::Lower>().solve(CMatrix::Identity(l.rows(), l.cols()));
  CMatrix c = l.diagonal().asDiagonal() * l_inv;
  for (Index j = 0; j < c.cols(); ++j) {
    c(j, j) = 1.0;
    for (Index i = 0; i < j; ++i) c(i, j) = 0.0;
  }
  return c;
}

MseMatrix cascade_mse_matrix(double source_var, const CMatrix& product, const CMatrix& feedback) {
  MseMatrix out;
  out.matrix = feedback * mse_tilde(source_var, product) * feedback.adjoint();
  out.matrix = 0.5 * (out.matrix + out.matrix.adjoint());
  Eigen::LLT<CMatrix> llt(out.matrix);
  if (llt.info() == Eigen::Success) out.cholesky_L = llt.matrixL();
  return out;
}

double objective_from_mse(const ObjectiveSpec& spec, double source_var, const MseMatrix& mse) {
  const RVector diag = mse.matrix.diagonal().real();
  switch (spec.kind) {
    case ObjectiveKind::LogDetMse:
      return log_det_hpd(mse.matrix);
    case ObjectiveKind::WeightedMse:
      return (*spec.weight_matrix * mse.matrix).trace().real();
    case ObjectiveKind::MaxMse:
    case ObjectiveKind::MaxCholesky:
      return diag.maxCoeff();
    case ObjectiveKind::SumLogMse:
      return diag.array().log().sum();
    case ObjectiveKind::NegSumInvCholesky:
      return -(source_var / diag.array()).sum();
  }
  return 0.0;
}

std::vector<RVector> hop_eigenvalues(const RelayScenario& sc, const std::vector<CMatrix>& forwarders) {
  std::vector<RVector> out;
  out.reserve(forwarders.size());
  for (size_t k = 0; k < forwarders.size(); ++k) {
    const CMatrix& f = forwarders[k];
    const double level = hop_noise_level(f, sc.error_covs[k], sc.noise_vars[k]);
    const CMatrix t = sc.est_channels[k] * f;
    out.push_back(sorted_evd(t.adjoint() * t / level).eigvals.cwiseMax(0.0));
  }
  return out;
}

namespace {

RVector chain_product(const std::vector<RVector>& hop_eigs, Index streams, Index skip = -1) {
  RVector prod = RVector::Ones(streams);
  for (size_t k = 0; k < hop_eigs.size(); ++k) {
    if (static_cast<Index>(k) == skip) continue;
    const RVector& lam = hop_eigs[k];
    for (Index i = 0; i < streams; ++i) prod(i) *= i < lam.size() ? lam(i) / (1.0 + lam(i)) : 0.0;
  }
  return prod;
}

}  // namespace

RVector eigen_mse_profile(double source_var, const std::vector<RVector>& hop_eigs, Index streams) {
  return source_var * (1.0 - chain_product(hop_eigs, streams).array()).matrix();
}

double f_eigen(EigenForm form, double source_var, const std::vector<RVector>& hop_eigs, Index streams) {
  const RVector prod = chain_product(hop_eigs, streams);
  if (form == EigenForm::SumMse) return source_var * (1.0 - prod.array()).sum();
  return -(1.0 - prod.array()).log().sum();
}

double objective_from_eigen(const ObjectiveSpec& spec, double source_var, const std::vector<RVector>& hop_eigs,
                            Index streams) {
  const RVector d = eigen_mse_profile(source_var, hop_eigs, streams);
  switch (spec.kind) {
    case ObjectiveKind::LogDetMse:
    case ObjectiveKind::SumLogMse:
      return d.array().log().sum();
    case ObjectiveKind::WeightedMse:
      return weight_profile(spec, streams).dot(d);
    case ObjectiveKind::MaxMse:
      return d.mean();
    case ObjectiveKind::MaxCholesky:
      return std::exp(d.array().log().mean());
    case ObjectiveKind::NegSumInvCholesky:
      return -(source_var / d.array()).sum();
  }
  return 0.0;
}

CascadeEvaluation evaluate_cascade(const RelayScenario& sc, const std::vector<CMatrix>& forwarders) {
  CascadeEvaluation ev;
  for (size_t k = 0; k < forwarders.size(); ++k) {
    const double level = hop_noise_level(forwarders[k], sc.error_covs[k], sc.noise_vars[k]);
    ev.hop_ops.push_back(hop_operator(forwarders[k], sc.est_channels[k], level));
  }
  ev.rotations = cascade_rotations(sc.objective, ev.hop_ops);
  ev.product = cascade_product(ev.hop_ops, ev.rotations);
  const Index n = ev.product.cols();
  ev.feedback = sc.objective.uses_feedback() ? feedback_matrix(mse_tilde(sc.source_var, ev.product))
                                             : CMatrix::Identity(n, n);
  ev.mse = cascade_mse_matrix(sc.source_var, ev.product, ev.feedback);
  ev.objective = objective_from_mse(sc.objective, sc.source_var, ev.mse);
  return ev;
}

std::vector<CMatrix> dense_forwarders(const HopState& state) {
  std::vector<CMatrix> out;
  out.reserve(state.forwarders_F.size());
  for (const auto& f : state.forwarders_F) out.push_back(f.dense);
  return out;
}

RelayScenario perfect_csi(const RelayScenario& sc) {
  RelayScenario out = sc;
  for (auto& psi : out.error_covs) psi.setZero();
  return out;
}

double relay_sum_rate(const RelayScenario& sc, const std::vector<CMatrix>& forwarders) {
  return f_eigen(EigenForm::SumRate, sc.source_var, hop_eigenvalues(sc, forwarders), sc.source_dim);
}

namespace {

Scalarizer hop_scalarizer(const RelayScenario& sc, const std::vector<RVector>& hop_eigs, Index k, Index modes) {
  const Index streams = sc.source_dim;
  const RVector coupling = chain_product(hop_eigs, streams, k);
  RVector weights = RVector::Ones(streams);
  UtilityShape shape = UtilityShape::CascadeRate;
  switch (sc.objective.kind) {
    case ObjectiveKind::WeightedMse:
      shape = UtilityShape::CascadeMse;
      weights = weight_profile(sc.objective, streams);
      break;
    case ObjectiveKind::MaxMse:
      shape = UtilityShape::CascadeMse;
      break;
    case ObjectiveKind::NegSumInvCholesky:
      shape = UtilityShape::CascadeSinr;
      break;
    default:
      break;
  }
  std::vector<ChannelUtility> u(static_cast<size_t>(modes));
  for (Index i = 0; i < modes; ++i) {
    auto& m = u[static_cast<size_t>(i)];
    m.shape = shape;
    m.coupling = i < streams ? std::clamp(coupling(i), 0.0, 1.0) : 0.0;
    m.weight = i < streams ? weights(i) : 0.0;
  }
  return utility_scalarizer(std::move(u));
}

// F = sigma Z / sqrt(1 - Tr(Z Z^H Psi)) with the denominator kept away from zero.
StructuredSolution lift_whitened(CMatrix left, RVector gains, const CMatrix& psi, double noise_var, Index cols,
                                 const Tolerances& tol) {
  double t = (left * gains.cwiseAbs2().asDiagonal() * left.adjoint() * psi).trace().real();
  if (t > 1.0 - tol.denominator_margin) {
    gains *= std::sqrt((1.0 - tol.denominator_margin) / t);
    t = 1.0 - tol.denominator_margin;
  }
  left *= std::sqrt(noise_var / (1.0 - t));
  return make_solution(std::move(left), std::move(gains), cols);
}

}  // namespace

StructuredSolution robust_update_hop(const RelayScenario& sc, const HopState& state, Index k) {
  const auto kk = static_cast<size_t>(k);
  const Tolerances& tol = default_tolerances();
  const Index cols = sc.input_dim(k);
  const CMatrix& h = sc.est_channels[kk];
  const CMatrix& psi = sc.error_covs[kk];
  const double sigma2 = sc.noise_vars[kk];
  const PowerConstraint& c = sc.constraints[kk];
  const Index n = h.cols();
  const Index modes = std::min(n, cols);

  if (const auto* s = std::get_if<ShapingConstraint>(&c)) return solve_shaping(s->shape, cols, tol);

  const std::vector<RVector> eigs = hop_eigenvalues(sc, dense_forwarders(state));
  const Scalarizer scalarize = hop_scalarizer(sc, eigs, k, modes);
  StructuredSolution out;

  if (const auto* j = std::get_if<JointConstraint>(&c)) {
    const CMatrix whiten = hermitian_inv_sqrt(sigma2 * CMatrix::Identity(n, n) + j->total * psi);
    const CMatrix hw = h * whiten;
    const RVector psi_eigs = sorted_evd(psi).eigvals;
    const double cap = j->cap * (sigma2 + j->total * psi_eigs.minCoeff()) / (sigma2 + j->total * psi_eigs.maxCoeff());
    const StructuredSolution y = solve_joint(hw.adjoint() * hw, j->total, cap, scalarize, cols, tol);
    out = lift_whitened(whiten * y.left_basis, y.gains, psi, sigma2, cols, tol);
  } else {
    const auto& w = std::get<WeightedConstraint>(c);
    WeightedConstraint shifted = w;
    for (size_t i = 0; i < w.weights.size(); ++i) shifted.weights[i] = sigma2 * w.weights[i] + w.budgets[i] * psi;
    std::optional<RVector> alpha0;
    if (kk < state.forwarders_F.size()) alpha0 = state.forwarders_F[kk].weights_alpha;
    const StructuredSolution z = solve_weighted(h.adjoint() * h, shifted, scalarize, cols, alpha0, tol);
    out = lift_whitened(z.left_basis, z.gains, psi, sigma2, cols, tol);
    out.weights_alpha = z.weights_alpha;
    out.converged = z.converged;
  }
  if (!is_feasible(c, out.dense, tol.feasibility)) {
    const double s = feasible_scale(c, out.dense);
    out.gains *= std::min(1.0, s);
    out.assemble();
  }
  return out;
}

HopState initial_hop_state(const RelayScenario& sc) {
  sc.validate();
  HopState st;
  for (Index k = 0; k < sc.hops(); ++k) {
    const auto kk = static_cast<size_t>(k);
    const Index cols = sc.input_dim(k);
    const Index n = sc.est_channels[kk].cols();
    const PowerConstraint& c = sc.constraints[kk];
    if (const auto* s = std::get_if<ShapingConstraint>(&c)) {
      st.forwarders_F.push_back(solve_shaping(s->shape, cols));
      continue;
    }
    const Index r = std::min(n, cols);
    CMatrix left = CMatrix::Identity(n, r);
    const double scale = feasible_scale(c, left * CMatrix::Identity(r, cols));
    st.forwarders_F.push_back(make_solution(left, RVector::Constant(r, scale), cols));
  }
  return st;
}

namespace {

void finalize(const RelayScenario& sc, HopState& st) {
  const std::vector<CMatrix> fs = dense_forwarders(st);
  const CascadeEvaluation ev = evaluate_cascade(sc, fs);
  st.rotations_Q = ev.rotations;
  st.feedback_C = ev.feedback;
  st.amplifications_M.clear();
  st.noise_levels.clear();
  for (size_t k = 0; k < fs.size(); ++k) {
    const double level = hop_noise_level(fs[k], sc.error_covs[k], sc.noise_vars[k]);
    st.noise_levels.push_back(level);
    st.amplifications_M.push_back(hop_amplification(fs[k], sc.est_channels[k], level));
  }
}

}  // namespace

HopState cascade_solve(const RelayScenario& sc, const std::optional<HopState>& init, const StopRule& stop) {
  sc.validate();
  HopState st = init.value_or(initial_hop_state(sc));
  if (st.forwarders_F.size() != static_cast<size_t>(sc.hops())) throw InvalidInput("cascade_solve: initial state size mismatch");
  auto objective = [&](const HopState& s) {
    return objective_from_eigen(sc.objective, sc.source_var, hop_eigenvalues(sc, dense_forwarders(s)), sc.source_dim);
  };
  double current = objective(st);
  st.objective_trace = {current};
  st.converged = false;
  for (int it = 1; it <= stop.max_iter; ++it) {
    st.iterations = it;
    const double before = current;
    for (Index k = 0; k < sc.hops(); ++k) {
      HopState trial = st;
      trial.forwarders_F[static_cast<size_t>(k)] = robust_update_hop(sc, st, k);
      const double value = objective(trial);
      if (std::isfinite(value) && value <= current + 1e-12 * std::max(1.0, std::abs(current))) {
        st = std::move(trial);
        current = value;
      }
    }
    st.objective_trace.push_back(current);
    if (std::abs(before - current) <= stop.rel_tol * std::max(1.0, std::abs(current))) {
      st.converged = std::all_of(st.forwarders_F.begin(), st.forwarders_F.end(),
                                 [](const StructuredSolution& f) { return f.converged; });
      break;
    }
  }
  finalize(sc, st);
  return st;
}

}  // namespace mmo
