// SPDX-License-Identifier: Apache-2.0
#include "mmo/sensor.hpp"

#include <algorithm>
#include <cmath>

#include "mmo/spectral.hpp"

namespace mmo {

std::vector<Index> SensorScenario::block_dims() const {
  std::vector<Index> dims;
  dims.reserve(per_sensor_cov.size());
  for (const auto& r : per_sensor_cov) dims.push_back(r.rows());
  return dims;
}

Index SensorScenario::block_offset(Index k) const {
  Index off = 0;
  for (Index j = 0; j < k; ++j) off += per_sensor_cov[static_cast<size_t>(j)].rows();
  return off;
}

SensorScenario SensorScenario::make(CMatrix source_cov, const std::vector<Index>& block_dims,
                                    std::vector<CMatrix> channels, std::vector<CMatrix> noise_covs,
                                    std::vector<PowerConstraint> constraints) {
  SensorScenario sc;
  sc.source_cov = std::move(source_cov);
  Index off = 0;
  for (Index d : block_dims) {
    if (off + d > sc.source_cov.rows()) throw InvalidInput("sensor: block sizes exceed the source dimension");
    sc.per_sensor_cov.push_back(sc.source_cov.block(off, off, d, d));
    off += d;
  }
  sc.channels = std::move(channels);
  sc.noise_covs = std::move(noise_covs);
  sc.constraints = std::move(constraints);
  sc.validate();
  return sc;
}

void SensorScenario::validate() const {
  const auto k = channels.size();
  if (k == 0) throw InvalidInput("sensor: no sensors");
  if (noise_covs.size() != k || per_sensor_cov.size() != k || constraints.size() != k) {
    throw InvalidInput("sensor: per-sensor lists differ in length");
  }
  Index total = 0;
  for (const auto& r : per_sensor_cov) total += r.rows();
  if (source_cov.rows() != total || source_cov.cols() != total) throw InvalidInput("sensor: source covariance size mismatch");
  if (min_eigenvalue(source_cov) <= 0.0) throw InvalidInput("sensor: source covariance must be positive definite");
  for (size_t i = 0; i < k; ++i) {
    const Index off = block_offset(static_cast<Index>(i));
    const Index d = per_sensor_cov[i].rows();
    if ((source_cov.block(off, off, d, d) - per_sensor_cov[i]).cwiseAbs().maxCoeff() > 1e-12) {
      throw InvalidInput("sensor: per-sensor covariance differs from the diagonal block of C_x");
    }
    if (min_eigenvalue(per_sensor_cov[i]) <= 1e-12 * std::max(1.0, max_eigenvalue(per_sensor_cov[i]))) {
      throw InvalidInput("sensor: per-sensor covariance is rank deficient");
    }
    if (noise_covs[i].rows() != channels[i].rows() || min_eigenvalue(noise_covs[i]) <= 0.0) {
      throw InvalidInput("sensor: noise covariance must be PD and match the channel rows");
    }
    mmo::validate(constraints[i], channels[i].cols());
  }
}

RMatrix build_permutation(const std::vector<Index>& block_dims, Index k) {
  const auto nb = static_cast<Index>(block_dims.size());
  if (k < 0 || k >= nb) throw InvalidInput("build_permutation: block index out of range");
  std::vector<Index> offsets(block_dims.size() + 1, 0);
  for (size_t i = 0; i < block_dims.size(); ++i) offsets[i + 1] = offsets[i] + block_dims[i];
  const Index n = offsets.back();
  std::vector<Index> order(static_cast<size_t>(nb));
  for (Index i = 0; i < nb; ++i) order[static_cast<size_t>(i)] = i;
  std::swap(order[0], order[static_cast<size_t>(k)]);
  RMatrix p = RMatrix::Zero(n, n);
  Index row = 0;
  for (Index b : order) {
    const auto bu = static_cast<size_t>(b);
    for (Index j = 0; j < block_dims[bu]; ++j) p(row++, offsets[bu] + j) = 1.0;
  }
  return p;
}

CMatrix schur_complement_phi(const CMatrix& p11, const CMatrix& p12, const CMatrix& p21, const CMatrix& p22,
                             const CMatrix& xi) {
  if (p22.rows() == 0) return 0.5 * (p11 + p11.adjoint());
  const CMatrix inner = p22 + xi;
  Eigen::LLT<CMatrix> llt(0.5 * (inner + inner.adjoint()));
  if (llt.info() != Eigen::Success) throw NotPsd("schur_complement_phi: P22 + Xi is not positive definite");
  const CMatrix phi = p11 - p12 * llt.solve(p21);
  return 0.5 * (phi + phi.adjoint());
}

namespace {

CMatrix gram(const SensorScenario& sc, Index k) {
  const auto ku = static_cast<size_t>(k);
  const CMatrix g = sc.channels[ku].adjoint() * sc.noise_covs[ku].llt().solve(sc.channels[ku]);
  return 0.5 * (g + g.adjoint());
}

CMatrix information_block(const SensorScenario& sc, const std::vector<CMatrix>& x, Index k) {
  const CMatrix& xk = x[static_cast<size_t>(k)];
  return xk.adjoint() * gram(sc, k) * xk;
}

CMatrix inverse_source(const SensorScenario& sc) {
  Eigen::LLT<CMatrix> llt(sc.source_cov);
  if (llt.info() != Eigen::Success) throw NotPsd("sensor: source covariance is not positive definite");
  const CMatrix inv = llt.solve(CMatrix::Identity(sc.source_cov.rows(), sc.source_cov.cols()));
  return 0.5 * (inv + inv.adjoint());
}

CMatrix phi_with_inverse(const SensorScenario& sc, const CMatrix& c_inv, const std::vector<CMatrix>& x, Index k) {
  const auto dims = sc.block_dims();
  const RMatrix p = build_permutation(dims, k);
  const CMatrix pc = p.cast<Complex>() * c_inv * p.transpose().cast<Complex>();
  const Index nk = dims[static_cast<size_t>(k)];
  const Index rest = pc.rows() - nk;
  return schur_complement_phi(pc.topLeftCorner(nk, nk), pc.topRightCorner(nk, rest), pc.bottomLeftCorner(rest, nk),
                              pc.bottomRightCorner(rest, rest), sensor_xi(sc, x, k));
}

}  // namespace

CMatrix sensor_xi(const SensorScenario& sc, const std::vector<CMatrix>& x, Index k) {
  const auto dims = sc.block_dims();
  const auto nb = static_cast<Index>(dims.size());
  std::vector<Index> order;
  for (Index i = 1; i < nb; ++i) order.push_back(i == k ? 0 : i);
  Index total = 0;
  for (Index b : order) total += dims[static_cast<size_t>(b)];
  CMatrix xi = CMatrix::Zero(total, total);
  Index off = 0;
  for (Index b : order) {
    const Index d = dims[static_cast<size_t>(b)];
    xi.block(off, off, d, d) = information_block(sc, x, b);
    off += d;
  }
  return xi;
}

CMatrix sensor_phi(const SensorScenario& sc, const std::vector<CMatrix>& x, Index k) {
  return phi_with_inverse(sc, inverse_source(sc), x, k);
}

CMatrix optimal_rotation_sensor(const CMatrix& f, const CMatrix& h, const CMatrix& noise_cov,
                                const CMatrix& phi_term) {
  const CMatrix s = f.adjoint() * h.adjoint() * noise_cov.llt().solve(h) * f;
  const HermitianSorted snr = sorted_evd(s);
  const HermitianSorted ph = sorted_evd_ascending(phi_term);
  return snr.eigvecs * ph.eigvecs.adjoint();
}

namespace {

// R^{1/2} Phi R^{1/2}: the term that pairs with F^H G F after whitening.
CMatrix whitened_phi(const SensorScenario& sc, const CMatrix& phi, Index k) {
  const CMatrix root = hermitian_sqrt(sc.per_sensor_cov[static_cast<size_t>(k)]);
  const CMatrix out = root * phi * root;
  return 0.5 * (out + out.adjoint());
}

StructuredSolution compressor_for(const SensorScenario& sc, const CMatrix& phi, Index k,
                                  const std::optional<RVector>& warm) {
  const auto ku = static_cast<size_t>(k);
  const CMatrix term = whitened_phi(sc, phi, k);
  const RVector floors = sorted_evd_ascending(term).eigvals;
  const RVector inv_floors = floors.cwiseMax(1e-300).cwiseInverse();
  const Index cols = sc.per_sensor_cov[ku].rows();
  return solve_structure(gram(sc, k), sc.constraints[ku], weighted_log_scalarizer(inv_floors), cols, warm);
}

}  // namespace

StructuredSolution update_compressor(const SensorScenario& sc, const FusionState& state, Index k) {
  const auto ku = static_cast<size_t>(k);
  std::optional<RVector> warm;
  if (ku < state.compressors_F.size()) warm = state.compressors_F[ku].weights_alpha;
  return compressor_for(sc, sensor_phi(sc, state.compressors_X, k), k, warm);
}

double mutual_information(const SensorScenario& sc, const std::vector<CMatrix>& x) {
  const CMatrix c_inv = inverse_source(sc);
  CMatrix b = c_inv;
  for (Index k = 0; k < sc.sensors(); ++k) {
    const Index off = sc.block_offset(k);
    const Index d = sc.per_sensor_cov[static_cast<size_t>(k)].rows();
    b.block(off, off, d, d) += information_block(sc, x, k);
  }
  return log_det_hpd(b) - log_det_hpd(c_inv);
}

FusionState initial_fusion_state(const SensorScenario& sc) {
  sc.validate();
  FusionState st;
  for (Index k = 0; k < sc.sensors(); ++k) {
    const auto ku = static_cast<size_t>(k);
    const Index m = sc.channels[ku].cols();
    const Index n = sc.per_sensor_cov[ku].rows();
    const Index r = std::min(m, n);
    double c = feasible_scale(sc.constraints[ku], CMatrix::Identity(m, n));
    if (!std::isfinite(c)) c = 0.0;
    StructuredSolution f = make_solution(CMatrix::Identity(m, r), RVector::Constant(r, c), n);
    st.rotations.push_back(CMatrix::Identity(n, n));
    st.compressors_X.push_back(f.dense * hermitian_inv_sqrt(sc.per_sensor_cov[ku]));
    st.compressors_F.push_back(std::move(f));
  }
  st.objective_trace.push_back(mutual_information(sc, st.compressors_X));
  return st;
}

FusionState alternating_solve_sensors(const SensorScenario& sc, const std::optional<FusionState>& init,
                                      const StopRule& stop) {
  sc.validate();
  FusionState st = init ? *init : initial_fusion_state(sc);
  for (Index k = 0; k < sc.sensors(); ++k) {
    const auto ku = static_cast<size_t>(k);
    const CMatrix y = st.compressors_X[ku] * hermitian_sqrt(sc.per_sensor_cov[ku]);
    if (!is_feasible(sc.constraints[ku], y, 1e-6)) {
      throw Infeasible("sensor: initial compressor of sensor " + std::to_string(k) + " violates its constraint");
    }
  }
  if (st.objective_trace.empty()) st.objective_trace.push_back(mutual_information(sc, st.compressors_X));
  const CMatrix c_inv = inverse_source(sc);
  double current = st.objective_trace.back();
  bool inner_ok = true;
  st.converged = false;
  for (int it = 0; it < stop.max_iter; ++it) {
    for (Index k = 0; k < sc.sensors(); ++k) {
      const auto ku = static_cast<size_t>(k);
      const CMatrix phi = phi_with_inverse(sc, c_inv, st.compressors_X, k);
      StructuredSolution f = compressor_for(sc, phi, k, st.compressors_F[ku].weights_alpha);
      const CMatrix q = optimal_rotation_sensor(f.dense, sc.channels[ku], sc.noise_covs[ku], whitened_phi(sc, phi, k));
      std::vector<CMatrix> trial = st.compressors_X;
      trial[ku] = f.dense * q * hermitian_inv_sqrt(sc.per_sensor_cov[ku]);
      const double value = mutual_information(sc, trial);
      if (value >= current - 1e-12) {
        inner_ok = inner_ok && f.converged;
        st.compressors_F[ku] = std::move(f);
        st.rotations[ku] = q;
        st.compressors_X = std::move(trial);
        current = value;
      }
    }
    st.iterations = it + 1;
    const double previous = st.objective_trace.back();
    st.objective_trace.push_back(current);
    if (std::abs(current - previous) <= stop.rel_tol * std::max(1.0, std::abs(current))) {
      st.converged = true;
      break;
    }
  }
  st.converged = st.converged && inner_ok;
  return st;
}

}  // namespace mmo
