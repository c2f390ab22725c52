// SPDX-License-Identifier: Apache-2.0
#include "mmo/uplink.hpp"

#include <algorithm>
#include <cmath>

#include "mmo/spectral.hpp"

namespace mmo {

void UplinkScenario::validate() const {
  const auto k = channels.size();
  if (k == 0) throw InvalidInput("uplink: no users");
  if (weights.size() != k || constraints.size() != k) throw InvalidInput("uplink: per-user lists differ in length");
  const Index bs = noise_cov.rows();
  if (noise_cov.cols() != bs) throw InvalidInput("uplink: noise covariance must be square");
  if (min_eigenvalue(noise_cov) <= 0.0) throw InvalidInput("uplink: noise covariance must be positive definite");
  for (size_t i = 0; i < k; ++i) {
    if (channels[i].rows() != bs) throw InvalidInput("uplink: channel row count must match the BS antennas");
    if (weights[i].rows() != weights[i].cols()) throw InvalidInput("uplink: weight must be square");
    if (min_eigenvalue(weights[i]) <= 0.0) throw InvalidInput("uplink: weight must be positive definite");
    mmo::validate(constraints[i], channels[i].cols());
  }
}

CMatrix interference_covariance(const UplinkScenario& sc, const std::vector<CMatrix>& realized, Index k) {
  CMatrix out = sc.noise_cov;
  for (Index j = 0; j < sc.users(); ++j) {
    if (j == k) continue;
    const CMatrix hx = sc.channels[static_cast<size_t>(j)] * realized[static_cast<size_t>(j)];
    out += hx * sc.weights[static_cast<size_t>(j)] * hx.adjoint();
  }
  return 0.5 * (out + out.adjoint());
}

namespace {

CMatrix whitened_gram(const CMatrix& h, const CMatrix& k_cov) {
  const CMatrix g = h.adjoint() * k_cov.llt().solve(h);
  return 0.5 * (g + g.adjoint());
}

}  // namespace

CMatrix optimal_rotation_uplink(const CMatrix& f, const CMatrix& h, const CMatrix& k_cov, const CMatrix& w) {
  const CMatrix s = f.adjoint() * whitened_gram(h, k_cov) * f;
  const HermitianSorted snr = sorted_evd(s);
  const HermitianSorted wd = sorted_evd(w);
  return snr.eigvecs * wd.eigvecs.adjoint();
}

StructuredSolution update_precoder(const UplinkScenario& sc, const PrecoderState& state, Index k) {
  const auto ku = static_cast<size_t>(k);
  const CMatrix kc = interference_covariance(sc, state.realized, k);
  const CMatrix pi = whitened_gram(sc.channels[ku], kc);
  const Index streams = sc.weights[ku].rows();
  const RVector w_modes = sorted_evd(sc.weights[ku]).eigvals;
  std::optional<RVector> warm;
  if (ku < state.precoders.size()) warm = state.precoders[ku].weights_alpha;
  return solve_structure(pi, sc.constraints[ku], weighted_log_scalarizer(w_modes), streams, warm);
}

double sum_rate(const UplinkScenario& sc, const std::vector<CMatrix>& realized) {
  CMatrix total = sc.noise_cov;
  for (Index k = 0; k < sc.users(); ++k) {
    const CMatrix hx = sc.channels[static_cast<size_t>(k)] * realized[static_cast<size_t>(k)];
    total += hx * sc.weights[static_cast<size_t>(k)] * hx.adjoint();
  }
  return log_det_hpd(total) - log_det_hpd(sc.noise_cov);
}

double user_block_objective(const UplinkScenario& sc, const std::vector<CMatrix>& realized, Index k) {
  const auto ku = static_cast<size_t>(k);
  const CMatrix kc = interference_covariance(sc, realized, k);
  const CMatrix s = realized[ku].adjoint() * whitened_gram(sc.channels[ku], kc) * realized[ku];
  const CMatrix m = CMatrix::Identity(s.rows(), s.cols()) + sc.weights[ku] * s;
  // |I + W S| is real positive for PD W and PSD S.
  return std::log(std::abs(m.determinant()));
}

PrecoderState initial_uplink_state(const UplinkScenario& sc) {
  sc.validate();
  PrecoderState st;
  for (Index k = 0; k < sc.users(); ++k) {
    const auto ku = static_cast<size_t>(k);
    const Index nt = sc.channels[ku].cols();
    const Index d = sc.weights[ku].rows();
    const Index r = std::min(nt, d);
    const CMatrix pad = CMatrix::Identity(nt, d);
    double c = feasible_scale(sc.constraints[ku], pad);
    if (!std::isfinite(c)) c = 0.0;
    StructuredSolution s = make_solution(CMatrix::Identity(nt, r), RVector::Constant(r, c), d);
    st.precoders.push_back(s);
    st.rotations.push_back(CMatrix::Identity(d, d));
    st.realized.push_back(s.dense);
  }
  st.objective_trace.push_back(sum_rate(sc, st.realized));
  return st;
}

PrecoderState alternating_solve_uplink(const UplinkScenario& sc, const std::optional<PrecoderState>& init,
                                       const StopRule& stop) {
  sc.validate();
  PrecoderState st = init ? *init : initial_uplink_state(sc);
  for (Index k = 0; k < sc.users(); ++k) {
    if (!is_feasible(sc.constraints[static_cast<size_t>(k)], st.realized[static_cast<size_t>(k)], 1e-6)) {
      throw Infeasible("uplink: initial precoder of user " + std::to_string(k) + " violates its constraint");
    }
  }
  if (st.objective_trace.empty()) st.objective_trace.push_back(sum_rate(sc, st.realized));
  double current = st.objective_trace.back();
  bool all_inner_converged = true;
  st.converged = false;
  for (int it = 0; it < stop.max_iter; ++it) {
    for (Index k = 0; k < sc.users(); ++k) {
      const auto ku = static_cast<size_t>(k);
      StructuredSolution f = update_precoder(sc, st, k);
      const CMatrix kc = interference_covariance(sc, st.realized, k);
      const CMatrix q = optimal_rotation_uplink(f.dense, sc.channels[ku], kc, sc.weights[ku]);
      std::vector<CMatrix> trial = st.realized;
      trial[ku] = f.dense * q;
      const double value = sum_rate(sc, trial);
      if (value >= current - 1e-12) {
        all_inner_converged = all_inner_converged && f.converged;
        st.precoders[ku] = std::move(f);
        st.rotations[ku] = q;
        st.realized = std::move(trial);
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
  st.converged = st.converged && all_inner_converged;
  return st;
}

}  // namespace mmo
