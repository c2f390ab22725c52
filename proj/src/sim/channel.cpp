// SPDX-License-Identifier: Apache-2.0
#include "mmo/sim/channel.hpp"

#include <cmath>

#include "mmo/spectral.hpp"

namespace mmo::sim {

CMatrix exponential_corr(double r, Index n) {
  if (!(r >= 0.0 && r < 1.0)) throw InvalidInput("exponential_corr: r must lie in [0, 1)");
  if (n <= 0) throw InvalidInput("exponential_corr: size must be positive");
  CMatrix out(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) out(i, j) = std::pow(r, static_cast<double>(std::abs(i - j)));
  }
  return out;
}

CMatrix sample_channel(const CMatrix& r_rx, const CMatrix& r_tx, Rng& rng) {
  const CMatrix g = complex_gaussian(r_rx.rows(), r_tx.rows(), rng);
  return hermitian_sqrt(r_rx) * g * hermitian_sqrt(r_tx);
}

RelayCsi sample_relay_csi(Index rows, Index cols, double error_var, const CMatrix& psi_base, Rng& rng) {
  if (!(error_var >= 0.0 && error_var < 1.0)) throw InvalidInput("sample_relay_csi: error variance must lie in [0, 1)");
  if (psi_base.rows() != cols) throw InvalidInput("sample_relay_csi: correlation size mismatch");
  const CMatrix root = hermitian_sqrt(psi_base);
  RelayCsi out;
  out.estimate = std::sqrt(1.0 - error_var) * complex_gaussian(rows, cols, rng) * root;
  const CMatrix err = std::sqrt(error_var) * complex_gaussian(rows, cols, rng) * root;
  out.truth = out.estimate + err;
  out.error_cov = error_var * psi_base;
  return out;
}

CMatrix distance_source_cov(Index sensors, Index block_dim, Rng& rng) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    RMatrix e = RMatrix::Identity(sensors, sensors);
    for (Index m = 0; m < sensors; ++m) {
      for (Index n = m + 1; n < sensors; ++n) {
        e(m, n) = e(n, m) = std::exp(-random_uniform(1, rng)(0));
      }
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(e, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 1e-6) continue;
    CMatrix out = CMatrix::Zero(sensors * block_dim, sensors * block_dim);
    for (Index m = 0; m < sensors; ++m) {
      for (Index n = 0; n < sensors; ++n) {
        out.block(m * block_dim, n * block_dim, block_dim, block_dim) =
            e(m, n) * CMatrix::Identity(block_dim, block_dim);
      }
    }
    return out;
  }
  throw Infeasible("distance_source_cov: no positive definite draw");
}

}  // namespace mmo::sim
