// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmo/random.hpp"
#include "mmo/types.hpp"

namespace mmo::sim {

/// [i, j] = r^{|i - j|}.
CMatrix exponential_corr(double r, Index n);

/// Kronecker-correlated channel R_rx^{1/2} G R_tx^{1/2}, unit-variance i.i.d. G.
CMatrix sample_channel(const CMatrix& r_rx, const CMatrix& r_tx, Rng& rng);

/// Estimated and true channel for a hop with estimation error. The estimate
/// carries power 1 - error_var, the error error_var, both with transmit-side
/// correlation `psi_base`. The design-side error covariance is
/// error_var * psi_base.
struct RelayCsi {
  CMatrix estimate;
  CMatrix truth;
  CMatrix error_cov;
};

RelayCsi sample_relay_csi(Index rows, Index cols, double error_var, const CMatrix& psi_base, Rng& rng);

/// Source covariance [exp(-d_mn)] (x) I_block with d_mn ~ U[0, 1] symmetric,
/// redrawn until positive definite.
CMatrix distance_source_cov(Index sensors, Index block_dim, Rng& rng);

}  // namespace mmo::sim
