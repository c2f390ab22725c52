// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmo/types.hpp"

namespace mmo {

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// non-increasing order and a deterministic eigenvector basis.
struct HermitianSorted {
  CMatrix matrix;   // symmetrized input
  CMatrix eigvecs;  // unitary, columns paired with eigvals
  RVector eigvals;  // descending
};

/// Full SVD with descending singular values.
struct SingularTriple {
  CMatrix left;      // m x m
  RVector singvals;  // min(m, n), descending
  CMatrix right;     // n x n
};

/// Descending EVD. Each eigenvector is phase-normalized so that its
/// largest-magnitude entry is real and positive; eigenvectors whose
/// eigenvalues differ by less than the tie gap are ordered by a descending
/// lexicographic comparison of their normalized entries.
HermitianSorted sorted_evd(const CMatrix& a, const Tolerances& tol = default_tolerances());

/// Same decomposition with eigenvalues ascending (columns reversed).
HermitianSorted sorted_evd_ascending(const CMatrix& a,
                                     const Tolerances& tol = default_tolerances());

/// Descending SVD. The largest-magnitude entry of every left singular vector
/// is made real positive, with the matching right vector rotated alongside.
SingularTriple sorted_svd(const CMatrix& a);

/// Unique Hermitian PSD square root. Eigenvalues down to -psd_reject*||A|| are
/// clamped to zero, anything more negative raises NotPsd.
CMatrix hermitian_sqrt(const CMatrix& a, const Tolerances& tol = default_tolerances());

/// A^{-1/2} for a Hermitian positive definite matrix.
CMatrix hermitian_inv_sqrt(const CMatrix& a, const Tolerances& tol = default_tolerances());

/// log|A| for Hermitian positive definite A (Cholesky based).
double log_det_hpd(const CMatrix& a);

/// Largest eigenvalue of a Hermitian matrix.
double max_eigenvalue(const CMatrix& a);
double min_eigenvalue(const CMatrix& a);

bool is_unitary(const CMatrix& q, double tol = 1e-10);
bool all_finite(const CMatrix& a);

/// Makes the largest-magnitude entry of v real positive (first index wins
/// among entries equal in magnitude to within 1e-12).
Complex canonical_phase(const Eigen::Ref<const CVector>& v);

}  // namespace mmo
