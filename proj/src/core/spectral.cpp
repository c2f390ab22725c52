// SPDX-License-Identifier: Apache-2.0
#include "mmo/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace mmo {

const Tolerances& default_tolerances() {
  static const Tolerances kDefaults{};
  return kDefaults;
}

bool all_finite(const CMatrix& a) {
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
    }
  }
  return true;
}

Complex canonical_phase(const Eigen::Ref<const CVector>& v) {
  if (v.size() == 0) return {1.0, 0.0};
  const double max_abs = v.cwiseAbs().maxCoeff();
  if (max_abs == 0.0) return {1.0, 0.0};
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= max_abs - 1e-12) {
      return std::conj(v(i)) / std::abs(v(i));
    }
  }
  return {1.0, 0.0};
}

namespace {

// Descending lexicographic order on (re, im) pairs, entry by entry.
bool lex_greater(const CVector& a, const CVector& b) {
  constexpr double kEps = 1e-12;
  for (Index i = 0; i < a.size(); ++i) {
    if (a(i).real() > b(i).real() + kEps) return true;
    if (a(i).real() < b(i).real() - kEps) return false;
    if (a(i).imag() > b(i).imag() + kEps) return true;
    if (a(i).imag() < b(i).imag() - kEps) return false;
  }
  return false;
}

}  // namespace

HermitianSorted sorted_evd(const CMatrix& a, const Tolerances& tol) {
  if (a.rows() != a.cols()) throw InvalidInput("sorted_evd: matrix must be square");
  if (!all_finite(a)) throw InvalidInput("sorted_evd: non-finite entries");
  const Index n = a.rows();
  HermitianSorted out;
  out.matrix = 0.5 * (a + a.adjoint());
  if (n == 0) {
    out.eigvecs = CMatrix(0, 0);
    out.eigvals = RVector(0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(out.matrix);
  if (es.info() != Eigen::Success) throw InvalidInput("sorted_evd: eigensolver failed");

  RVector vals = es.eigenvalues().reverse();
  CMatrix vecs = es.eigenvectors().rowwise().reverse();
  for (Index j = 0; j < n; ++j) vecs.col(j) *= canonical_phase(vecs.col(j));

  // Tie groups: consecutive eigenvalues closer than the gap share a group.
  const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
  const double gap = tol.eig_tie_gap * scale;
  Index start = 0;
  while (start < n) {
    Index stop = start + 1;
    while (stop < n && vals(stop - 1) - vals(stop) < gap) ++stop;
    if (stop - start > 1) {
      std::vector<Index> order(static_cast<size_t>(stop - start));
      std::iota(order.begin(), order.end(), start);
      std::vector<CVector> cols;
      cols.reserve(order.size());
      for (Index j = start; j < stop; ++j) cols.emplace_back(vecs.col(j));
      std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
        return lex_greater(cols[static_cast<size_t>(x - start)], cols[static_cast<size_t>(y - start)]);
      });
      CMatrix block(n, stop - start);
      RVector block_vals(stop - start);
      for (Index j = 0; j < stop - start; ++j) {
        block.col(j) = cols[static_cast<size_t>(order[static_cast<size_t>(j)] - start)];
        block_vals(j) = vals(order[static_cast<size_t>(j)]);
      }
      vecs.middleCols(start, stop - start) = block;
      vals.segment(start, stop - start) = block_vals;
    }
    start = stop;
  }
  out.eigvecs = std::move(vecs);
  out.eigvals = std::move(vals);
  return out;
}

HermitianSorted sorted_evd_ascending(const CMatrix& a, const Tolerances& tol) {
  HermitianSorted d = sorted_evd(a, tol);
  d.eigvals = d.eigvals.reverse().eval();
  d.eigvecs = d.eigvecs.rowwise().reverse().eval();
  return d;
}

SingularTriple sorted_svd(const CMatrix& a) {
  if (!all_finite(a)) throw InvalidInput("sorted_svd: non-finite entries");
  const Index m = a.rows();
  const Index n = a.cols();
  SingularTriple out;
  if (m == 0 || n == 0) {
    out.left = CMatrix::Identity(m, m);
    out.right = CMatrix::Identity(n, n);
    out.singvals = RVector(0);
    return out;
  }
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.left = svd.matrixU();
  out.right = svd.matrixV();
  out.singvals = svd.singularValues();
  const Index r = std::min(m, n);
  for (Index j = 0; j < r; ++j) {
    const Complex ph = canonical_phase(out.left.col(j));
    out.left.col(j) *= ph;
    out.right.col(j) *= ph;
  }
  for (Index j = r; j < m; ++j) out.left.col(j) *= canonical_phase(out.left.col(j));
  for (Index j = r; j < n; ++j) out.right.col(j) *= canonical_phase(out.right.col(j));
  return out;
}

CMatrix hermitian_sqrt(const CMatrix& a, const Tolerances& tol) {
  const HermitianSorted d = sorted_evd(a, tol);
  if (d.eigvals.size() == 0) return CMatrix(0, 0);
  const double norm = d.eigvals.cwiseAbs().maxCoeff();
  const double lowest = d.eigvals.minCoeff();
  if (lowest < -tol.psd_reject * std::max(norm, 1e-300)) {
    throw NotPsd("hermitian_sqrt: eigenvalue " + std::to_string(lowest) + " is significantly negative");
  }
  const RVector roots = d.eigvals.cwiseMax(0.0).cwiseSqrt();
  CMatrix out = d.eigvecs * roots.asDiagonal() * d.eigvecs.adjoint();
  return 0.5 * (out + out.adjoint());
}

CMatrix hermitian_inv_sqrt(const CMatrix& a, const Tolerances& tol) {
  const HermitianSorted d = sorted_evd(a, tol);
  if (d.eigvals.size() == 0) return CMatrix(0, 0);
  if (d.eigvals.minCoeff() <= 0.0) throw NotPsd("hermitian_inv_sqrt: matrix is not positive definite");
  const RVector inv_roots = d.eigvals.cwiseSqrt().cwiseInverse();
  CMatrix out = d.eigvecs * inv_roots.asDiagonal() * d.eigvecs.adjoint();
  return 0.5 * (out + out.adjoint());
}

double log_det_hpd(const CMatrix& a) {
  const CMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::LLT<CMatrix> llt(sym);
  if (llt.info() != Eigen::Success) throw NotPsd("log_det_hpd: matrix is not positive definite");
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Index i = 0; i < l.rows(); ++i) acc += 2.0 * std::log(l(i, i).real());
  return acc;
}

double max_eigenvalue(const CMatrix& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double min_eigenvalue(const CMatrix& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_unitary(const CMatrix& q, double tol) {
  if (q.rows() != q.cols()) return false;
  return (q.adjoint() * q - CMatrix::Identity(q.rows(), q.cols())).norm() <= tol * std::max<double>(1.0, static_cast<double>(q.rows()));
}

}  // namespace mmo
