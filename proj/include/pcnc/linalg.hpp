#pragma once

#include "pcnc/types.hpp"

namespace pcnc {

/// (A + A^H) / 2.
template <typename Derived>
auto hermitian_part(const Eigen::MatrixBase<Derived>& a) {
  return ((a + a.adjoint()) * typename Derived::RealScalar(0.5)).eval();
}

/// Largest |a_ij - conj(a_ji)|.
template <typename Derived>
typename Derived::RealScalar hermitian_defect(const Eigen::MatrixBase<Derived>& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// log2 det of a Hermitian positive definite matrix via Cholesky.
/// Falls back to clipped eigenvalues when the factorization fails.
double log2_det_hpd(const CMatrix& a);

/// Natural-log counterpart of log2_det_hpd.
double log_det_hpd(const CMatrix& a);

/// Inverse of a Hermitian positive definite matrix. Sets *regularized (when non-null)
/// if a ridge of `ridge * I` had to be added to make the factorization succeed.
CMatrix hpd_inverse(const CMatrix& a, bool* regularized = nullptr, double ridge = 1e-10);

/// Solves A X = B for Hermitian positive definite A.
CMatrix hpd_solve(const CMatrix& a, const CMatrix& b, bool* regularized = nullptr,
                  double ridge = 1e-10);

/// Orthonormal basis of the column space of `a`, dropping singular values below
/// rel_cutoff * s_max. Returns a matrix with zero columns for a zero input.
CMatrix orthonormal_basis(const CMatrix& a, double rel_cutoff = 1e-10);

/// Columns of a random complex matrix with i.i.d. CN(0, 1) entries.
CMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Smallest eigenvalue of the Hermitian part of `a`.
double min_hermitian_eigenvalue(const CMatrix& a);

}  // namespace pcnc
