#include "pcnc/linalg.hpp"

#include <cmath>
#include <numbers>

namespace pcnc {

namespace {

double log_det_impl(const CMatrix& a) {
  if (a.rows() == 0) return 0.0;
  const CMatrix h = hermitian_part(a);
  Eigen::LLT<CMatrix> llt(h);
  if (llt.info() == Eigen::Success) {
    const auto& l = llt.matrixLLT();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i).real());
    return 2.0 * acc;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    acc += std::log(std::max(es.eigenvalues()(i), 1e-300));
  return acc;
}

}  // namespace

double log_det_hpd(const CMatrix& a) { return log_det_impl(a); }

double log2_det_hpd(const CMatrix& a) { return log_det_impl(a) / std::numbers::ln2; }

CMatrix hpd_solve(const CMatrix& a, const CMatrix& b, bool* regularized, double ridge) {
  const CMatrix h = hermitian_part(a);
  Eigen::LLT<CMatrix> llt(h);
  if (llt.info() == Eigen::Success) return llt.solve(b);
  if (regularized) *regularized = true;
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  CMatrix shifted = h;
  shifted.diagonal().array() += ridge * scale;
  Eigen::LLT<CMatrix> llt2(shifted);
  if (llt2.info() == Eigen::Success) return llt2.solve(b);
  return shifted.completeOrthogonalDecomposition().solve(b);
}

CMatrix hpd_inverse(const CMatrix& a, bool* regularized, double ridge) {
  return hpd_solve(a, CMatrix::Identity(a.rows(), a.cols()), regularized, ridge);
}

CMatrix orthonormal_basis(const CMatrix& a, double rel_cutoff) {
  if (a.size() == 0) return CMatrix(a.rows(), 0);
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return CMatrix(a.rows(), 0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > rel_cutoff * s(0)) ++rank;
  return svd.matrixU().leftCols(rank);
}

CMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  CMatrix out(rows, cols);
  // Column-major fill keeps the draw order independent of Eigen internals.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = nd(rng);
      const double im = nd(rng);
      out(i, j) = Complex(re, im);
    }
  return out;
}

double min_hermitian_eigenvalue(const CMatrix& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace pcnc
