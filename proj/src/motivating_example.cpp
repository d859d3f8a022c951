#include "pcnc/motivating_example.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "pcnc/geometry_channel.hpp"
#include "pcnc/linalg.hpp"

namespace pcnc {

std::string to_string(NormMode m) { return m == NormMode::UNIT ? "unit" : "iid"; }

NormMode parse_norm_mode(const std::string& s) {
  if (s == "unit" || s == "UNIT") return NormMode::UNIT;
  if (s == "iid" || s == "IID") return NormMode::IID;
  throw ConfigError("norm_mode", "expected unit or iid, got '" + s + "'");
}

TwoApInstance example_channels(int M, int N, double alpha, NormMode mode, Rng& rng) {
  if (M < 2 || N < 2) throw std::invalid_argument("example_channels: need M >= 2 and N >= 2");
  TwoApInstance inst;
  inst.alpha = alpha;
  const CMatrix gf = complex_gaussian(N, 2, rng).householderQr().householderQ() *
                     CMatrix::Identity(N, 2);
  inst.g = gf.col(0);
  inst.f = gf.col(1);
  if (mode == NormMode::IID) {
    inst.a = complex_gaussian(M, 1, rng);
    inst.b = complex_gaussian(M, 1, rng);
    inst.c = complex_gaussian(M, 1, rng);
  } else {
    inst.a = complex_gaussian(M, 1, rng).normalized();
    inst.b = complex_gaussian(M, 1, rng).normalized();
    CVector c = complex_gaussian(M, 1, rng);
    c -= inst.b * (inst.b.adjoint() * c)(0);
    inst.c = c.normalized();
  }
  inst.G1 = inst.g * inst.a.adjoint();
  inst.G2 = inst.g * inst.b.adjoint() + alpha * inst.f * inst.c.adjoint();
  return inst;
}

namespace {

// Hermitian eigen-projection onto the PSD cone.
CMatrix project_psd(const CMatrix& y) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(y));
  const RVector ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

// Euclidean projection of x onto {x >= 0, sum x <= 1}.
RVector project_capped_simplex(const RVector& x) {
  RVector clipped = x.cwiseMax(0.0);
  if (clipped.sum() <= 1.0) return clipped;
  RVector s = x;
  std::sort(s.data(), s.data() + s.size(), std::greater<double>());
  double cum = 0.0;
  double theta = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    cum += s(i);
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (s(i) - t > 0.0) theta = t;
  }
  return (x.array() - theta).cwiseMax(0.0);
}

CMatrix project_trace_ball(const CMatrix& y) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(y));
  const RVector ev = project_capped_simplex(es.eigenvalues());
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

// Both blocks independently onto {tr <= 1} (halfspaces on disjoint diagonals).
CMatrix project_block_traces(const CMatrix& y, Eigen::Index r1) {
  CMatrix out = y;
  const Eigen::Index r2 = y.rows() - r1;
  auto fix = [&](Eigen::Index off, Eigen::Index r) {
    if (r == 0) return;
    const double tr = out.diagonal().segment(off, r).real().sum();
    if (tr > 1.0) out.diagonal().segment(off, r).array() -= (tr - 1.0) / static_cast<double>(r);
  };
  fix(0, r1);
  fix(r1, r2);
  return out;
}

// Dykstra alternation between the PSD cone and the per-block trace halfspaces.
CMatrix dykstra(const CMatrix& y, Eigen::Index r1) {
  CMatrix x = hermitian_part(y);
  CMatrix p = CMatrix::Zero(y.rows(), y.cols());
  CMatrix q = CMatrix::Zero(y.rows(), y.cols());
  const double scale = std::max(1.0, y.norm());
  for (int it = 0; it < 10000; ++it) {
    const CMatrix yk = project_psd(x + p);
    p = x + p - yk;
    const CMatrix xk = project_block_traces(yk + q, r1);
    q = yk + q - xk;
    const double change = (xk - x).norm();
    x = xk;
    if (change <= 1e-13 * scale) break;
  }
  return project_psd(x);
}

// Exact projection onto {K >= 0, tr K11 <= 1, tr K22 <= 1}. The minimizer is
// P_psd(Y - diag(mu1 I, mu2 I)) for multipliers mu >= 0 solving the two complementary
// trace conditions, found by a finite-difference Newton iteration on mu. Dykstra
// covers the rare cases where Newton stalls. A final congruence rescale removes any
// trace excess left by rounding.
CMatrix project_aligned(const CMatrix& y, Eigen::Index r1) {
  const Eigen::Index n = y.rows();
  const Eigen::Index r2 = n - r1;
  const CMatrix yh = hermitian_part(y);
  auto shifted = [&](const Eigen::Vector2d& mu) {
    CMatrix z = yh;
    z.diagonal().head(r1).array() -= mu(0);
    z.diagonal().tail(r2).array() -= mu(1);
    return project_psd(z);
  };
  auto traces = [&](const CMatrix& k) {
    return Eigen::Vector2d(r1 ? k.diagonal().head(r1).real().sum() : 0.0,
                           r2 ? k.diagonal().tail(r2).real().sum() : 0.0);
  };

  CMatrix k = shifted(Eigen::Vector2d::Zero());
  Eigen::Vector2d t = traces(k);
  if (t(0) > 1.0 || t(1) > 1.0) {
    const Eigen::Vector2d dims(std::max<Eigen::Index>(r1, 1), std::max<Eigen::Index>(r2, 1));
    Eigen::Vector2d mu = ((t.array() - 1.0).max(0.0) / dims.array()).matrix();
    // Trace errors below this are rounding in the eigen-clipping of a matrix of size |Y|.
    const double tol = 1e-13 * std::max(1.0, yh.norm());
    bool solved = false;
    for (int it = 0; it < 60 && !solved; ++it) {
      k = shifted(mu);
      t = traces(k);
      bool active[2];
      double worst = 0.0;
      for (int i = 0; i < 2; ++i) {
        active[i] = mu(i) > 0.0 || t(i) > 1.0;
        if (active[i]) worst = std::max(worst, std::abs(t(i) - 1.0));
      }
      if (worst <= tol) {
        solved = true;
        break;
      }
      const double h = 1e-7 * std::max(1.0, mu.cwiseAbs().maxCoeff());
      Eigen::Matrix2d jac = Eigen::Matrix2d::Zero();
      for (int j = 0; j < 2; ++j) {
        if (!active[j]) continue;
        Eigen::Vector2d mh = mu;
        mh(j) += h;
        jac.col(j) = (traces(shifted(mh)) - t) / h;
      }
      Eigen::Vector2d step = Eigen::Vector2d::Zero();
      if (active[0] && active[1]) {
        if (std::abs(jac.determinant()) < 1e-300) break;
        step = jac.fullPivLu().solve(Eigen::Vector2d(1.0 - t(0), 1.0 - t(1)));
      } else {
        for (int i = 0; i < 2; ++i)
          if (active[i]) {
            if (!(jac(i, i) < 0.0)) break;
            step(i) = (1.0 - t(i)) / jac(i, i);
          }
      }
      mu = (mu + step).cwiseMax(0.0);
    }
    if (!solved) k = dykstra(y, r1);
  }
  RVector d = RVector::Ones(n);
  t = traces(k);
  if (t(0) > 1.0) d.head(r1).setConstant(1.0 / std::sqrt(t(0)));
  if (t(1) > 1.0) d.tail(r2).setConstant(1.0 / std::sqrt(t(1)));
  return d.asDiagonal() * k * d.asDiagonal();
}

CMatrix project_sic(const CMatrix& y, Eigen::Index r1) {
  const Eigen::Index r2 = y.rows() - r1;
  CMatrix out = CMatrix::Zero(y.rows(), y.cols());
  if (r1) out.topLeftCorner(r1, r1) = project_trace_ball(y.topLeftCorner(r1, r1));
  if (r2) out.bottomRightCorner(r2, r2) = project_trace_ball(y.bottomRightCorner(r2, r2));
  return out;
}

double logdet_rate(const CMatrix& h, const CMatrix& k, double rho) {
  CMatrix a = rho * h * k * h.adjoint();
  a.diagonal().array() += 1.0;
  return log2_det_hpd(a);
}

CMatrix logdet_gradient(const CMatrix& h, const CMatrix& k, double rho) {
  CMatrix a = rho * h * k * h.adjoint();
  a.diagonal().array() += 1.0;
  return hermitian_part(rho / std::numbers::ln2 * h.adjoint() * hpd_solve(a, h));
}

struct Compressed {
  CMatrix h;   // N x (r1 + r2)
  CMatrix q1;  // M x r1
  CMatrix q2;  // M x r2
};

// The optimal covariance lives in the row spaces of G1 and G2; solving there keeps the
// problem at most (2N) x (2N) regardless of M.
Compressed compress(const CMatrix& G1, const CMatrix& G2) {
  Compressed c;
  c.q1 = orthonormal_basis(G1.adjoint());
  c.q2 = orthonormal_basis(G2.adjoint());
  c.h.resize(G1.rows(), c.q1.cols() + c.q2.cols());
  c.h << G1 * c.q1, G2 * c.q2;
  return c;
}

CovarianceSolution projected_gradient(const CMatrix& G1, const CMatrix& G2, double rho,
                                      bool aligned) {
  const Compressed cp = compress(G1, G2);
  const Eigen::Index r1 = cp.q1.cols();
  const Eigen::Index r2 = cp.q2.cols();
  const Eigen::Index r = r1 + r2;
  auto project = [&](const CMatrix& y) {
    return aligned ? project_aligned(y, r1) : project_sic(y, r1);
  };

  CMatrix k = CMatrix::Zero(r, r);
  if (r1) k.topLeftCorner(r1, r1) = CMatrix::Identity(r1, r1) / static_cast<double>(r1);
  if (r2) k.bottomRightCorner(r2, r2) = CMatrix::Identity(r2, r2) / static_cast<double>(r2);

  CovarianceSolution sol;
  double f = r ? logdet_rate(cp.h, k, rho) : 0.0;
  sol.history.push_back(f);
  constexpr int kMaxIters = 20000;
  double step = 1.0;
  int it = 0;
  for (; r > 0 && it < kMaxIters; ++it) {
    const CMatrix g = logdet_gradient(cp.h, k, rho);
    step = std::max(step, 1e-12) * 2.0;
    bool accepted = false;
    CMatrix kn;
    double fn = f;
    while (step > 1e-30) {
      kn = project(k + step * g);
      fn = logdet_rate(cp.h, kn, rho);
      const double lin = (g.adjoint() * (kn - k)).trace().real();
      if (fn >= f && fn >= f + 1e-4 * lin) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double rel = (fn - f) / std::max(std::abs(fn), 1e-300);
    const double move = (kn - k).norm();
    k = kn;
    f = fn;
    sol.history.push_back(f);
    if (rel < 1e-13 && move < 1e-10) break;
  }
  if (it >= kMaxIters)
    throw NumericalError("projected gradient did not converge within " +
                         std::to_string(kMaxIters) + " iterations");
  sol.iterations = it;
  sol.rate = f;
  const Eigen::Index M = G1.cols();
  CMatrix basis = CMatrix::Zero(2 * M, r);
  basis.topLeftCorner(M, r1) = cp.q1;
  basis.bottomRightCorner(M, r2) = cp.q2;
  sol.K = basis * k * basis.adjoint();
  return sol;
}

}  // namespace

CovarianceSolution aligned_capacity(const CMatrix& G1, const CMatrix& G2, double rho) {
  return projected_gradient(G1, G2, rho, true);
}

double aligned_capacity(const TwoApInstance& inst) {
  return aligned_capacity(inst.G1, inst.G2, inst.rho).rate;
}

CovarianceSolution sic_capacity(const CMatrix& G1, const CMatrix& G2, double rho) {
  return projected_gradient(G1, G2, rho, false);
}

double sic_rate(const TwoApInstance& inst) { return sic_capacity(inst.G1, inst.G2, inst.rho).rate; }

double single_ap_capacity(const CMatrix& G, double rho) {
  const RVector s = Eigen::JacobiSVD<CMatrix>(G).singularValues();
  std::vector<double> gains;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 0.0) gains.push_back(rho * s(i) * s(i));
  std::sort(gains.begin(), gains.end(), std::greater<double>());
  for (std::size_t n = gains.size(); n > 0; --n) {
    double inv_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) inv_sum += 1.0 / gains[i];
    const double mu = (1.0 + inv_sum) / static_cast<double>(n);
    if (mu - 1.0 / gains[n - 1] > 0.0) {
      double rate = 0.0;
      for (std::size_t i = 0; i < n; ++i) rate += std::log2(gains[i] * mu);
      return rate;
    }
  }
  return 0.0;
}

double best_ap_rate(const TwoApInstance& inst) {
  return std::max(single_ap_capacity(inst.G1, inst.rho), single_ap_capacity(inst.G2, inst.rho));
}

ZfRate zf_rank1_rate(const CMatrix& G1, const CMatrix& G2, double rho, const CVector& w1,
                     const CVector& w2) {
  CMatrix h(G1.rows(), 2);
  h.col(0) = G1 * w1.normalized();
  h.col(1) = G2 * w2.normalized();
  const CMatrix gram = hermitian_part(h.adjoint() * h);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
  const double emax = es.eigenvalues().maxCoeff();
  if (!(emax > 0.0) || es.eigenvalues().minCoeff() <= 1e-12 * emax) return {0.0, true};
  const CMatrix inv = gram.inverse();
  double rate = 0.0;
  for (int i = 0; i < 2; ++i) rate += std::log2(1.0 + rho / inv(i, i).real());
  return {rate, false};
}

ZfRate zf_rank1_rate(const TwoApInstance& inst, const CVector& w1, const CVector& w2) {
  return zf_rank1_rate(inst.G1, inst.G2, inst.rho, w1, w2);
}

std::vector<Figure1Row> figure1_sweep(int M, int N, double alpha,
                                      const std::vector<double>& rho_db, NormMode mode,
                                      int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("figure1_sweep: trials < 1");
  const std::size_t S = kFigure1Strategies.size();
  std::vector<std::vector<double>> sums(rho_db.size(), std::vector<double>(S, 0.0));
  for (int t = 0; t < trials; ++t) {
    Rng rng = substream(seed, static_cast<std::uint64_t>(t), StreamRole::Example);
    TwoApInstance inst = example_channels(M, N, alpha, mode, rng);
    for (std::size_t i = 0; i < rho_db.size(); ++i) {
      inst.rho = std::pow(10.0, rho_db[i] / 10.0);
      sums[i][0] += aligned_capacity(inst);
      sums[i][1] += sic_rate(inst);
      sums[i][2] += zf_rank1_rate(inst, inst.a, inst.c).rate;
      sums[i][3] += best_ap_rate(inst);
      sums[i][4] += zf_rank1_rate(inst, inst.a, inst.b).rate;
    }
  }
  std::vector<Figure1Row> rows;
  for (std::size_t i = 0; i < rho_db.size(); ++i)
    for (std::size_t s = 0; s < S; ++s)
      rows.push_back({rho_db[i], kFigure1Strategies[s], sums[i][s] / trials});
  return rows;
}

}  // namespace pcnc
