#include "pcnc/allocation.hpp"

#include <algorithm>
#include <limits>

#include "pcnc/linalg.hpp"
#include "pcnc/wmmse.hpp"

namespace pcnc {

RMatrix cinr_matrix(const ChannelGrid& channels, const ClusterSet& clusters) {
  const int K = static_cast<int>(channels.rows());
  const int Lc = clusters.size();
  Grid<CMatrix> gbar(K, Lc);
  for (int k = 0; k < K; ++k)
    for (int c = 0; c < Lc; ++c) gbar(k, c) = collective_channel(channels, clusters.clusters[c], k);

  RMatrix s = RMatrix::Zero(K, Lc);
  for (int k = 0; k < K; ++k)
    for (int c = 0; c < Lc; ++c) {
      const CMatrix p = orthonormal_basis(gbar(k, c));
      if (p.cols() == 0) continue;
      CMatrix intra = CMatrix::Zero(p.cols(), gbar(k, c).cols());
      for (int k1 = 0; k1 < K; ++k1)
        if (k1 != k) intra.noalias() += p.adjoint() * gbar(k1, c);
      // Widths differ across clusters, so the inter-cluster leakage is summed as energy.
      double inter = 0.0;
      for (int c1 = 0; c1 < Lc; ++c1)
        if (c1 != c) inter += (p.adjoint() * gbar(k, c1)).squaredNorm();
      s(k, c) = gbar(k, c).squaredNorm() / (1.0 + intra.squaredNorm() + inter);
    }
  return s;
}

StreamAllocation greedy_allocate(const ChannelGrid& channels, double rho,
                                 const ClusterSet& clusters, const IMatrix& d_min,
                                 const SolverConfig& cfg, std::uint64_t init_seed,
                                 std::vector<GreedyStep>* log) {
  const int K = static_cast<int>(channels.rows());
  const int Lc = clusters.size();
  if (d_min.rows() != K || d_min.cols() != Lc)
    throw std::invalid_argument("greedy_allocate: d_min must be K x Lc");
  if ((d_min.array() < 1).any()) throw std::invalid_argument("greedy_allocate: d_min < 1");
  const int M = static_cast<int>(channels(0, 0).cols());
  const int N = static_cast<int>(channels(0, 0).rows());
  const int dmax = std::min(M, N);

  RMatrix score = cinr_matrix(channels, clusters);
  std::vector<bool> visited(static_cast<std::size_t>(K) * Lc, false);
  StreamAllocation alloc{d_min};

  for (int step = 0; step < K * Lc; ++step) {
    int bk = -1;
    int bc = -1;
    for (int k = 0; k < K; ++k)
      for (int c = 0; c < Lc; ++c) {
        if (visited[k * Lc + c]) continue;
        if (bk < 0 || score(k, c) > score(bk, bc)) {
          bk = k;
          bc = c;
        }
      }
    visited[bk * Lc + bc] = true;
    score(bk, bc) = 0.0;

    GreedyStep entry{bk, bc, RVector::Constant(dmax, -std::numeric_limits<double>::infinity()), 1};
    int best_d = 0;
    double best_rate = -std::numeric_limits<double>::infinity();
    for (int d = 1; d <= dmax; ++d) {
      StreamAllocation trial = alloc;
      trial.d(bk, bc) = d;
      const LinkModel model{channels, rho, clusters, trial};
      Rng rng(init_seed);
      try {
        const double r = wmmse_solve(model, cfg, rng).second.sum_rate;
        entry.candidate_rates(d - 1) = r;
        if (r > best_rate) {
          best_rate = r;
          best_d = d;
        }
      } catch (const NumericalError&) {
      }
    }
    const int chosen = std::max(best_d, d_min(bk, bc));
    alloc.d(bk, bc) = chosen;
    entry.chosen = chosen;
    if (log) log->push_back(std::move(entry));
  }
  return alloc;
}

StreamAllocation even_allocation(int K, int Lc, int d) {
  if (d < 1) throw std::invalid_argument("even_allocation: d < 1");
  return {IMatrix::Constant(K, Lc, d)};
}

StreamAllocation random_allocation(int K, int Lc, int M, int N, Rng& rng) {
  std::uniform_int_distribution<int> u(1, std::min(M, N));
  StreamAllocation a{IMatrix(K, Lc)};
  for (int k = 0; k < K; ++k)
    for (int c = 0; c < Lc; ++c) a.d(k, c) = u(rng);
  return a;
}

}  // namespace pcnc
