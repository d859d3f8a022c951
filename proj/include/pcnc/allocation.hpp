#pragma once

#include "pcnc/config.hpp"
#include "pcnc/rates.hpp"

namespace pcnc {

/// S_kc = ||Ḡ_kc||^2 / (1 + ||intra-cluster leakage||^2 + ||inter-cluster leakage||^2),
/// both leakage terms projected onto the column space of Ḡ_kc. K x Lc.
RMatrix cinr_matrix(const ChannelGrid& channels, const ClusterSet& clusters);

struct GreedyStep {
  int k = 0;
  int c = 0;
  RVector candidate_rates;  // index d-1; -inf for a failed solve
  int chosen = 1;
};

/// Visits every (k, c) once in decreasing CINR order and keeps the stream count whose
/// WMMSE solve gives the best sum rate (never below d_min). Every candidate solve
/// starts from the same `init_seed`.
StreamAllocation greedy_allocate(const ChannelGrid& channels, double rho,
                                 const ClusterSet& clusters, const IMatrix& d_min,
                                 const SolverConfig& cfg, std::uint64_t init_seed,
                                 std::vector<GreedyStep>* log = nullptr);

StreamAllocation even_allocation(int K, int Lc, int d);

/// d_kc i.i.d. uniform on {1..min(M, N)}.
StreamAllocation random_allocation(int K, int Lc, int M, int N, Rng& rng);

}  // namespace pcnc
