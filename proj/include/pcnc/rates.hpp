#pragma once

#include <vector>

#include "pcnc/clustering.hpp"
#include "pcnc/types.hpp"

namespace pcnc {

/// d_kc streams from cluster c to UE k (K x Lc, every entry >= 1).
struct StreamAllocation {
  IMatrix d;

  int operator()(int k, int c) const { return d(k, c); }
  int num_ues() const { return static_cast<int>(d.rows()); }
  int num_clusters() const { return static_cast<int>(d.cols()); }
};

/// Read-only view of one downlink instance: channels, power, clusters and allocation.
struct LinkModel {
  const ChannelGrid& channels;
  double rho;
  const ClusterSet& clusters;
  const StreamAllocation& alloc;

  int K() const { return static_cast<int>(channels.rows()); }
  int L() const { return static_cast<int>(channels.cols()); }
  int M() const { return static_cast<int>(channels(0, 0).cols()); }
  int N() const { return static_cast<int>(channels(0, 0).rows()); }
  int Lc() const { return clusters.size(); }
  int cluster_of(int l) const { return clusters.cluster_of[l]; }
  int streams(int k, int c) const { return alloc(k, c); }
  int streams_at_ap(int k, int l) const { return alloc(k, cluster_of(l)); }
};

/// Per-AP precoders W_kl (K x L grid of M x d_k,c(l)), combiners V_kc and
/// MSE weights C_kc (K x Lc grids).
struct BeamformingState {
  Grid<CMatrix> precoders;
  Grid<CMatrix> combiners;
  Grid<CMatrix> weights;
};

struct TraceEntry {
  int iter = 0;
  double sum_rate = 0.0;
  double objective = 0.0;
  double max_power = 0.0;
  double max_lambda = 0.0;
};

struct RateReport {
  RMatrix stream_rates;  // K x Lc, bits per channel use
  RVector ue_rates;
  double sum_rate = 0.0;
  std::vector<TraceEntry> trace;
  int iterations = 0;
  bool converged = false;
  bool regularized = false;  // some Q_kc or weight update needed a ridge
};

/// Zero-initialized state with the shapes implied by `model`.
BeamformingState empty_state(const LinkModel& model);

/// Validates allocation shape and bounds; throws std::invalid_argument.
void check_allocation(const LinkModel& model);

/// Vertical stack of W_kl over the cluster, in cluster order.
CMatrix stack_precoder(const LinkModel& model, const BeamformingState& state, int k, int c);

/// Ḡ_{k,c} W̄_{j,c} for every (k, j, c), i.e. the effective channel from cluster c's
/// stream for UE j as seen at UE k. Stored as a K x (K * Lc) grid, entry (k, j * Lc + c).
class EffectiveChannels {
 public:
  EffectiveChannels(const LinkModel& model, const BeamformingState& state);

  const CMatrix& operator()(int k, int j, int c) const { return grid_(k, j * lc_ + c); }
  CMatrix& operator()(int k, int j, int c) { return grid_(k, j * lc_ + c); }

 private:
  int lc_;
  Grid<CMatrix> grid_;
};

/// I_N + rho * (every received stream term except (k, c)), called A_kc below.
CMatrix interference_plus_noise(const LinkModel& model, const EffectiveChannels& eff, int k,
                                int c);

/// I_N + rho * sum over all received stream terms at UE k.
CMatrix received_covariance(const LinkModel& model, const EffectiveChannels& eff, int k);

/// Q_kc = V^H A_kc V.
CMatrix interference_covariance(const LinkModel& model, const BeamformingState& state, int k,
                                int c);

/// log2 |I + rho H^H Q^{-1} H| with H = V^H Ḡ W̄ and the stored combiner V_kc.
double stream_rate(const LinkModel& model, const BeamformingState& state, int k, int c,
                   bool* regularized = nullptr);

/// Same as stream_rate for an arbitrary combiner `v`.
double stream_rate_with(const LinkModel& model, const EffectiveChannels& eff, const CMatrix& v,
                        int k, int c, bool* regularized = nullptr);

/// sqrt(rho) * (received covariance)^{-1} Ḡ W̄: the linear MMSE estimator of q_kc.
CMatrix mmse_combiner(const LinkModel& model, const BeamformingState& state, int k, int c);
CMatrix mmse_combiner(const LinkModel& model, const EffectiveChannels& eff, int k, int c);

/// sqrt(rho) * A_kc^{-1} Ḡ W̄ (whiten, then matched filter).
CMatrix whitened_mrc_combiner(const LinkModel& model, const BeamformingState& state, int k,
                              int c);

/// I + rho W̄^H Ḡ^H A^{-1} Ḡ W̄, so that whitened = mmse * factor.
CMatrix whitening_factor(const LinkModel& model, const BeamformingState& state, int k, int c);

/// Closed-form rate reached by the optimal combiner:
/// log2 |I + rho W̄^H Ḡ^H A_kc^{-1} Ḡ W̄|.
double broadcast_rate(const LinkModel& model, const BeamformingState& state, int k, int c);

/// sum_k tr(W_kl W_kl^H).
double per_ap_power(const BeamformingState& state, int l);
double max_ap_power(const BeamformingState& state);

/// Aggregates stream_rate over every (k, c) with the stored combiners.
RateReport sum_rate(const LinkModel& model, const BeamformingState& state);

}  // namespace pcnc
