#include "pcnc/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pcnc/linalg.hpp"

namespace pcnc {

BeamformingState empty_state(const LinkModel& model) {
  const int K = model.K();
  const int L = model.L();
  const int Lc = model.Lc();
  BeamformingState s{Grid<CMatrix>(K, L), Grid<CMatrix>(K, Lc), Grid<CMatrix>(K, Lc)};
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) s.precoders(k, l) = CMatrix::Zero(model.M(), model.streams_at_ap(k, l));
    for (int c = 0; c < Lc; ++c) {
      const int d = model.streams(k, c);
      s.combiners(k, c) = CMatrix::Zero(model.N(), d);
      s.weights(k, c) = CMatrix::Identity(d, d);
    }
  }
  return s;
}

void check_allocation(const LinkModel& model) {
  if (model.alloc.num_ues() != model.K() || model.alloc.num_clusters() != model.Lc())
    throw std::invalid_argument("allocation shape does not match K x Lc");
  if (model.clusters.num_aps() != model.L())
    throw std::invalid_argument("cluster set does not cover the channel grid's APs");
  for (int k = 0; k < model.K(); ++k)
    for (int c = 0; c < model.Lc(); ++c) {
      const int d = model.streams(k, c);
      const int cap =
          std::min(model.M() * static_cast<int>(model.clusters.clusters[c].size()), model.N());
      if (d < 1 || d > cap)
        throw std::invalid_argument("allocation d(" + std::to_string(k) + "," + std::to_string(c) +
                                    ")=" + std::to_string(d) + " outside [1, " +
                                    std::to_string(cap) + "]");
    }
}

CMatrix stack_precoder(const LinkModel& model, const BeamformingState& state, int k, int c) {
  const auto& members = model.clusters.clusters[c];
  const Eigen::Index cols = state.precoders(k, members.front()).cols();
  const Eigen::Index M = model.M();
  CMatrix w(M * static_cast<Eigen::Index>(members.size()), cols);
  for (std::size_t j = 0; j < members.size(); ++j) {
    const CMatrix& block = state.precoders(k, members[j]);
    if (block.cols() != cols)
      throw std::invalid_argument("stack_precoder: precoders in one cluster disagree on d");
    w.middleRows(static_cast<Eigen::Index>(j) * M, M) = block;
  }
  return w;
}

EffectiveChannels::EffectiveChannels(const LinkModel& model, const BeamformingState& state)
    : lc_(model.Lc()), grid_(model.K(), model.K() * model.Lc()) {
  const int K = model.K();
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j)
      for (int c = 0; c < lc_; ++c) {
        CMatrix acc = CMatrix::Zero(model.N(), model.streams(j, c));
        for (int l : model.clusters.clusters[c]) acc.noalias() += model.channels(k, l) * state.precoders(j, l);
        (*this)(k, j, c) = std::move(acc);
      }
}

CMatrix received_covariance(const LinkModel& model, const EffectiveChannels& eff, int k) {
  CMatrix r = CMatrix::Zero(model.N(), model.N());
  for (int j = 0; j < model.K(); ++j)
    for (int c = 0; c < model.Lc(); ++c) {
      const CMatrix& h = eff(k, j, c);
      r.noalias() += h * h.adjoint();
    }
  r *= model.rho;
  r.diagonal().array() += 1.0;
  return hermitian_part(r);
}

CMatrix interference_plus_noise(const LinkModel& model, const EffectiveChannels& eff, int k,
                                int c) {
  CMatrix r = CMatrix::Zero(model.N(), model.N());
  for (int j = 0; j < model.K(); ++j)
    for (int c1 = 0; c1 < model.Lc(); ++c1) {
      if (j == k && c1 == c) continue;
      const CMatrix& h = eff(k, j, c1);
      r.noalias() += h * h.adjoint();
    }
  r *= model.rho;
  r.diagonal().array() += 1.0;
  return hermitian_part(r);
}

CMatrix interference_covariance(const LinkModel& model, const BeamformingState& state, int k,
                                int c) {
  const EffectiveChannels eff(model, state);
  const CMatrix& v = state.combiners(k, c);
  return hermitian_part(v.adjoint() * interference_plus_noise(model, eff, k, c) * v);
}

double stream_rate_with(const LinkModel& model, const EffectiveChannels& eff, const CMatrix& v,
                        int k, int c, bool* regularized) {
  const CMatrix h = v.adjoint() * eff(k, k, c);
  const CMatrix q = hermitian_part(v.adjoint() * interference_plus_noise(model, eff, k, c) * v);
  const CMatrix x = hpd_solve(q, h, regularized);
  CMatrix m = model.rho * (h.adjoint() * x);
  m.diagonal().array() += 1.0;
  return std::max(0.0, log2_det_hpd(hermitian_part(m)));
}

double stream_rate(const LinkModel& model, const BeamformingState& state, int k, int c,
                   bool* regularized) {
  const EffectiveChannels eff(model, state);
  return stream_rate_with(model, eff, state.combiners(k, c), k, c, regularized);
}

CMatrix mmse_combiner(const LinkModel& model, const EffectiveChannels& eff, int k, int c) {
  return std::sqrt(model.rho) * hpd_solve(received_covariance(model, eff, k), eff(k, k, c));
}

CMatrix mmse_combiner(const LinkModel& model, const BeamformingState& state, int k, int c) {
  return mmse_combiner(model, EffectiveChannels(model, state), k, c);
}

CMatrix whitened_mrc_combiner(const LinkModel& model, const BeamformingState& state, int k,
                              int c) {
  const EffectiveChannels eff(model, state);
  return std::sqrt(model.rho) * hpd_solve(interference_plus_noise(model, eff, k, c), eff(k, k, c));
}

CMatrix whitening_factor(const LinkModel& model, const BeamformingState& state, int k, int c) {
  const EffectiveChannels eff(model, state);
  const CMatrix& h = eff(k, k, c);
  CMatrix b = model.rho * (h.adjoint() * hpd_solve(interference_plus_noise(model, eff, k, c), h));
  b.diagonal().array() += 1.0;
  return hermitian_part(b);
}

double broadcast_rate(const LinkModel& model, const BeamformingState& state, int k, int c) {
  return std::max(0.0, log2_det_hpd(whitening_factor(model, state, k, c)));
}

double per_ap_power(const BeamformingState& state, int l) {
  double p = 0.0;
  for (std::size_t k = 0; k < state.precoders.rows(); ++k) p += state.precoders(k, l).squaredNorm();
  return p;
}

double max_ap_power(const BeamformingState& state) {
  double p = 0.0;
  for (std::size_t l = 0; l < state.precoders.cols(); ++l)
    p = std::max(p, per_ap_power(state, static_cast<int>(l)));
  return p;
}

RateReport sum_rate(const LinkModel& model, const BeamformingState& state) {
  const EffectiveChannels eff(model, state);
  RateReport r;
  r.stream_rates = RMatrix::Zero(model.K(), model.Lc());
  for (int k = 0; k < model.K(); ++k)
    for (int c = 0; c < model.Lc(); ++c) {
      bool reg = false;
      r.stream_rates(k, c) = stream_rate_with(model, eff, state.combiners(k, c), k, c, &reg);
      r.regularized = r.regularized || reg;
    }
  r.ue_rates = r.stream_rates.rowwise().sum();
  r.sum_rate = r.ue_rates.sum();
  return r;
}

}  // namespace pcnc
