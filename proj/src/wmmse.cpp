#include "pcnc/wmmse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pcnc/linalg.hpp"

namespace pcnc {

namespace {

constexpr double kNullModeRel = 1e-12;

// Per-sweep quantities that do not change while the precoders move.
struct SweepCache {
  std::vector<CMatrix> xsum;  // sum_c V_kc C_kc V_kc^H, one per UE
  EffectiveChannels eff;

  SweepCache(const LinkModel& model, const BeamformingState& state) : eff(model, state) {
    xsum.reserve(model.K());
    for (int k = 0; k < model.K(); ++k) {
      CMatrix x = CMatrix::Zero(model.N(), model.N());
      for (int c = 0; c < model.Lc(); ++c) {
        const CMatrix& v = state.combiners(k, c);
        x.noalias() += v * state.weights(k, c) * v.adjoint();
      }
      xsum.push_back(hermitian_part(x));
    }
  }
};

ApTerms terms_for_ap(const LinkModel& model, const BeamformingState& state,
                     const SweepCache& cache, int l) {
  const int K = model.K();
  const int M = model.M();
  const int c = model.cluster_of(l);
  const double sr = std::sqrt(model.rho);

  std::vector<CMatrix> y(K);  // G_k1l^H Xsum_k1
  CMatrix a = CMatrix::Zero(M, M);
  for (int k1 = 0; k1 < K; ++k1) {
    y[k1] = model.channels(k1, l).adjoint() * cache.xsum[k1];
    a.noalias() += y[k1] * model.channels(k1, l);
  }
  ApTerms t;
  t.a = hermitian_part(model.rho * a);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(t.a);
  t.psi = es.eigenvectors();
  t.sigma = es.eigenvalues();
  const double smax = std::max(0.0, t.sigma.maxCoeff());
  std::vector<bool> null_mode(M);
  for (int m = 0; m < M; ++m) {
    null_mode[m] = t.sigma(m) <= kNullModeRel * smax;
    if (null_mode[m]) t.sigma(m) = 0.0;
  }

  t.lambda.resize(K);
  t.t.resize(K);
  for (int k = 0; k < K; ++k) {
    const CMatrix& w = state.precoders(k, l);
    CMatrix lam = sr * model.channels(k, l).adjoint() * state.combiners(k, c) * state.weights(k, c);
    for (int k1 = 0; k1 < K; ++k1) {
      const CMatrix rest = cache.eff(k1, k, c) - model.channels(k1, l) * w;
      lam.noalias() -= model.rho * (y[k1] * rest);
    }
    CMatrix proj = t.psi.adjoint() * lam;
    for (int m = 0; m < M; ++m)
      if (null_mode[m]) proj.row(m).setZero();
    t.lambda[k] = t.psi * proj;
    t.t[k] = hermitian_part(proj * proj.adjoint());
  }
  return t;
}

double power_slope(const ApTerms& terms, double lam) {
  double s = 0.0;
  for (const auto& tk : terms.t)
    for (Eigen::Index m = 0; m < tk.rows(); ++m) {
      const double den = terms.sigma(m) + lam;
      if (den > 0.0) s -= 2.0 * tk(m, m).real() / (den * den * den);
    }
  return s;
}

void check_monotone(const SolverConfig& cfg, double before, double after, int iter,
                    const char* block) {
  if (!cfg.verify_monotone) return;
  const double slack = cfg.monotone_tol * std::max(1.0, std::abs(before));
  if (after > before + slack) {
    std::ostringstream os;
    os.precision(17);
    os << "weighted-MSE objective increased in the " << block << " update at iteration " << iter
       << ": " << before << " -> " << after;
    throw NumericalError(os.str());
  }
}

}  // namespace

BeamformingState init_precoders(const LinkModel& model, Rng& rng) {
  check_allocation(model);
  BeamformingState s = empty_state(model);
  const int M = model.M();
  for (int l = 0; l < model.L(); ++l) {
    for (int k = 0; k < model.K(); ++k) {
      const int d = model.streams_at_ap(k, l);
      Eigen::JacobiSVD<CMatrix> svd(model.channels(k, l), Eigen::ComputeFullV);
      CMatrix w(M, d);
      const int lead = std::min(d, M);
      w.leftCols(lead) = svd.matrixV().leftCols(lead);
      if (d > M) w.rightCols(d - M) = complex_gaussian(M, d - M, rng) / std::sqrt(double(M));
      w += 0.1 / std::sqrt(double(M)) * complex_gaussian(M, d, rng);
      s.precoders(k, l) = std::move(w);
    }
    const double p = per_ap_power(s, l);
    for (int k = 0; k < model.K(); ++k) s.precoders(k, l) /= std::sqrt(p);
  }
  return s;
}

void update_combiners(const LinkModel& model, BeamformingState& state) {
  const EffectiveChannels eff(model, state);
  for (int k = 0; k < model.K(); ++k) {
    const CMatrix r = received_covariance(model, eff, k);
    Eigen::LLT<CMatrix> llt(r);
    for (int c = 0; c < model.Lc(); ++c)
      state.combiners(k, c) = std::sqrt(model.rho) * llt.solve(eff(k, k, c));
  }
}

void update_weights(const LinkModel& model, BeamformingState& state, bool* regularized) {
  const EffectiveChannels eff(model, state);
  const double sr = std::sqrt(model.rho);
  for (int k = 0; k < model.K(); ++k)
    for (int c = 0; c < model.Lc(); ++c) {
      CMatrix x = -sr * (state.combiners(k, c).adjoint() * eff(k, k, c));
      x.diagonal().array() += 1.0;
      Eigen::FullPivLU<CMatrix> lu(x);
      CMatrix inv;
      if (lu.isInvertible()) {
        inv = lu.inverse();
      } else {
        if (regularized) *regularized = true;
        x.diagonal().array() += 1e-10;
        inv = x.fullPivLu().inverse();
      }
      state.weights(k, c) = hermitian_part(inv);
    }
}

CMatrix mse_matrix(const LinkModel& model, const EffectiveChannels& eff, const CMatrix& u, int k,
                   int c) {
  CMatrix dev = -std::sqrt(model.rho) * (u.adjoint() * eff(k, k, c));
  dev.diagonal().array() += 1.0;
  const CMatrix e =
      dev * dev.adjoint() + u.adjoint() * interference_plus_noise(model, eff, k, c) * u;
  return hermitian_part(e);
}

CMatrix mse_matrix(const LinkModel& model, const BeamformingState& state, int k, int c) {
  return mse_matrix(model, EffectiveChannels(model, state), state.combiners(k, c), k, c);
}

double weighted_mse_objective(const LinkModel& model, const BeamformingState& state) {
  const EffectiveChannels eff(model, state);
  double obj = 0.0;
  for (int k = 0; k < model.K(); ++k)
    for (int c = 0; c < model.Lc(); ++c) {
      const CMatrix& cw = state.weights(k, c);
      const CMatrix e = mse_matrix(model, eff, state.combiners(k, c), k, c);
      obj += (cw * e).trace().real() - log_det_hpd(cw);
    }
  return obj;
}

ApTerms ap_terms(const LinkModel& model, const BeamformingState& state, int l) {
  const SweepCache cache(model, state);
  return terms_for_ap(model, state, cache, l);
}

LagrangeTerms lambda_terms(const LinkModel& model, const BeamformingState& state, int k, int l) {
  ApTerms t = ap_terms(model, state, l);
  return {t.psi, t.sigma, t.lambda[k], t.t[k]};
}

double power_of_lambda(const ApTerms& terms, double lam) {
  double p = 0.0;
  for (const auto& tk : terms.t)
    for (Eigen::Index m = 0; m < tk.rows(); ++m) {
      const double num = tk(m, m).real();
      const double den = terms.sigma(m) + lam;
      if (den <= 0.0) {
        if (num > 0.0) return std::numeric_limits<double>::infinity();
        continue;
      }
      p += num / (den * den);
    }
  return p;
}

double lambda_upper_bound(const ApTerms& terms) {
  double s = 0.0;
  for (const auto& tk : terms.t) s += tk.diagonal().real().sum();
  return std::sqrt(std::max(0.0, s));
}

double bisect_lambda(const ApTerms& terms, double eps) {
  if (power_of_lambda(terms, 0.0) <= 1.0) return 0.0;
  const double ub0 = lambda_upper_bound(terms);
  double lb = 0.0;
  double ub = ub0;
  while (ub - lb > eps * ub0) {
    const double mid = 0.5 * (lb + ub);
    if (power_of_lambda(terms, mid) > 1.0)
      lb = mid;
    else
      ub = mid;
  }
  // power is convex and decreasing, so Newton from the infeasible side climbs to the root.
  if (!std::isfinite(power_of_lambda(terms, lb))) return ub;
  double lam = lb;
  for (int i = 0; i < 60; ++i) {
    const double g = power_of_lambda(terms, lam) - 1.0;
    if (g <= 0.0) break;
    const double slope = power_slope(terms, lam);
    if (!(slope < 0.0)) break;
    const double step = -g / slope;
    lam += step;
    if (step <= 1e-15 * lam) break;
  }
  if (power_of_lambda(terms, lam) > 1.0 + 1e-12 || lam > ub) return ub;
  return lam;
}

CMatrix precoder_block(const ApTerms& terms, int k, double lam) {
  CMatrix proj = terms.psi.adjoint() * terms.lambda[k];
  for (Eigen::Index m = 0; m < proj.rows(); ++m) {
    const double den = terms.sigma(m) + lam;
    if (den > 0.0)
      proj.row(m) /= den;
    else
      proj.row(m).setZero();
  }
  return terms.psi * proj;
}

double update_precoders(const LinkModel& model, BeamformingState& state, const SolverConfig& cfg,
                        std::vector<double>* lambdas) {
  SweepCache cache(model, state);
  double max_lam = 0.0;
  if (lambdas) lambdas->assign(model.L(), 0.0);
  for (int l = 0; l < model.L(); ++l) {
    const ApTerms terms = terms_for_ap(model, state, cache, l);
    const double lam = bisect_lambda(terms, cfg.bisect_eps);
    max_lam = std::max(max_lam, lam);
    if (lambdas) (*lambdas)[l] = lam;
    const int c = model.cluster_of(l);
    std::vector<CMatrix> fresh(model.K());
    double p = 0.0;
    for (int k = 0; k < model.K(); ++k) {
      fresh[k] = precoder_block(terms, k, lam);
      p += fresh[k].squaredNorm();
    }
    // Guards the last few ulps of the root; the correction is far below power_tol.
    const double scale = p > 1.0 ? 1.0 / std::sqrt(p) : 1.0;
    for (int k = 0; k < model.K(); ++k) {
      fresh[k] *= scale;
      const CMatrix delta = fresh[k] - state.precoders(k, l);
      for (int k1 = 0; k1 < model.K(); ++k1)
        cache.eff(k1, k, c).noalias() += model.channels(k1, l) * delta;
      state.precoders(k, l) = std::move(fresh[k]);
    }
  }
  return max_lam;
}

std::pair<BeamformingState, RateReport> wmmse_solve(const LinkModel& model,
                                                    const SolverConfig& cfg, Rng& rng) {
  cfg.validate();
  BeamformingState state = init_precoders(model, rng);
  bool regularized = false;
  update_combiners(model, state);
  update_weights(model, state, &regularized);

  std::vector<TraceEntry> trace;
  double obj = weighted_mse_objective(model, state);
  double rate = sum_rate(model, state).sum_rate;
  trace.push_back({0, rate, obj, max_ap_power(state), 0.0});

  bool converged = false;
  int iter = 0;
  while (iter < cfg.max_outer_iters) {
    ++iter;
    double max_lam = 0.0;
    for (int s = 0; s < cfg.inner_sweeps; ++s) {
      max_lam = std::max(max_lam, update_precoders(model, state, cfg));
      const double after = weighted_mse_objective(model, state);
      check_monotone(cfg, obj, after, iter, "precoder");
      obj = after;
    }
    const double pmax = max_ap_power(state);
    if (pmax > 1.0 + cfg.power_tol) {
      std::ostringstream os;
      os.precision(17);
      os << "per-AP power " << pmax << " exceeds the budget at iteration " << iter;
      throw NumericalError(os.str());
    }
    update_combiners(model, state);
    double after = weighted_mse_objective(model, state);
    check_monotone(cfg, obj, after, iter, "combiner");
    obj = after;
    update_weights(model, state, &regularized);
    after = weighted_mse_objective(model, state);
    check_monotone(cfg, obj, after, iter, "weight");
    obj = after;

    const double next = sum_rate(model, state).sum_rate;
    trace.push_back({iter, next, obj, pmax, max_lam});
    const double change = std::abs(next - rate);
    rate = next;
    if (change <= cfg.rate_tol * std::max(std::abs(rate), 1e-300)) {
      converged = true;
      break;
    }
  }

  RateReport report = sum_rate(model, state);
  report.trace = std::move(trace);
  report.iterations = iter;
  report.converged = converged;
  report.regularized = report.regularized || regularized;
  return {std::move(state), std::move(report)};
}

BeamformingState mr_precoder(const LinkModel& model) {
  check_allocation(model);
  BeamformingState s = empty_state(model);
  const int M = model.M();
  for (int c = 0; c < model.Lc(); ++c) {
    const auto& members = model.clusters.clusters[c];
    for (int k = 0; k < model.K(); ++k) {
      const int d = model.streams(k, c);
      const CMatrix g = collective_channel(model.channels, members, k);
      Eigen::JacobiSVD<CMatrix> svd(g, Eigen::ComputeFullV);
      const CMatrix w = svd.matrixV().leftCols(d);
      for (std::size_t j = 0; j < members.size(); ++j)
        s.precoders(k, members[j]) = w.middleRows(static_cast<Eigen::Index>(j) * M, M);
    }
  }
  for (int l = 0; l < model.L(); ++l) {
    int streams = 0;
    for (int k = 0; k < model.K(); ++k) streams += model.streams_at_ap(k, l);
    const double target = std::sqrt(1.0 / streams);
    for (int k = 0; k < model.K(); ++k) {
      CMatrix& w = s.precoders(k, l);
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        const double n = w.col(j).norm();
        if (n > 0.0) w.col(j) *= target / n;
      }
    }
  }
  update_combiners(model, s);
  update_weights(model, s);
  return s;
}

}  // namespace pcnc
