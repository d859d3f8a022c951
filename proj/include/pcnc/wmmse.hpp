#pragma once

#include <utility>
#include <vector>

#include "pcnc/config.hpp"
#include "pcnc/rates.hpp"

namespace pcnc {

/// Eigen-terms of the per-AP precoder subproblem. `sigma` are the eigenvalues of the
/// rho-scaled quadratic matrix A_l (shared by every UE at AP l), `lambda[k]` is the
/// affine coefficient of W_kl and t[k] = psi^H lambda[k] lambda[k]^H psi.
struct ApTerms {
  CMatrix psi;
  RVector sigma;
  CMatrix a;  // the assembled A_l
  std::vector<CMatrix> lambda;
  std::vector<CMatrix> t;
};

/// Single-UE view of ApTerms.
struct LagrangeTerms {
  CMatrix psi;
  RVector sigma;
  CMatrix lambda;
  CMatrix t;
};

/// Random-perturbed per-AP singular-vector start at full power on every AP.
BeamformingState init_precoders(const LinkModel& model, Rng& rng);

/// V_kc <- MMSE combiner for the current precoders.
void update_combiners(const LinkModel& model, BeamformingState& state);

/// C_kc <- (I - sqrt(rho) V^H Ḡ W̄)^{-1}, Hermitian-symmetrized.
void update_weights(const LinkModel& model, BeamformingState& state, bool* regularized = nullptr);

/// MSE matrix of stream (k, c) under combiner `u`.
CMatrix mse_matrix(const LinkModel& model, const EffectiveChannels& eff, const CMatrix& u, int k,
                   int c);
CMatrix mse_matrix(const LinkModel& model, const BeamformingState& state, int k, int c);

/// sum_kc tr(C E) - ln|C|. Natural log: with it C = E^{-1} is the exact C-step minimizer.
double weighted_mse_objective(const LinkModel& model, const BeamformingState& state);

/// Terms of AP l at the current (V, C) and the other APs' precoders.
ApTerms ap_terms(const LinkModel& model, const BeamformingState& state, int l);
LagrangeTerms lambda_terms(const LinkModel& model, const BeamformingState& state, int k, int l);

/// sum_k sum_m t_k[m,m] / (sigma[m] + lam)^2; +inf if some zero denominator has t > 0.
double power_of_lambda(const ApTerms& terms, double lam);

/// lam = 0 when the unconstrained solution fits, otherwise the root of power = 1 from a
/// bisection on [0, sqrt(sum t_mm)] down to relative width eps, then Newton-polished.
double bisect_lambda(const ApTerms& terms, double eps);

/// sqrt(sum_k sum_m t_k[m,m]); power_of_lambda(upper) <= 1.
double lambda_upper_bound(const ApTerms& terms);

/// (A_l + lam I)^{-1} Lambda_kl via the eigendecomposition; null modes map to zero.
CMatrix precoder_block(const ApTerms& terms, int k, double lam);

/// One ascending sweep over the APs. Returns the largest multiplier used.
double update_precoders(const LinkModel& model, BeamformingState& state, const SolverConfig& cfg,
                        std::vector<double>* lambdas = nullptr);

/// Alternating MMSE combiner / weight / precoder updates until the relative sum-rate
/// change drops below cfg.rate_tol. Throws NumericalError if the objective increases
/// while cfg.verify_monotone is set.
std::pair<BeamformingState, RateReport> wmmse_solve(const LinkModel& model,
                                                    const SolverConfig& cfg, Rng& rng);

/// Coherent matched filter: each stream follows the top right singular vectors of the
/// collective channel, each AP splits its power evenly over its streams, and the
/// combiners are MMSE.
BeamformingState mr_precoder(const LinkModel& model);

}  // namespace pcnc
