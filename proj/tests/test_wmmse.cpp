#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pcnc/wmmse.hpp"
#include "test_support.hpp"

using namespace pcnc;
using namespace testing;

TEST_CASE("initialization is feasible at full power") {
  Rng rng(1);
  for (int t = 0; t < 30; ++t) {
    const Instance in = random_instance(rng);
    Rng a(10 + t);
    Rng b(1000 + t);
    const BeamformingState s1 = init_precoders(in.model(), a);
    const BeamformingState s2 = init_precoders(in.model(), b);
    for (int l = 0; l < in.model().L(); ++l) {
      CHECK(per_ap_power(s1, l) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(per_ap_power(s2, l) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(max_abs(s1.precoders(0, 0) - s2.precoders(0, 0)) > 0.0);
  }
  const Instance scalar = scalar_instance(Complex(0.3, 0.2), 4.0);
  Rng r(2);
  const BeamformingState s = init_precoders(scalar.model(), r);
  CHECK(std::abs(s.precoders(0, 0)(0, 0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("weights") {
  Rng rng(3);
  SUBCASE("zero precoders give identity") {
    const Instance in = random_instance(rng);
    BeamformingState s = random_state(in, rng);
    for (auto& w : s.precoders) w.setZero();
    update_weights(in.model(), s);
    for (const auto& c : s.weights) CHECK(max_abs(c - CMatrix::Identity(c.rows(), c.cols())) < 1e-15);
  }
  SUBCASE("scalar: one plus SNR") {
    const Complex g(0.7, -0.4);
    const Complex w(0.6, 0.8);
    const double rho = 9.0;
    const Instance in = scalar_instance(g, rho);
    BeamformingState s = empty_state(in.model());
    s.precoders(0, 0)(0, 0) = w;
    update_combiners(in.model(), s);
    update_weights(in.model(), s);
    CHECK(s.weights(0, 0)(0, 0).real() == doctest::Approx(1.0 + rho * std::norm(g * w)).epsilon(1e-13));
    CHECK(std::abs(s.weights(0, 0)(0, 0).imag()) < 1e-13);
  }
  SUBCASE("log-det of the weights is the rate at the MMSE combiner") {
    for (int t = 0; t < 50; ++t) {
      const Instance in = random_instance(rng);
      BeamformingState s = random_state(in, rng);
      const LinkModel m = in.model();
      update_combiners(m, s);
      update_weights(m, s);
      for (int k = 0; k < m.K(); ++k)
        for (int c = 0; c < m.Lc(); ++c) {
          CHECK(hermitian_defect(s.weights(k, c)) == 0.0);
          CHECK(std::abs(log2_det(s.weights(k, c)) - stream_rate(m, s, k, c)) <= 1e-8);
        }
    }
  }
}

TEST_CASE("MSE matrix") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const Instance in = random_instance(rng);
    BeamformingState s = random_state(in, rng);
    const LinkModel m = in.model();
    for (int k = 0; k < m.K(); ++k)
      for (int c = 0; c < m.Lc(); ++c) {
        const CMatrix e = mse_matrix(m, s, k, c);
        CHECK(max_abs(e - brute_mse(in, s, s.combiners(k, c), k, c)) <= 1e-10 * std::max(1.0, max_abs(e)));
        CHECK(min_hermitian_eigenvalue(e) >= -1e-10);
      }
    update_combiners(m, s);
    update_weights(m, s);
    for (int k = 0; k < m.K(); ++k)
      for (int c = 0; c < m.Lc(); ++c) {
        const CMatrix e = mse_matrix(m, s, k, c);
        CHECK(max_abs(e - s.weights(k, c).inverse()) <= 1e-9);
      }
    // Zero precoders and combiners.
    BeamformingState z = s;
    for (auto& w : z.precoders) w.setZero();
    for (auto& v : z.combiners) v.setZero();
    const CMatrix e0 = mse_matrix(m, z, 0, 0);
    CHECK(max_abs(e0 - CMatrix::Identity(e0.rows(), e0.cols())) == 0.0);
  }
}

TEST_CASE("objective is sum tr(CE) - ln|C|") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const Instance in = random_instance(rng);
    const BeamformingState s = prepared_state(in, rng);
    double ref = brute_weighted_trace(in, s);
    for (const auto& c : s.weights) ref -= log2_det(c) * std::log(2.0);
    CHECK(rel_diff(weighted_mse_objective(in.model(), s), ref) < 1e-10);
  }
}

TEST_CASE("AP terms") {
  Rng rng(6);
  SUBCASE("single UE, single AP: no coupling") {
    Instance in;
    in.channels = random_channels(1, 1, 3, 2, rng);
    in.clusters = fully_coherent(1);
    in.alloc.d = IMatrix::Constant(1, 1, 2);
    in.rho = 5.0;
    const BeamformingState s = prepared_state(in, rng);
    const LagrangeTerms t = lambda_terms(in.model(), s, 0, 0);
    const CMatrix ref = std::sqrt(in.rho) * in.channels(0, 0).adjoint() * s.combiners(0, 0) * s.weights(0, 0);
    // Components on null modes of the quadratic part are dropped; check on its range.
    const CMatrix a = in.rho * in.channels(0, 0).adjoint() * s.combiners(0, 0) * s.weights(0, 0) *
                      s.combiners(0, 0).adjoint() * in.channels(0, 0);
    CHECK(max_abs(a * (t.lambda - ref)) <= 1e-10 * std::max(1.0, max_abs(a * ref)));
  }
  SUBCASE("reconstruction and T") {
    for (int n = 0; n < 30; ++n) {
      const Instance in = random_instance(rng);
      const BeamformingState s = prepared_state(in, rng);
      for (int l = 0; l < in.model().L(); ++l) {
        const ApTerms t = ap_terms(in.model(), s, l);
        const CMatrix rebuilt = t.psi * t.sigma.cast<Complex>().asDiagonal() * t.psi.adjoint();
        CHECK((rebuilt - t.a).norm() <= 1e-10 * std::max(1.0, t.a.norm()));
        CHECK((t.sigma.array() >= 0.0).all());
        // Independent assembly of the quadratic matrix.
        CMatrix aref = CMatrix::Zero(t.a.rows(), t.a.cols());
        for (int k1 = 0; k1 < in.model().K(); ++k1)
          for (int c1 = 0; c1 < in.model().Lc(); ++c1) {
            const CMatrix u = in.channels(k1, l).adjoint() * s.combiners(k1, c1);
            aref += in.rho * u * s.weights(k1, c1) * u.adjoint();
          }
        CHECK((aref - t.a).norm() <= 1e-10 * std::max(1.0, aref.norm()));
        for (int k = 0; k < in.model().K(); ++k) {
          const CMatrix tt = t.psi.adjoint() * t.lambda[k] * t.lambda[k].adjoint() * t.psi;
          CHECK(max_abs(tt - t.t[k]) <= 1e-10 * std::max(1.0, max_abs(tt)));
          CHECK(min_hermitian_eigenvalue(t.t[k]) >= -1e-10);
        }
      }
    }
  }
}

TEST_CASE("power of lambda") {
  Rng rng(7);
  SUBCASE("zero T") {
    ApTerms t = synthetic_terms(rng, 3, 2, 0.0);
    for (double lam : {0.0, 0.5, 10.0}) CHECK(power_of_lambda(t, lam) == 0.0);
    CHECK(bisect_lambda(t, 1e-8) == 0.0);
  }
  SUBCASE("unbounded at zero on a loaded null mode") {
    ApTerms t = synthetic_terms(rng, 3, 1, 1.0);
    t.t[0](0, 0) = 1.0;
    CHECK(std::isinf(power_of_lambda(t, 0.0)));
    const double lam = bisect_lambda(t, 1e-8);
    CHECK(lam > 0.0);
    CHECK(power_of_lambda(t, lam) <= 1.0 + 1e-9);
  }
  SUBCASE("direct trace of the closed-form precoders") {
    for (int n = 0; n < 100; ++n) {
      const ApTerms t = synthetic_terms(rng, uniform_int(rng, 1, 5), uniform_int(rng, 1, 3),
                                        uniform_real(rng, 0.1, 5.0));
      const double lam = std::pow(10.0, uniform_real(rng, -3.0, 2.0));
      double direct = 0.0;
      const Eigen::Index M = t.a.rows();
      const CMatrix shifted = t.a + lam * CMatrix::Identity(M, M);
      for (const auto& lk : t.lambda) direct += shifted.lu().solve(lk).squaredNorm();
      CHECK(rel_diff(power_of_lambda(t, lam), direct) <= 1e-8);
      double blocks = 0.0;
      for (std::size_t k = 0; k < t.lambda.size(); ++k) blocks += precoder_block(t, static_cast<int>(k), lam).squaredNorm();
      CHECK(rel_diff(blocks, direct) <= 1e-8);
    }
  }
  SUBCASE("strictly decreasing") {
    const ApTerms t = synthetic_terms(rng, 4, 2, 1.0);
    double prev = power_of_lambda(t, 0.01);
    for (double lam = 0.02; lam <= 100.0; lam *= 1.5) {
      const double p = power_of_lambda(t, lam);
      CHECK(p < prev);
      prev = p;
    }
  }
}

TEST_CASE("lambda search") {
  Rng rng(8);
  SUBCASE("slack constraint") {
    ApTerms t;
    t.psi = CMatrix::Identity(1, 1);
    t.sigma = RVector::Constant(1, 2.0);
    t.a = CMatrix::Constant(1, 1, 2.0);
    t.lambda = {CMatrix::Constant(1, 1, std::sqrt(2.0))};
    t.t = {CMatrix::Constant(1, 1, 2.0)};
    CHECK(power_of_lambda(t, 0.0) == doctest::Approx(0.5));
    CHECK(bisect_lambda(t, 1e-8) == 0.0);
  }
  SUBCASE("scalar closed form") {
    for (int n = 0; n < 200; ++n) {
      const double s = uniform_real(rng, 0.0, 3.0);
      const double tt = uniform_real(rng, 0.01, 50.0);
      ApTerms t;
      t.psi = CMatrix::Identity(1, 1);
      t.sigma = RVector::Constant(1, s);
      t.a = CMatrix::Constant(1, 1, s);
      t.lambda = {CMatrix::Constant(1, 1, std::sqrt(tt))};
      t.t = {CMatrix::Constant(1, 1, tt)};
      const double expected = std::max(0.0, std::sqrt(tt) - s);
      CHECK(std::abs(bisect_lambda(t, 1e-10) - expected) <= 1e-8 * std::max(1.0, expected));
    }
  }
  SUBCASE("grid oracle and upper bound") {
    int active = 0;
    for (int n = 0; n < 100; ++n) {
      const ApTerms t = synthetic_terms(rng, uniform_int(rng, 1, 5), uniform_int(rng, 1, 3),
                                        uniform_real(rng, 0.2, 20.0));
      const double ub = lambda_upper_bound(t);
      CHECK(power_of_lambda(t, ub) <= 1.0);
      const double lam = bisect_lambda(t, 1e-8);
      if (power_of_lambda(t, 0.0) <= 1.0) {
        CHECK(lam == 0.0);
        continue;
      }
      ++active;
      // Smallest of 1e5 log-spaced points with power <= 1.
      const int points = 100000;
      const double lo = ub * 1e-10;
      double root = ub;
      for (int i = 0; i < points; ++i) {
        const double x = lo * std::pow(ub / lo, double(i) / (points - 1));
        if (power_of_lambda(t, x) <= 1.0) {
          root = x;
          break;
        }
      }
      CHECK(std::abs(lam - root) <= 1e-3 * root);
      CHECK(std::abs(power_of_lambda(t, lam) - 1.0) <= 1e-6);
    }
    CHECK(active > 50);
  }
  SUBCASE("solver terms obey the upper bound") {
    for (int n = 0; n < 50; ++n) {
      const Instance in = random_instance(rng, 4, 4, 3, 2, 1.0, 1e4);
      const BeamformingState s = prepared_state(in, rng);
      for (int l = 0; l < in.model().L(); ++l) {
        const ApTerms t = ap_terms(in.model(), s, l);
        CHECK(power_of_lambda(t, lambda_upper_bound(t)) <= 1.0);
      }
    }
  }
}

TEST_CASE("precoder block") {
  Rng rng(9);
  SUBCASE("scalar reduction") {
    const Complex g(0.8, 0.3);
    const double rho = 6.0;
    const Instance in = scalar_instance(g, rho);
    BeamformingState s = empty_state(in.model());
    s.precoders(0, 0)(0, 0) = Complex(0.5, -0.5);
    update_combiners(in.model(), s);
    update_weights(in.model(), s);
    const ApTerms t = ap_terms(in.model(), s, 0);
    const Complex v = s.combiners(0, 0)(0, 0);
    const double c = s.weights(0, 0)(0, 0).real();
    for (double lam : {0.0, 0.3, 4.0}) {
      const Complex expected = std::sqrt(rho) * std::conj(g) * v * c / (rho * std::norm(g) * std::norm(v) * c + lam);
      CHECK(std::abs(precoder_block(t, 0, lam)(0, 0) - expected) <= 1e-12 * std::abs(expected));
    }
  }
  SUBCASE("vanishes as lambda grows") {
    const Instance in = random_instance(rng);
    const BeamformingState s = prepared_state(in, rng);
    const ApTerms t = ap_terms(in.model(), s, 0);
    CHECK(max_abs(precoder_block(t, 0, 1e14)) < 1e-10);
  }
}

TEST_CASE("stationarity of the precoder update") {
  Rng rng(10);
  int constrained = 0;
  for (int n = 0; n < 20; ++n) {
    Instance in = random_instance(rng, 4, 4, 3, 2, 1.0, 50.0);
    BeamformingState s = prepared_state(in, rng);
    const LinkModel m = in.model();
    const int l = uniform_int(rng, 0, m.L() - 1);
    const ApTerms t = ap_terms(m, s, l);
    const double lam = bisect_lambda(t, 1e-12);
    constrained += lam > 0.0;
    BeamformingState zero = s;
    for (int k = 0; k < m.K(); ++k) {
      s.precoders(k, l) = precoder_block(t, k, lam);
      zero.precoders(k, l).setZero();
    }
    const double h = 1e-4;
    const RVector g = fd_gradient(in, s, l, lam, h);
    const RVector scale = fd_gradient(in, zero, l, 0.0, h);
    CHECK(g.norm() <= 1e-4 * scale.norm());
  }
  CHECK(constrained > 0);
}

TEST_CASE("BCD contract") {
  Rng rng(11);
  SolverConfig cfg;
  for (int n = 0; n < 50; ++n) {
    const Instance in = random_instance(rng, 4, 4, 3, 2, 1.0, n % 2 == 0 ? 30.0 : 3000.0);
    const LinkModel m = in.model();
    BeamformingState s = prepared_state(in, rng);
    auto allowed = [&](double before) { return 1e-8 * std::max(1.0, std::abs(before)); };
    double obj = weighted_mse_objective(m, s);
    double rate = sum_rate(m, s).sum_rate;
    for (int it = 0; it < 25; ++it) {
      std::vector<double> lambdas;
      update_precoders(m, s, cfg, &lambdas);
      double next = weighted_mse_objective(m, s);
      CHECK(next <= obj + allowed(obj));
      obj = next;
      for (int l = 0; l < m.L(); ++l) {
        CHECK(per_ap_power(s, l) <= 1.0 + 1e-6);
        if (lambdas[l] > 1e-6) CHECK(std::abs(per_ap_power(s, l) - 1.0) <= 1e-4);
      }
      update_combiners(m, s);
      next = weighted_mse_objective(m, s);
      CHECK(next <= obj + allowed(obj));
      obj = next;
      update_weights(m, s);
      next = weighted_mse_objective(m, s);
      CHECK(next <= obj + allowed(obj));
      obj = next;
      const double r = sum_rate(m, s).sum_rate;
      CHECK(r >= rate - 1e-6);
      rate = r;
    }
  }
}

TEST_CASE("solver") {
  SUBCASE("scalar link converges to full power") {
    for (double rho : {0.5, 10.0, 1e4}) {
      const Instance in = scalar_instance(1.0, rho);
      Rng rng(1);
      auto [s, r] = wmmse_solve(in.model(), SolverConfig{}, rng);
      CHECK(r.converged);
      CHECK(std::abs(r.sum_rate - std::log2(1.0 + rho)) <= 1e-6);
      CHECK(std::norm(s.precoders(0, 0)(0, 0)) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("trace and report") {
    Rng rng(12);
    for (int n = 0; n < 20; ++n) {
      const Instance in = random_instance(rng);
      Rng init(n);
      auto [s, r] = wmmse_solve(in.model(), SolverConfig{}, init);
      REQUIRE(r.trace.size() == static_cast<std::size_t>(r.iterations) + 1);
      for (std::size_t i = 1; i < r.trace.size(); ++i) {
        CHECK(r.trace[i].sum_rate >= r.trace[i - 1].sum_rate - 1e-6);
        CHECK(r.trace[i].objective <= r.trace[i - 1].objective + 1e-8 * std::max(1.0, std::abs(r.trace[i - 1].objective)));
        CHECK(r.trace[i].max_power <= 1.0 + 1e-6);
      }
      CHECK(max_ap_power(s) <= 1.0 + 1e-6);
      CHECK(r.sum_rate == doctest::Approx(sum_rate(in.model(), s).sum_rate).epsilon(1e-12));
      CHECK(r.iterations <= SolverConfig{}.max_outer_iters);
      // Deterministic given the seed.
      Rng again(n);
      CHECK(wmmse_solve(in.model(), SolverConfig{}, again).second.sum_rate == r.sum_rate);
    }
  }
  SUBCASE("iteration cap") {
    Rng rng(13);
    const Instance in = random_instance(rng, 4, 4, 3, 2, 100.0, 1000.0);
    SolverConfig cfg;
    cfg.max_outer_iters = 2;
    cfg.rate_tol = 1e-15;
    Rng init(1);
    const RateReport r = wmmse_solve(in.model(), cfg, init).second;
    CHECK(r.iterations == 2);
    CHECK_FALSE(r.converged);
  }
  SUBCASE("FC and FNC through the same path") {
    Rng rng(14);
    Instance in = random_instance(rng, 4, 3, 3, 2);
    const int L = in.model().L();
    for (const ClusterSet& cs : {fully_coherent(L), fully_noncoherent(L)}) {
      Instance v = in;
      v.clusters = cs;
      v.alloc.d = IMatrix::Ones(in.model().K(), cs.size());
      Rng init(3);
      auto [s, r] = wmmse_solve(v.model(), SolverConfig{}, init);
      CHECK(r.sum_rate > 0.0);
      CHECK(max_ap_power(s) <= 1.0 + 1e-6);
    }
    Instance one;
    one.channels = random_channels(2, 1, 3, 2, rng);
    one.clusters = fully_coherent(1);
    one.alloc.d = IMatrix::Ones(2, 1);
    Instance other = one;
    other.clusters = fully_noncoherent(1);
    Rng a(5);
    Rng b(5);
    CHECK(wmmse_solve(one.model(), SolverConfig{}, a).second.sum_rate ==
          wmmse_solve(other.model(), SolverConfig{}, b).second.sum_rate);
  }
  SUBCASE("invalid allocation is rejected") {
    Rng rng(15);
    Instance in = random_instance(rng);
    in.alloc.d(0, 0) = 9;
    Rng init(1);
    CHECK_THROWS_AS(wmmse_solve(in.model(), SolverConfig{}, init), std::invalid_argument);
  }
}

TEST_CASE("MR baseline") {
  Rng rng(16);
  SUBCASE("conjugate beamforming for single-antenna UEs") {
    Instance in;
    in.channels = random_channels(3, 4, 4, 1, rng);
    in.clusters = ClusterSet::from_clusters({{0, 3}, {1}, {2}}, 4);
    in.alloc.d = IMatrix::Ones(3, 3);
    const BeamformingState s = mr_precoder(in.model());
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 4; ++l) {
        const CVector w = s.precoders(k, l).col(0);
        const CVector g = in.channels(k, l).adjoint().col(0);
        CHECK(std::abs(w.dot(g)) == doctest::Approx(w.norm() * g.norm()).epsilon(1e-12));
      }
    for (int l = 0; l < 4; ++l) CHECK(per_ap_power(s, l) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("full power with several streams") {
    for (int n = 0; n < 20; ++n) {
      const Instance in = random_instance(rng);
      const BeamformingState s = mr_precoder(in.model());
      for (int l = 0; l < in.model().L(); ++l)
        CHECK(per_ap_power(s, l) == doctest::Approx(1.0).epsilon(1e-12));
      // Combiners are MMSE for these precoders.
      for (int k = 0; k < in.model().K(); ++k)
        for (int c = 0; c < in.model().Lc(); ++c)
          CHECK(max_abs(s.combiners(k, c) - mmse_combiner(in.model(), s, k, c)) <= 1e-12);
    }
  }
  SUBCASE("WMMSE beats MR on a single-antenna toy") {
    for (int n = 0; n < 20; ++n) {
      Instance in;
      in.channels = random_channels(2, 2, 1, 1, rng);
      in.clusters = fully_noncoherent(2);
      in.alloc.d = IMatrix::Ones(2, 2);
      in.rho = 10.0;
      const double mr = sum_rate(in.model(), mr_precoder(in.model())).sum_rate;
      Rng init(n);
      const double w = wmmse_solve(in.model(), SolverConfig{}, init).second.sum_rate;
      CHECK(w >= mr - 1e-9);
    }
  }
}
