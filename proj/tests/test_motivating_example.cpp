#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>

#include "pcnc/motivating_example.hpp"
#include "test_support.hpp"

using namespace pcnc;
using namespace testing;

namespace {

constexpr double kAlpha = 0.7;

TwoApInstance unit_instance(std::uint64_t seed, double rho, int M = 16, int N = 2) {
  Rng rng(seed);
  TwoApInstance inst = example_channels(M, N, kAlpha, NormMode::UNIT, rng);
  inst.rho = rho;
  return inst;
}

/// Unit-norm structured example, coherent reception: AP 1 beams along a, AP 2 splits
/// its power between b (adds coherently with AP 1 on g) and c (alone on f).
double aligned_unit_oracle(double rho) {
  double best = 0.0;
  const int points = 100000;
  for (int i = 0; i <= points; ++i) {
    const double p2 = double(i) / points;
    const double amp = 1.0 + std::sqrt(1.0 - p2);
    best = std::max(best, std::log2(1.0 + rho * amp * amp) + std::log2(1.0 + kAlpha * kAlpha * rho * p2));
  }
  return best;
}

/// Same structure with independent codewords: powers add on g instead of amplitudes.
double sic_unit_oracle(double rho) {
  double best = 0.0;
  const int points = 100000;
  for (int i = 0; i <= points; ++i) {
    const double pb = double(i) / points;
    best = std::max(best, std::log2(1.0 + rho * (1.0 + pb)) +
                              std::log2(1.0 + kAlpha * kAlpha * rho * (1.0 - pb)));
  }
  return best;
}

void check_feasible(const CovarianceSolution& s, int M, bool block_diagonal) {
  REQUIRE(s.K.rows() == 2 * M);
  CHECK(s.K.topLeftCorner(M, M).trace().real() <= 1.0 + 1e-10);
  CHECK(s.K.bottomRightCorner(M, M).trace().real() <= 1.0 + 1e-10);
  CHECK(min_hermitian_eigenvalue(s.K) >= -1e-10);
  if (block_diagonal) CHECK(max_abs(s.K.topRightCorner(M, M)) == 0.0);
  for (std::size_t i = 1; i < s.history.size(); ++i) CHECK(s.history[i] >= s.history[i - 1]);
}

}  // namespace

TEST_CASE("structured channels") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TwoApInstance u = unit_instance(seed, 1.0, 4 + static_cast<int>(seed % 5), 2 + static_cast<int>(seed % 3));
    CHECK(std::abs(u.g.dot(u.f)) < 1e-12);
    CHECK(std::abs(u.c.dot(u.b)) < 1e-12);
    for (const CVector* v : {&u.g, &u.f, &u.a, &u.b, &u.c}) CHECK(v->norm() == doctest::Approx(1.0).epsilon(1e-12));
    Eigen::JacobiSVD<CMatrix> svd(u.G2);
    CHECK(svd.singularValues()(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(svd.singularValues()(1) == doctest::Approx(kAlpha).epsilon(1e-12));
    CHECK(std::abs(u.f.dot(u.G2 * u.b)) < 1e-12);
    Eigen::JacobiSVD<CMatrix> s1(u.G1);
    CHECK(s1.singularValues()(1) < 1e-12 * s1.singularValues()(0));

    Rng rng(seed);
    const TwoApInstance iid = example_channels(16, 2, kAlpha, NormMode::IID, rng);
    CHECK(std::abs(iid.g.dot(iid.f)) < 1e-12);
    CHECK(iid.g.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(iid.f.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(max_abs(iid.G1 - iid.g * iid.a.adjoint()) == 0.0);
  }
  Rng rng(1);
  CHECK_THROWS_AS(example_channels(1, 2, kAlpha, NormMode::UNIT, rng), std::invalid_argument);
  CHECK_THROWS_AS(example_channels(4, 1, kAlpha, NormMode::UNIT, rng), std::invalid_argument);
  CHECK(parse_norm_mode("iid") == NormMode::IID);
  CHECK(parse_norm_mode("UNIT") == NormMode::UNIT);
  CHECK(to_string(NormMode::UNIT) == "unit");
  CHECK_THROWS(parse_norm_mode("gaussian"));
}

TEST_CASE("single-AP capacity") {
  const CMatrix g = CMatrix::Constant(1, 1, Complex(0.6, 0.3));
  CHECK(single_ap_capacity(g, 7.0) == doctest::Approx(std::log2(1.0 + 7.0 * std::norm(g(0, 0)))).epsilon(1e-13));
  // Two equal singular values at high rho: even split.
  const double s = 0.8;
  const CMatrix two = s * CMatrix::Identity(2, 3);
  const double rho = 1e3;
  CHECK(single_ap_capacity(two, rho) == doctest::Approx(2.0 * std::log2(1.0 + rho * s * s / 2.0)).epsilon(1e-13));

  // Waterfilling against the projected-gradient solver with the other AP switched off.
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const CMatrix G = complex_gaussian(uniform_int(rng, 1, 4), uniform_int(rng, 1, 4), rng);
    const double r = std::pow(10.0, uniform_real(rng, -2.0, 2.0));
    const CMatrix zero = CMatrix::Zero(G.rows(), G.cols());
    const double wf = single_ap_capacity(G, r);
    CHECK(std::abs(aligned_capacity(G, zero, r).rate - wf) <= 1e-6 * std::max(1.0, wf));
    CHECK(std::abs(sic_capacity(G, zero, r).rate - wf) <= 1e-6 * std::max(1.0, wf));
    CHECK(std::abs(sic_capacity(zero, G, r).rate - wf) <= 1e-6 * std::max(1.0, wf));
  }
}

TEST_CASE("aligned capacity: unit-norm grid oracle") {
  for (double rho : {0.1, 1.0, 10.0}) {
    const TwoApInstance inst = unit_instance(3, rho);
    const CovarianceSolution s = aligned_capacity(inst.G1, inst.G2, rho);
    CHECK(std::abs(s.rate - aligned_unit_oracle(rho)) <= 1e-4);
    check_feasible(s, 16, false);
  }
}

TEST_CASE("SIC rate: unit-norm grid oracle") {
  for (double rho : {0.1, 1.0, 10.0}) {
    const TwoApInstance inst = unit_instance(4, rho);
    const CovarianceSolution s = sic_capacity(inst.G1, inst.G2, rho);
    CHECK(std::abs(s.rate - sic_unit_oracle(rho)) <= 1e-3);
    check_feasible(s, 16, true);
  }
}

TEST_CASE("aligned capacity increases with rho") {
  Rng rng(5);
  const TwoApInstance inst = example_channels(6, 2, kAlpha, NormMode::IID, rng);
  double prev = 0.0;
  for (double db = -30.0; db <= 20.0; db += 5.0) {
    const double r = aligned_capacity(inst.G1, inst.G2, std::pow(10.0, db / 10.0)).rate;
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("ZF rank-one rates") {
  SUBCASE("orthonormal effective columns") {
    CMatrix G1 = CMatrix::Zero(2, 2);
    CMatrix G2 = CMatrix::Zero(2, 2);
    G1(0, 0) = 1.0;
    G2(1, 1) = 1.0;
    CVector w1 = CVector::Zero(2);
    CVector w2 = CVector::Zero(2);
    w1(0) = 1.0;
    w2(1) = 1.0;
    const ZfRate r = zf_rank1_rate(G1, G2, 3.0, w1, w2);
    CHECK_FALSE(r.degenerate);
    CHECK(r.rate == doctest::Approx(2.0 * std::log2(4.0)).epsilon(1e-14));
  }
  SUBCASE("structured: beams a and c") {
    for (double rho : {0.01, 0.3, 5.0}) {
      const TwoApInstance inst = unit_instance(6, rho);
      const ZfRate r = zf_rank1_rate(inst, inst.a, inst.c);
      CHECK_FALSE(r.degenerate);
      CHECK(std::abs(r.rate - (std::log2(1.0 + rho) + std::log2(1.0 + kAlpha * kAlpha * rho))) <= 1e-12);
    }
  }
  SUBCASE("structured: beams a and b collapse") {
    const TwoApInstance inst = unit_instance(7, 1.0);
    const ZfRate r = zf_rank1_rate(inst, inst.a, inst.b);
    CHECK(r.degenerate);
    CHECK(r.rate == 0.0);
  }
  SUBCASE("beams are normalized internally") {
    Rng rng(8);
    const TwoApInstance inst = example_channels(5, 3, kAlpha, NormMode::IID, rng);
    const ZfRate a = zf_rank1_rate(inst.G1, inst.G2, 2.0, inst.a, inst.c);
    const ZfRate b = zf_rank1_rate(inst.G1, inst.G2, 2.0, 3.0 * inst.a, 0.1 * inst.c);
    CHECK(a.rate == doctest::Approx(b.rate).epsilon(1e-12));
  }
}

TEST_CASE("feasible-set nesting") {
  Rng rng(9);
  for (int t = 0; t < 40; ++t) {
    const int M = uniform_int(rng, 2, 6);
    const int N = uniform_int(rng, 2, 3);
    TwoApInstance inst = example_channels(M, N, kAlpha, t % 2 ? NormMode::IID : NormMode::UNIT, rng);
    inst.rho = std::pow(10.0, uniform_real(rng, -3.0, 1.5));
    const CovarianceSolution al = aligned_capacity(inst.G1, inst.G2, inst.rho);
    const CovarianceSolution sic = sic_capacity(inst.G1, inst.G2, inst.rho);
    check_feasible(al, M, false);
    check_feasible(sic, M, true);
    CHECK(sic.rate <= al.rate + 1e-8);
    CHECK(best_ap_rate(inst) <= sic.rate + 1e-8);
    for (int i = 0; i < 5; ++i) {
      const CVector w1 = complex_gaussian(M, 1, rng);
      const CVector w2 = complex_gaussian(M, 1, rng);
      CHECK(zf_rank1_rate(inst, w1, w2).rate <= sic.rate + 1e-8);
    }
    CHECK(zf_rank1_rate(inst, inst.a, inst.c).rate <= sic.rate + 1e-8);
    CHECK(aligned_capacity(inst) == doctest::Approx(al.rate).epsilon(1e-12));
    CHECK(sic_rate(inst) == doctest::Approx(sic.rate).epsilon(1e-12));
  }
}

TEST_CASE("rate table") {
  const std::vector<double> grid{-40, -35, -30, -25, -20, -15, -10};
  SUBCASE("unit mode closed form for beams a and c") {
    const auto rows = figure1_sweep(16, 2, kAlpha, grid, NormMode::UNIT, 3, 1);
    REQUIRE(rows.size() == grid.size() * kFigure1Strategies.size());
    for (const auto& r : rows)
      if (r.strategy == "zf_a_c") {
        const double rho = std::pow(10.0, r.rho_db / 10.0);
        CHECK(std::abs(r.rate - (std::log2(1.0 + rho) + std::log2(1.0 + 0.49 * rho))) <= 1e-10);
      }
  }
  SUBCASE("ordering and layout") {
    const auto rows = figure1_sweep(16, 2, kAlpha, grid, NormMode::IID, 10, 1);
    REQUIRE(rows.size() == grid.size() * kFigure1Strategies.size());
    std::map<double, std::map<std::string, double>> table;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].rho_db == grid[i / kFigure1Strategies.size()]);
      CHECK(rows[i].strategy == kFigure1Strategies[i % kFigure1Strategies.size()]);
      table[rows[i].rho_db][rows[i].strategy] = rows[i].rate;
    }
    for (auto& [db, r] : table) {
      CHECK(r["aligned"] > r["sic"]);
      CHECK(r["sic"] > r["zf_a_c"]);
      CHECK(r["zf_a_c"] > r["best_ap"]);
      CHECK(r["best_ap"] > r["zf_a_b"]);
    }
    // Same seed, same table.
    const auto again = figure1_sweep(16, 2, kAlpha, grid, NormMode::IID, 10, 1);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(again[i].rate == rows[i].rate);
  }
}
