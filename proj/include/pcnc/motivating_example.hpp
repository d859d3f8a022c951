#pragma once

#include <string>
#include <vector>

#include "pcnc/types.hpp"

namespace pcnc {

/// UNIT: every vector unit-norm with c orthogonal to b.
/// IID: g, f orthonormal, a, b, c with i.i.d. CN(0, 1) entries.
enum class NormMode { UNIT, IID };

std::string to_string(NormMode m);
NormMode parse_norm_mode(const std::string& s);

/// One UE with N antennas served by two M-antenna APs:
/// G1 = g a^H, G2 = g b^H + alpha f c^H.
struct TwoApInstance {
  CMatrix G1;
  CMatrix G2;
  double rho = 1.0;
  double alpha = 0.0;
  CVector g, f, a, b, c;
};

TwoApInstance example_channels(int M, int N, double alpha, NormMode mode, Rng& rng);

/// Optimum of a projected-gradient log-det maximization.
struct CovarianceSolution {
  double rate = 0.0;            // bits per channel use
  CMatrix K;                    // 2M x 2M (block-diagonal for SIC)
  std::vector<double> history;  // objective after every accepted step
  int iterations = 0;
};

/// max log2|I + rho H K H^H| over PSD K with tr(K11) <= 1, tr(K22) <= 1, H = [G1 G2].
CovarianceSolution aligned_capacity(const CMatrix& G1, const CMatrix& G2, double rho);
double aligned_capacity(const TwoApInstance& inst);

/// Same objective restricted to block-diagonal K (independent codewords with SIC).
CovarianceSolution sic_capacity(const CMatrix& G1, const CMatrix& G2, double rho);
double sic_rate(const TwoApInstance& inst);

/// Waterfilling over the singular values of G under tr(K) <= 1.
double single_ap_capacity(const CMatrix& G, double rho);
double best_ap_rate(const TwoApInstance& inst);

struct ZfRate {
  double rate = 0.0;
  bool degenerate = false;  // effective channel lost rank; rate reported as 0
};

/// Rank-one beams w1, w2 (normalized internally) with a ZF combiner at the UE.
ZfRate zf_rank1_rate(const CMatrix& G1, const CMatrix& G2, double rho, const CVector& w1,
                     const CVector& w2);
ZfRate zf_rank1_rate(const TwoApInstance& inst, const CVector& w1, const CVector& w2);

struct Figure1Row {
  double rho_db = 0.0;
  std::string strategy;
  double rate = 0.0;
};

inline const std::vector<std::string> kFigure1Strategies = {"aligned", "sic", "zf_a_c", "best_ap",
                                                            "zf_a_b"};

/// Mean rate of every strategy over `trials` channel draws at each rho (dB).
/// The same draws are reused across the rho grid.
std::vector<Figure1Row> figure1_sweep(int M, int N, double alpha,
                                      const std::vector<double>& rho_db, NormMode mode,
                                      int trials, std::uint64_t seed);

}  // namespace pcnc
