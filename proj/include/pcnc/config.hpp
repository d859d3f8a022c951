#pragma once

#include <cstdint>
#include <string>

namespace pcnc {

/// How APs are grouped into phase-aligned clusters.
enum class Mode { FC, FNC, PCNC, EVEN_CLUSTER };

enum class AllocationKind { FIXED, GREEDY, EVEN, RANDOM };

enum class Precoding { WMMSE, MR };

struct AllocationPolicy {
  AllocationKind kind = AllocationKind::FIXED;
  int d = 1;  // stream count for FIXED/EVEN; per-pair floor for GREEDY
};

/// Stopping rules and tolerances of the BCD solver.
struct SolverConfig {
  int max_outer_iters = 100;
  double rate_tol = 1e-4;     // relative sum-rate change per outer iteration
  double bisect_eps = 1e-8;   // relative width of the final lambda bracket
  double power_tol = 1e-6;
  int inner_sweeps = 1;
  bool verify_monotone = true;  // abort when the weighted-MSE objective increases
  double monotone_tol = 1e-8;

  void validate() const;
};

struct ScenarioConfig {
  int L = 10;
  int M = 5;
  int K = 5;
  int N = 2;
  double area_side = 500.0;
  double min_ap_spacing = 50.0;
  double bandwidth = 5e7;
  double noise_figure_db = 9.0;
  double tx_power = 1.0;
  double ref_distance = 200.0;
  Mode mode = Mode::PCNC;
  AllocationPolicy allocation{AllocationKind::FIXED, 2};
  Precoding precoding = Precoding::WMMSE;
  int even_cluster_size = 2;
  std::uint64_t seed = 1;
  int trials = 100;
  int threads = 0;  // 0: hardware concurrency
  SolverConfig solver;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

std::string to_string(Mode m);
std::string to_string(AllocationKind k);
std::string to_string(Precoding p);
Mode parse_mode(const std::string& s);
AllocationKind parse_allocation_kind(const std::string& s);
Precoding parse_precoding(const std::string& s);

}  // namespace pcnc
