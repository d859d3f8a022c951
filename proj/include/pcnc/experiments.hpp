#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcnc/allocation.hpp"
#include "pcnc/clustering.hpp"
#include "pcnc/config.hpp"
#include "pcnc/geometry_channel.hpp"
#include "pcnc/rates.hpp"

namespace pcnc {

inline constexpr const char* kVersionTag = "pcnc-1.0.0";

struct TrialRecord {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  int num_clusters = 0;
  double sum_rate = 0.0;
  std::vector<double> ue_rates;
  int iterations = 0;
  bool converged = false;
  bool regularized = false;
  double wall_time = 0.0;  // seconds; kept out of serialized output
  std::string error;       // non-empty when the trial failed

  bool ok() const { return error.empty(); }
};

struct Aggregate {
  int trials = 0;  // successful trials
  int failed = 0;
  double mean_sum_rate = 0.0;
  double stderr_sum_rate = 0.0;
  double ue_rate_p10 = 0.0;
  double ue_rate_p50 = 0.0;
  double ue_rate_p90 = 0.0;
};

struct ExperimentResult {
  ScenarioConfig config;
  std::string version = kVersionTag;
  std::vector<TrialRecord> per_trial;
  Aggregate aggregate;
};

/// Everything produced for one trial of a scenario.
struct TrialOutcome {
  NetworkRealization net;
  ClusterSet clusters;
  StreamAllocation alloc;
  BeamformingState state;
  RateReport report;
};

ClusterSet build_clusters(const ScenarioConfig& config, const NetworkRealization& net);

/// FIXED/EVEN use min(d, M, N) streams per pair so that one config can sweep N.
StreamAllocation build_allocation(const ScenarioConfig& config, const NetworkRealization& net,
                                  const ClusterSet& clusters, std::uint64_t trial);

/// Realize, cluster, allocate and precode trial `trial`. A non-null `pinned` replaces
/// the configured allocation policy. Throws on failure.
TrialOutcome solve_trial(const ScenarioConfig& config, std::uint64_t trial,
                         const StreamAllocation* pinned = nullptr);

/// solve_trial with failures recorded in the returned record.
TrialRecord run_trial(const ScenarioConfig& config, std::uint64_t trial);

Aggregate aggregate(const std::vector<TrialRecord>& records);

/// Trials 0..config.trials-1, on up to config.threads workers.
ExperimentResult run_scenario(const ScenarioConfig& config);

/// One sweep series: a label and config overrides (as a JSON object text) applied on
/// top of the base config, e.g. {"mode": "FC"}.
struct SweepVariant {
  std::string label;
  std::string overrides;
};

struct SweepSpec {
  std::string axis = "D";  // D, L, M, N, K or rho_db
  std::vector<double> values;
  std::vector<SweepVariant> variants;
};

struct SweepRow {
  double axis_value = 0.0;
  std::string mode;
  double mean_sum_rate = 0.0;
  double stderr_sum_rate = 0.0;
  int trials = 0;
  int failed = 0;
};

/// Copy of `config` with the named axis set to `value`. rho_db sets the transmit
/// power so that rho = 10^(value / 10).
ScenarioConfig apply_axis(const ScenarioConfig& config, const std::string& axis, double value);

/// One run_scenario per (value, variant), all with the base seed so trials share
/// their random substreams across the sweep.
std::vector<SweepRow> sweep(const ScenarioConfig& config, const SweepSpec& spec);

}  // namespace pcnc
