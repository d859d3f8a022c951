#include "pcnc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "pcnc/io.hpp"
#include "pcnc/wmmse.hpp"

namespace pcnc {

namespace {

std::uint64_t init_seed(const ScenarioConfig& config, std::uint64_t trial) {
  Rng r = substream(config.seed, trial, StreamRole::SolverInit);
  return r();
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

ClusterSet build_clusters(const ScenarioConfig& config, const NetworkRealization& net) {
  switch (config.mode) {
    case Mode::FC:
      return fully_coherent(net.num_aps());
    case Mode::FNC:
      return fully_noncoherent(net.num_aps());
    case Mode::PCNC:
      return cluster_aps(build_zones(net.ap_positions, config.ref_distance, net.area_side),
                         net.channels);
    case Mode::EVEN_CLUSTER:
      return even_distance_clustering(net.ap_positions, config.ref_distance, net.area_side,
                                      config.even_cluster_size);
  }
  throw std::logic_error("build_clusters: unknown mode");
}

StreamAllocation build_allocation(const ScenarioConfig& config, const NetworkRealization& net,
                                  const ClusterSet& clusters, std::uint64_t trial) {
  const int K = net.num_ues();
  const int Lc = clusters.size();
  const int cap = std::min(config.M, config.N);
  switch (config.allocation.kind) {
    case AllocationKind::FIXED:
    case AllocationKind::EVEN:
      return even_allocation(K, Lc, std::min(config.allocation.d, cap));
    case AllocationKind::RANDOM: {
      Rng rng = substream(config.seed, trial, StreamRole::Allocation);
      return random_allocation(K, Lc, config.M, config.N, rng);
    }
    case AllocationKind::GREEDY: {
      const IMatrix d_min = IMatrix::Constant(K, Lc, std::min(config.allocation.d, cap));
      return greedy_allocate(net.channels, net.rho, clusters, d_min, config.solver,
                             init_seed(config, trial));
    }
  }
  throw std::logic_error("build_allocation: unknown allocation kind");
}

TrialOutcome solve_trial(const ScenarioConfig& config, std::uint64_t trial,
                         const StreamAllocation* pinned) {
  TrialOutcome out;
  out.net = realize(config, trial);
  out.clusters = build_clusters(config, out.net);
  out.alloc = pinned ? *pinned : build_allocation(config, out.net, out.clusters, trial);
  const LinkModel model{out.net.channels, out.net.rho, out.clusters, out.alloc};
  if (config.precoding == Precoding::MR) {
    out.state = mr_precoder(model);
    out.report = sum_rate(model, out.state);
    out.report.converged = true;
  } else {
    Rng rng(init_seed(config, trial));
    auto [state, report] = wmmse_solve(model, config.solver, rng);
    out.state = std::move(state);
    out.report = std::move(report);
  }
  return out;
}

TrialRecord run_trial(const ScenarioConfig& config, std::uint64_t trial) {
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = config.seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const TrialOutcome out = solve_trial(config, trial);
    rec.num_clusters = out.clusters.size();
    rec.sum_rate = out.report.sum_rate;
    rec.ue_rates.assign(out.report.ue_rates.data(),
                        out.report.ue_rates.data() + out.report.ue_rates.size());
    rec.iterations = out.report.iterations;
    rec.converged = out.report.converged;
    rec.regularized = out.report.regularized;
  } catch (const NumericalError& e) {
    rec.error = std::string("numerical: ") + e.what();
  } catch (const PlacementError& e) {
    rec.error = std::string("placement: ") + e.what();
  }
  rec.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

Aggregate aggregate(const std::vector<TrialRecord>& records) {
  Aggregate a;
  std::vector<double> rates;
  std::vector<double> ue;
  for (const auto& r : records) {
    if (!r.ok()) {
      ++a.failed;
      continue;
    }
    rates.push_back(r.sum_rate);
    ue.insert(ue.end(), r.ue_rates.begin(), r.ue_rates.end());
  }
  a.trials = static_cast<int>(rates.size());
  if (a.trials > 0) {
    double sum = 0.0;
    for (double x : rates) sum += x;
    a.mean_sum_rate = sum / a.trials;
  }
  if (a.trials > 1) {
    double ss = 0.0;
    for (double x : rates) ss += (x - a.mean_sum_rate) * (x - a.mean_sum_rate);
    a.stderr_sum_rate = std::sqrt(ss / (a.trials - 1) / a.trials);
  }
  a.ue_rate_p10 = percentile(ue, 0.10);
  a.ue_rate_p50 = percentile(ue, 0.50);
  a.ue_rate_p90 = percentile(ue, 0.90);
  return a;
}

ExperimentResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  ExperimentResult result;
  result.config = config;
  result.per_trial.resize(config.trials);
  int workers = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, config.trials);
  if (workers == 1) {
    for (int t = 0; t < config.trials; ++t) result.per_trial[t] = run_trial(config, t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int t = next++; t < config.trials; t = next++) result.per_trial[t] = run_trial(config, t);
      });
    for (auto& th : pool) th.join();
  }
  result.aggregate = aggregate(result.per_trial);
  return result;
}

ScenarioConfig apply_axis(const ScenarioConfig& config, const std::string& axis, double value) {
  ScenarioConfig c = config;
  auto as_count = [&](const char* name) {
    const double r = std::round(value);
    if (std::abs(r - value) > 1e-9 || r < 1)
      throw ConfigError(std::string("sweep.values"), std::string("axis ") + name +
                                                          " needs positive integers");
    return static_cast<int>(r);
  };
  if (axis == "D")
    c.ref_distance = value;
  else if (axis == "L")
    c.L = as_count("L");
  else if (axis == "M")
    c.M = as_count("M");
  else if (axis == "N")
    c.N = as_count("N");
  else if (axis == "K")
    c.K = as_count("K");
  else if (axis == "rho_db")
    c.tx_power = std::pow(10.0, value / 10.0) * noise_power(c.bandwidth, c.noise_figure_db);
  else
    throw ConfigError("sweep.axis", "unknown axis '" + axis + "'");
  return c;
}

std::vector<SweepRow> sweep(const ScenarioConfig& config, const SweepSpec& spec) {
  std::vector<SweepRow> rows;
  std::vector<SweepVariant> variants = spec.variants;
  if (variants.empty()) variants.push_back({to_string(config.mode), "{}"});
  for (double v : spec.values) {
    for (const auto& var : variants) {
      Json merged = to_json(apply_axis(config, spec.axis, v));
      merged.merge_patch(Json::parse(var.overrides));
      const ScenarioConfig c = parse_config(merged);
      const ExperimentResult r = run_scenario(c);
      rows.push_back({v, var.label, r.aggregate.mean_sum_rate, r.aggregate.stderr_sum_rate,
                      r.aggregate.trials, r.aggregate.failed});
    }
  }
  return rows;
}

}  // namespace pcnc
