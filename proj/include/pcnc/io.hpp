#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pcnc/clustering.hpp"
#include "pcnc/config.hpp"
#include "pcnc/experiments.hpp"
#include "pcnc/geometry_channel.hpp"
#include "pcnc/motivating_example.hpp"
#include "pcnc/rates.hpp"
#include "json.hpp"

namespace pcnc {

using Json = nlohmann::json;

/// %.9g.
std::string format_double(double x);

/// x rounded to 9 significant digits so that JSON dumps stay short and stable.
double round9(double x);

/// Throws ConfigError naming the offending key (dotted path) for unknown keys,
/// wrong types and out-of-range values.
ScenarioConfig parse_config(const Json& j);
ScenarioConfig load_config(const std::string& path);
Json to_json(const ScenarioConfig& c);

/// Optional "sweep" section of a config file.
SweepSpec parse_sweep(const Json& j);

/// Optional "example" section: the two-AP rate table.
struct ExampleSpec {
  int M = 16;
  int N = 2;
  double alpha = 0.7;
  std::vector<double> rho_db{-40, -35, -30, -25, -20, -15, -10};
  NormMode norm_mode = NormMode::IID;
  int trials = 1000;
  std::uint64_t seed = 1;
};
ExampleSpec parse_example(const Json& j);

Json to_json(const NetworkRealization& net);
Json to_json(const ClusterSet& clusters);
Json to_json(const StreamAllocation& alloc);
Json to_json(const RateReport& report);
Json to_json(const TrialRecord& rec);
Json to_json(const ExperimentResult& result);
Json to_json(const SweepRow& row);

StreamAllocation parse_allocation(const Json& j);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_figure1_csv(std::ostream& os, const std::vector<Figure1Row>& rows);
void write_trials_csv(std::ostream& os, const ExperimentResult& result);

}  // namespace pcnc
