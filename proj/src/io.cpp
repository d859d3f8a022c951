#include "pcnc/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace pcnc {

// ---- enums -----------------------------------------------------------------

namespace {

std::string upper(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

}  // namespace

std::string to_string(Mode m) {
  switch (m) {
    case Mode::FC: return "FC";
    case Mode::FNC: return "FNC";
    case Mode::PCNC: return "PCNC";
    case Mode::EVEN_CLUSTER: return "EVEN_CLUSTER";
  }
  return "?";
}

std::string to_string(AllocationKind k) {
  switch (k) {
    case AllocationKind::FIXED: return "FIXED";
    case AllocationKind::GREEDY: return "GREEDY";
    case AllocationKind::EVEN: return "EVEN";
    case AllocationKind::RANDOM: return "RANDOM";
  }
  return "?";
}

std::string to_string(Precoding p) { return p == Precoding::MR ? "MR" : "WMMSE"; }

Mode parse_mode(const std::string& s) {
  const std::string u = upper(s);
  if (u == "FC") return Mode::FC;
  if (u == "FNC") return Mode::FNC;
  if (u == "PCNC") return Mode::PCNC;
  if (u == "EVEN_CLUSTER") return Mode::EVEN_CLUSTER;
  throw ConfigError("mode", "expected FC, FNC, PCNC or EVEN_CLUSTER, got '" + s + "'");
}

AllocationKind parse_allocation_kind(const std::string& s) {
  const std::string u = upper(s);
  if (u == "FIXED") return AllocationKind::FIXED;
  if (u == "GREEDY") return AllocationKind::GREEDY;
  if (u == "EVEN") return AllocationKind::EVEN;
  if (u == "RANDOM") return AllocationKind::RANDOM;
  throw ConfigError("allocation.kind",
                    "expected FIXED, GREEDY, EVEN or RANDOM, got '" + s + "'");
}

Precoding parse_precoding(const std::string& s) {
  const std::string u = upper(s);
  if (u == "WMMSE") return Precoding::WMMSE;
  if (u == "MR") return Precoding::MR;
  throw ConfigError("precoding", "expected WMMSE or MR, got '" + s + "'");
}

// ---- validation ------------------------------------------------------------

void SolverConfig::validate() const {
  if (max_outer_iters < 1) throw ConfigError("solver.max_outer_iters", "must be >= 1");
  if (!(rate_tol > 0)) throw ConfigError("solver.rate_tol", "must be positive");
  if (!(bisect_eps > 0 && bisect_eps < 1)) throw ConfigError("solver.bisect_eps", "must be in (0, 1)");
  if (!(power_tol > 0)) throw ConfigError("solver.power_tol", "must be positive");
  if (inner_sweeps < 1) throw ConfigError("solver.inner_sweeps", "must be >= 1");
  if (!(monotone_tol > 0)) throw ConfigError("solver.monotone_tol", "must be positive");
}

void ScenarioConfig::validate() const {
  if (L < 1) throw ConfigError("L", "must be >= 1");
  if (M < 1) throw ConfigError("M", "must be >= 1");
  if (K < 1) throw ConfigError("K", "must be >= 1");
  if (N < 1) throw ConfigError("N", "must be >= 1");
  if (!(area_side > 0) || !std::isfinite(area_side)) throw ConfigError("area_side", "must be positive");
  if (!(min_ap_spacing >= 0)) throw ConfigError("min_ap_spacing", "must be >= 0");
  if (!(bandwidth > 0)) throw ConfigError("bandwidth", "must be positive");
  if (!std::isfinite(noise_figure_db)) throw ConfigError("noise_figure_db", "must be finite");
  if (!(tx_power > 0) || !std::isfinite(tx_power)) throw ConfigError("tx_power", "must be positive");
  if (!(ref_distance >= 0)) throw ConfigError("ref_distance", "must be >= 0");
  if (allocation.d < 1) throw ConfigError("allocation.d", "must be >= 1");
  if (even_cluster_size < 1) throw ConfigError("even_cluster_size", "must be >= 1");
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  if (threads < 0) throw ConfigError("threads", "must be >= 0");
  solver.validate();
}

// ---- number formatting -----------------------------------------------------

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

double round9(double x) {
  if (!std::isfinite(x)) return x;
  return std::stod(format_double(x));
}

// ---- config parsing --------------------------------------------------------

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const Json& j, const std::string& prefix, const std::set<std::string>& known) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError(join(prefix, it.key()), "unknown key");
}

template <typename T>
void read(const Json& j, const std::string& prefix, const char* key, T& out) {
  if (!j.contains(key)) return;
  const Json& v = j.at(key);
  const std::string field = join(prefix, key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(field, "expected a boolean");
    out = v.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (v.is_number_integer() || v.is_number_unsigned()) {
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && v.get<long long>() < 0)
          throw ConfigError(field, "expected a non-negative integer");
      }
      out = v.get<T>();
    } else if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) {
      out = static_cast<T>(v.get<double>());
    } else {
      throw ConfigError(field, "expected an integer");
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError(field, "expected a number");
    out = v.get<double>();
  } else {
    if (!v.is_string()) throw ConfigError(field, "expected a string");
    out = v.get<std::string>();
  }
}

const std::set<std::string> kTopKeys = {
    "L", "M", "K", "N", "area_side", "min_ap_spacing", "bandwidth", "noise_figure_db",
    "tx_power", "ref_distance", "mode", "allocation", "precoding", "even_cluster_size", "seed",
    "trials", "threads", "solver", "sweep", "example", "description"};

}  // namespace

ScenarioConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  reject_unknown(j, "", kTopKeys);
  ScenarioConfig c;
  read(j, "", "L", c.L);
  read(j, "", "M", c.M);
  read(j, "", "K", c.K);
  read(j, "", "N", c.N);
  read(j, "", "area_side", c.area_side);
  read(j, "", "min_ap_spacing", c.min_ap_spacing);
  read(j, "", "bandwidth", c.bandwidth);
  read(j, "", "noise_figure_db", c.noise_figure_db);
  read(j, "", "tx_power", c.tx_power);
  read(j, "", "ref_distance", c.ref_distance);
  std::string s;
  if (j.contains("mode")) {
    read(j, "", "mode", s);
    c.mode = parse_mode(s);
  }
  if (j.contains("precoding")) {
    read(j, "", "precoding", s);
    c.precoding = parse_precoding(s);
  }
  if (j.contains("allocation")) {
    const Json& a = j.at("allocation");
    if (!a.is_object()) throw ConfigError("allocation", "expected an object");
    reject_unknown(a, "allocation", {"kind", "d"});
    if (a.contains("kind")) {
      read(a, "allocation", "kind", s);
      c.allocation.kind = parse_allocation_kind(s);
      // The greedy floor defaults to one stream per pair.
      if (c.allocation.kind == AllocationKind::GREEDY) c.allocation.d = 1;
    }
    read(a, "allocation", "d", c.allocation.d);
  }
  read(j, "", "even_cluster_size", c.even_cluster_size);
  read(j, "", "seed", c.seed);
  read(j, "", "trials", c.trials);
  read(j, "", "threads", c.threads);
  if (j.contains("solver")) {
    const Json& sv = j.at("solver");
    if (!sv.is_object()) throw ConfigError("solver", "expected an object");
    reject_unknown(sv, "solver",
                   {"max_outer_iters", "rate_tol", "bisect_eps", "power_tol", "inner_sweeps",
                    "verify_monotone", "monotone_tol"});
    read(sv, "solver", "max_outer_iters", c.solver.max_outer_iters);
    read(sv, "solver", "rate_tol", c.solver.rate_tol);
    read(sv, "solver", "bisect_eps", c.solver.bisect_eps);
    read(sv, "solver", "power_tol", c.solver.power_tol);
    read(sv, "solver", "inner_sweeps", c.solver.inner_sweeps);
    read(sv, "solver", "verify_monotone", c.solver.verify_monotone);
    read(sv, "solver", "monotone_tol", c.solver.monotone_tol);
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

Json to_json(const ScenarioConfig& c) {
  return Json{{"L", c.L},
              {"M", c.M},
              {"K", c.K},
              {"N", c.N},
              {"area_side", c.area_side},
              {"min_ap_spacing", c.min_ap_spacing},
              {"bandwidth", c.bandwidth},
              {"noise_figure_db", c.noise_figure_db},
              {"tx_power", c.tx_power},
              {"ref_distance", c.ref_distance},
              {"mode", to_string(c.mode)},
              {"allocation", {{"kind", to_string(c.allocation.kind)}, {"d", c.allocation.d}}},
              {"precoding", to_string(c.precoding)},
              {"even_cluster_size", c.even_cluster_size},
              {"seed", c.seed},
              {"trials", c.trials},
              {"threads", c.threads},
              {"solver",
               {{"max_outer_iters", c.solver.max_outer_iters},
                {"rate_tol", c.solver.rate_tol},
                {"bisect_eps", c.solver.bisect_eps},
                {"power_tol", c.solver.power_tol},
                {"inner_sweeps", c.solver.inner_sweeps},
                {"verify_monotone", c.solver.verify_monotone},
                {"monotone_tol", c.solver.monotone_tol}}}};
}

SweepSpec parse_sweep(const Json& j) {
  if (!j.is_object()) throw ConfigError("sweep", "expected an object");
  reject_unknown(j, "sweep", {"axis", "values", "modes", "variants"});
  SweepSpec spec;
  read(j, "sweep", "axis", spec.axis);
  if (!j.contains("values") || !j.at("values").is_array() || j.at("values").empty())
    throw ConfigError("sweep.values", "expected a non-empty array of numbers");
  for (const auto& v : j.at("values")) {
    if (!v.is_number()) throw ConfigError("sweep.values", "expected numbers");
    spec.values.push_back(v.get<double>());
  }
  if (j.contains("modes")) {
    if (!j.at("modes").is_array()) throw ConfigError("sweep.modes", "expected an array");
    for (const auto& m : j.at("modes")) {
      if (!m.is_string()) throw ConfigError("sweep.modes", "expected strings");
      const Mode mode = parse_mode(m.get<std::string>());
      spec.variants.push_back({to_string(mode), Json{{"mode", to_string(mode)}}.dump()});
    }
  }
  if (j.contains("variants")) {
    if (!j.at("variants").is_array()) throw ConfigError("sweep.variants", "expected an array");
    for (std::size_t i = 0; i < j.at("variants").size(); ++i) {
      const Json& v = j.at("variants")[i];
      const std::string field = "sweep.variants[" + std::to_string(i) + "]";
      if (!v.is_object() || !v.contains("label") || !v.at("label").is_string())
        throw ConfigError(field, "expected {\"label\": ..., \"overrides\": {...}}");
      reject_unknown(v, field, {"label", "overrides"});
      const Json ov = v.value("overrides", Json::object());
      if (!ov.is_object()) throw ConfigError(field + ".overrides", "expected an object");
      spec.variants.push_back({v.at("label").get<std::string>(), ov.dump()});
    }
  }
  return spec;
}

ExampleSpec parse_example(const Json& j) {
  if (!j.is_object()) throw ConfigError("example", "expected an object");
  reject_unknown(j, "example", {"M", "N", "alpha", "rho_db", "norm_mode", "trials", "seed"});
  ExampleSpec e;
  read(j, "example", "M", e.M);
  read(j, "example", "N", e.N);
  read(j, "example", "alpha", e.alpha);
  read(j, "example", "trials", e.trials);
  read(j, "example", "seed", e.seed);
  if (j.contains("norm_mode")) {
    std::string s;
    read(j, "example", "norm_mode", s);
    try {
      e.norm_mode = parse_norm_mode(s);
    } catch (const ConfigError& err) {
      throw ConfigError("example.norm_mode", err.what());
    }
  }
  if (j.contains("rho_db")) {
    if (!j.at("rho_db").is_array()) throw ConfigError("example.rho_db", "expected an array");
    e.rho_db.clear();
    for (const auto& v : j.at("rho_db")) {
      if (!v.is_number()) throw ConfigError("example.rho_db", "expected numbers");
      e.rho_db.push_back(v.get<double>());
    }
  }
  if (e.M < 2) throw ConfigError("example.M", "must be >= 2");
  if (e.N < 2) throw ConfigError("example.N", "must be >= 2");
  if (e.trials < 1) throw ConfigError("example.trials", "must be >= 1");
  return e;
}

// ---- result serialization --------------------------------------------------

namespace {

Json real_matrix(const RMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(round9(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Rows of interleaved (re, im) pairs.
Json complex_matrix(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(round9(m(i, j).real()));
      row.push_back(round9(m(i, j).imag()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void round_numbers(Json& j) {
  if (j.is_number_float()) {
    j = round9(j.get<double>());
  } else if (j.is_structured()) {
    for (auto& v : j) round_numbers(v);
  }
}

Json points(const std::vector<Point>& ps) {
  Json out = Json::array();
  for (const auto& p : ps) out.push_back({round9(p.x()), round9(p.y())});
  return out;
}

}  // namespace

Json to_json(const NetworkRealization& net) {
  Json channels = Json::array();
  for (std::size_t k = 0; k < net.channels.rows(); ++k) {
    Json row = Json::array();
    for (std::size_t l = 0; l < net.channels.cols(); ++l)
      row.push_back(complex_matrix(net.channels(k, l)));
    channels.push_back(std::move(row));
  }
  return Json{{"rho", round9(net.rho)},
              {"area_side", round9(net.area_side)},
              {"ap_positions", points(net.ap_positions)},
              {"ue_positions", points(net.ue_positions)},
              {"beta", real_matrix(net.beta)},
              {"channels", std::move(channels)}};
}

Json to_json(const ClusterSet& clusters) {
  return Json{{"clusters", clusters.clusters},
              {"cluster_of", clusters.cluster_of},
              {"seed_ap", clusters.seed_ap}};
}

Json to_json(const StreamAllocation& alloc) {
  Json rows = Json::array();
  for (Eigen::Index k = 0; k < alloc.d.rows(); ++k) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < alloc.d.cols(); ++c) row.push_back(alloc.d(k, c));
    rows.push_back(std::move(row));
  }
  return Json{{"d", std::move(rows)}};
}

StreamAllocation parse_allocation(const Json& j) {
  const Json& rows = j.is_object() && j.contains("d") ? j.at("d") : j;
  if (!rows.is_array() || rows.empty() || !rows[0].is_array())
    throw ConfigError("allocation.d", "expected a K x Lc integer array");
  const auto K = static_cast<Eigen::Index>(rows.size());
  const auto Lc = static_cast<Eigen::Index>(rows[0].size());
  StreamAllocation a{IMatrix(K, Lc)};
  for (Eigen::Index k = 0; k < K; ++k) {
    if (!rows[k].is_array() || static_cast<Eigen::Index>(rows[k].size()) != Lc)
      throw ConfigError("allocation.d", "ragged rows");
    for (Eigen::Index c = 0; c < Lc; ++c) {
      const Json& v = rows[k][c];
      if (!v.is_number_integer() || v.get<int>() < 1)
        throw ConfigError("allocation.d[" + std::to_string(k) + "][" + std::to_string(c) + "]",
                          "expected a positive integer");
      a.d(k, c) = v.get<int>();
    }
  }
  return a;
}

Json to_json(const RateReport& report) {
  Json trace = Json::array();
  for (const auto& t : report.trace)
    trace.push_back({{"iter", t.iter},
                     {"sum_rate", round9(t.sum_rate)},
                     {"objective", round9(t.objective)},
                     {"max_power", round9(t.max_power)},
                     {"max_lambda", round9(t.max_lambda)}});
  Json ue = Json::array();
  for (Eigen::Index k = 0; k < report.ue_rates.size(); ++k) ue.push_back(round9(report.ue_rates(k)));
  return Json{{"sum_rate", round9(report.sum_rate)},
              {"ue_rates", std::move(ue)},
              {"stream_rates", real_matrix(report.stream_rates)},
              {"iterations", report.iterations},
              {"converged", report.converged},
              {"regularized", report.regularized},
              {"trace", std::move(trace)}};
}

Json to_json(const TrialRecord& rec) {
  Json ue = Json::array();
  for (double r : rec.ue_rates) ue.push_back(round9(r));
  Json j{{"trial", rec.trial},
         {"seed", rec.seed},
         {"num_clusters", rec.num_clusters},
         {"sum_rate", round9(rec.sum_rate)},
         {"ue_rates", std::move(ue)},
         {"iterations", rec.iterations},
         {"converged", rec.converged},
         {"regularized", rec.regularized}};
  if (!rec.ok()) j["error"] = rec.error;
  return j;
}

Json to_json(const ExperimentResult& result) {
  Json trials = Json::array();
  for (const auto& t : result.per_trial) trials.push_back(to_json(t));
  const Aggregate& a = result.aggregate;
  Json config = to_json(result.config);
  round_numbers(config);
  return Json{{"version", result.version},
              {"config", std::move(config)},
              {"aggregate",
               {{"trials", a.trials},
                {"failed", a.failed},
                {"mean_sum_rate", round9(a.mean_sum_rate)},
                {"stderr", round9(a.stderr_sum_rate)},
                {"ue_rate_p10", round9(a.ue_rate_p10)},
                {"ue_rate_p50", round9(a.ue_rate_p50)},
                {"ue_rate_p90", round9(a.ue_rate_p90)}}},
              {"per_trial", std::move(trials)}};
}

Json to_json(const SweepRow& row) {
  return Json{{"axis_value", round9(row.axis_value)},
              {"mode", row.mode},
              {"mean_sum_rate", round9(row.mean_sum_rate)},
              {"stderr", round9(row.stderr_sum_rate)},
              {"trials", row.trials},
              {"failed", row.failed}};
}

// ---- CSV -------------------------------------------------------------------

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "axis_value,mode,mean_sum_rate,stderr,trials\n";
  for (const auto& r : rows)
    os << format_double(r.axis_value) << ',' << r.mode << ',' << format_double(r.mean_sum_rate)
       << ',' << format_double(r.stderr_sum_rate) << ',' << r.trials << '\n';
}

void write_figure1_csv(std::ostream& os, const std::vector<Figure1Row>& rows) {
  os << "rho_db,strategy,rate\n";
  for (const auto& r : rows)
    os << format_double(r.rho_db) << ',' << r.strategy << ',' << format_double(r.rate) << '\n';
}

void write_trials_csv(std::ostream& os, const ExperimentResult& result) {
  os << "trial,seed,num_clusters,sum_rate,iterations,converged,error\n";
  for (const auto& t : result.per_trial)
    os << t.trial << ',' << t.seed << ',' << t.num_clusters << ',' << format_double(t.sum_rate)
       << ',' << t.iterations << ',' << (t.converged ? 1 : 0) << ',' << (t.ok() ? "" : "failed")
       << '\n';
}

}  // namespace pcnc
