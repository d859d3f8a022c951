// Command-line front end: generate, cluster, solve, sweep, example.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "pcnc/experiments.hpp"
#include "pcnc/io.hpp"
#include "pcnc/motivating_example.hpp"

namespace {

using namespace pcnc;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> mode;
  std::optional<double> ref_distance;
  std::string out;
  std::string format;
  std::uint64_t trial = 0;
  std::string allocation_path;
  std::string axis;
  std::vector<double> values;
  std::string norm_mode;
};

void emit_error(const Json& j) { std::cerr << j.dump() << std::endl; }

Json load_json(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
}

ScenarioConfig scenario(const Options& o, const Json& raw) {
  ScenarioConfig c = parse_config(raw);
  if (o.seed) c.seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (o.mode) c.mode = parse_mode(*o.mode);
  if (o.ref_distance) c.ref_distance = *o.ref_distance;
  c.validate();
  return c;
}

// Explicit --format wins, then the --out extension, then the command default.
std::string output_format(const Options& o, const std::string& fallback) {
  std::string f = o.format;
  if (f.empty() && o.out.size() > 4) {
    const std::string ext = o.out.substr(o.out.size() - 4);
    if (ext == ".csv") f = "csv";
    if (ext == "json") f = "json";
  }
  if (f.empty()) f = fallback;
  if (f != "csv" && f != "json") throw ConfigError("--format", "expected csv or json");
  return f;
}

void write_output(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw ConfigError("--out", "cannot write '" + o.out + "'");
  f << text;
}

int cmd_generate(const Options& o) {
  const ScenarioConfig c = scenario(o, load_json(o.config_path));
  const NetworkRealization net = realize(c, o.trial);
  std::ostringstream os;
  if (output_format(o, "json") == "csv") {
    os << "k,l,beta\n";
    for (int k = 0; k < net.num_ues(); ++k)
      for (int l = 0; l < net.num_aps(); ++l)
        os << k << ',' << l << ',' << format_double(net.beta(k, l)) << '\n';
  } else {
    Json j = to_json(net);
    j["trial"] = o.trial;
    j["seed"] = c.seed;
    os << j.dump(2) << '\n';
  }
  write_output(o, os.str());
  return 0;
}

int cmd_cluster(const Options& o) {
  const ScenarioConfig c = scenario(o, load_json(o.config_path));
  const NetworkRealization net = realize(c, o.trial);
  const ClusterSet cl = build_clusters(c, net);
  std::ostringstream os;
  if (output_format(o, "json") == "csv") {
    os << "ap,cluster\n";
    for (int l = 0; l < cl.num_aps(); ++l) os << l << ',' << cl.cluster_of[l] << '\n';
  } else {
    Json j = to_json(cl);
    j["mode"] = to_string(c.mode);
    j["ref_distance"] = round9(c.ref_distance);
    j["max_cluster_diameter"] = round9(max_cluster_diameter(cl, net.ap_positions, net.area_side));
    os << j.dump(2) << '\n';
  }
  write_output(o, os.str());
  return 0;
}

int cmd_solve(const Options& o) {
  const ScenarioConfig c = scenario(o, load_json(o.config_path));
  std::optional<StreamAllocation> pinned;
  if (!o.allocation_path.empty()) pinned = parse_allocation(load_json(o.allocation_path));
  TrialOutcome out;
  try {
    out = solve_trial(c, o.trial, pinned ? &*pinned : nullptr);
  } catch (const NumericalError& e) {
    emit_error({{"error", "numerical"}, {"trial", o.trial}, {"seed", c.seed}, {"message", e.what()}});
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("--allocation", e.what());
  }
  std::ostringstream os;
  if (output_format(o, "json") == "csv") {
    os << "k,c,d,rate\n";
    for (Eigen::Index k = 0; k < out.report.stream_rates.rows(); ++k)
      for (Eigen::Index cc = 0; cc < out.report.stream_rates.cols(); ++cc)
        os << k << ',' << cc << ',' << out.alloc.d(k, cc) << ','
           << format_double(out.report.stream_rates(k, cc)) << '\n';
  } else {
    Json j{{"trial", o.trial},
           {"config", to_json(c)},
           {"clusters", to_json(out.clusters)},
           {"allocation", to_json(out.alloc)},
           {"report", to_json(out.report)}};
    os << j.dump(2) << '\n';
  }
  write_output(o, os.str());
  return 0;
}

int cmd_sweep(const Options& o) {
  const Json raw = load_json(o.config_path);
  const ScenarioConfig c = scenario(o, raw);
  SweepSpec spec;
  if (raw.contains("sweep")) spec = parse_sweep(raw.at("sweep"));
  if (!o.axis.empty()) spec.axis = o.axis;
  if (!o.values.empty()) spec.values = o.values;
  if (spec.values.empty()) throw ConfigError("sweep.values", "no sweep values given");
  // --mode pins every series to one mode.
  if (o.mode) spec.variants.clear();
  const std::vector<SweepRow> rows = sweep(c, spec);

  std::ostringstream os;
  if (output_format(o, "csv") == "csv") {
    write_sweep_csv(os, rows);
  } else {
    Json j = Json::array();
    for (const auto& r : rows) j.push_back(to_json(r));
    os << Json{{"axis", spec.axis}, {"rows", j}}.dump(2) << '\n';
  }
  write_output(o, os.str());

  Json failures = Json::array();
  for (const auto& r : rows)
    if (r.failed > 0)
      failures.push_back({{"axis_value", round9(r.axis_value)}, {"mode", r.mode}, {"failed_trials", r.failed}});
  if (!failures.empty()) {
    emit_error({{"error", "numerical"}, {"seed", c.seed}, {"context", failures}});
    return kExitNumerical;
  }
  return 0;
}

int cmd_example(const Options& o) {
  const Json raw = load_json(o.config_path);
  ExampleSpec e;
  if (raw.contains("example")) e = parse_example(raw.at("example"));
  if (o.seed) e.seed = *o.seed;
  if (o.trials) e.trials = *o.trials;
  if (!o.norm_mode.empty()) e.norm_mode = parse_norm_mode(o.norm_mode);
  if (e.trials < 1) throw ConfigError("--trials", "must be >= 1");
  std::vector<Figure1Row> rows;
  try {
    rows = figure1_sweep(e.M, e.N, e.alpha, e.rho_db, e.norm_mode, e.trials, e.seed);
  } catch (const NumericalError& err) {
    emit_error({{"error", "numerical"}, {"seed", e.seed}, {"message", err.what()}});
    return kExitNumerical;
  }
  std::ostringstream os;
  if (output_format(o, "csv") == "csv") {
    write_figure1_csv(os, rows);
  } else {
    Json j = Json::array();
    for (const auto& r : rows)
      j.push_back({{"rho_db", round9(r.rho_db)}, {"strategy", r.strategy}, {"rate", round9(r.rate)}});
    os << Json{{"norm_mode", to_string(e.norm_mode)}, {"trials", e.trials}, {"rows", j}}.dump(2)
       << '\n';
  }
  write_output(o, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partially coherent cell-free MIMO simulator"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "scenario JSON file");
    sub->add_option("--seed", o.seed, "base seed");
    sub->add_option("--trials", o.trials, "Monte Carlo trials (channel draws for example)");
    sub->add_option("--mode", o.mode, "FC, FNC, PCNC or EVEN_CLUSTER");
    sub->add_option("--ref-distance", o.ref_distance, "reference distance D in meters");
    sub->add_option("--out", o.out, "output file (default stdout)");
    sub->add_option("--format", o.format, "csv or json");
  };
  auto* gen = app.add_subcommand("generate", "emit one network realization");
  auto* clu = app.add_subcommand("cluster", "emit the AP clusters of one realization");
  auto* sol = app.add_subcommand("solve", "cluster, allocate and precode one realization");
  auto* swp = app.add_subcommand("sweep", "mean sum rate over a parameter axis");
  auto* exm = app.add_subcommand("example", "two-AP rate table");
  for (auto* s : {gen, clu, sol, swp, exm}) common(s);
  for (auto* s : {gen, clu, sol}) s->add_option("--trial", o.trial, "trial index (default 0)");
  sol->add_option("--allocation", o.allocation_path, "JSON K x Lc stream allocation to pin");
  swp->add_option("--axis", o.axis, "D, L, M, N, K or rho_db");
  swp->add_option("--values", o.values, "axis values")->delimiter(',');
  exm->add_option("--norm-mode", o.norm_mode, "iid or unit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error({{"error", "usage"}, {"message", e.what()}});
    return kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_generate(o);
    if (clu->parsed()) return cmd_cluster(o);
    if (sol->parsed()) return cmd_solve(o);
    if (swp->parsed()) return cmd_sweep(o);
    if (exm->parsed()) return cmd_example(o);
  } catch (const ConfigError& e) {
    emit_error({{"error", "config"}, {"field", e.field()}, {"message", e.what()}});
    return kExitConfig;
  } catch (const PlacementError& e) {
    emit_error({{"error", "config"}, {"field", "min_ap_spacing"}, {"message", e.what()}});
    return kExitConfig;
  } catch (const NumericalError& e) {
    emit_error({{"error", "numerical"}, {"message", e.what()}});
    return kExitNumerical;
  } catch (const std::exception& e) {
    emit_error({{"error", "internal"}, {"message", e.what()}});
    return 1;
  }
  return 1;
}
