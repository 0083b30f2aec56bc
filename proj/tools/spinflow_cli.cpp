// Command-line front end: each subcommand runs one verification suite
// (verify-all runs the union) over a scenario assembled from built-in
// defaults, an optional JSON config file, and command-line flags, in that
// order of precedence. Exit code 0 = all checks passed, 1 = at least one
// check failed (or an unexpected runtime error), 2 = configuration error.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "spinflow/harness.hpp"

namespace {

// Values the parser writes into; only options that actually saw input are
// copied onto the scenario, so config-file settings survive unless a flag
// overrides them.
struct Staging {
  std::string config;
  std::string output;
  std::uint64_t seed = 0;
  bool json_stdout = false;

  int lambda = 0;
  int group_order = 1;
  int loop_k = 1;
  std::vector<int> loop_diag;
  std::string loop_file;

  int flow_samples = 9;
  double level = 0.0;

  double epsilon = 0.0;
  int quadrature_order = 32;
  int h_power = -1;

  int clifford_samples = 200;
  std::string fixed_point_file;
};

using OptionMap = std::map<std::string, CLI::Option*>;

void add_common(CLI::App* sub, Staging& st, OptionMap& m) {
  m["config"] = sub->add_option("--config", st.config,
                                "JSON config file supplying any scenario field");
  m["output"] = sub->add_option("--output", st.output,
                                "write the structured report to this path");
  m["seed"] = sub->add_option("--seed", st.seed, "random seed for sampled suites");
  m["json"] = sub->add_flag("--json", st.json_stdout,
                            "print the structured report to stdout instead of the table");
}

void add_model(CLI::App* sub, Staging& st, OptionMap& m) {
  m["lambda"] = sub->add_option("--lambda", st.lambda,
                                "Fourier cutoff (0 = smallest admissible 8(d+1))");
  m["group-order"] = sub->add_option("--group-order", st.group_order,
                                     "cyclic symmetry order p");
  m["loop-k"] = sub->add_option("--loop-k", st.loop_k, "scalar loop winding");
  m["loop-diag"] = sub->add_option("--loop-diag", st.loop_diag,
                                   "diagonal loop windings, comma separated")
                       ->delimiter(',');
  m["loop-file"] = sub->add_option("--loop-file", st.loop_file,
                                   "JSON loop specification file");
}

void add_flow(CLI::App* sub, Staging& st, OptionMap& m) {
  m["flow-samples"] = sub->add_option("--flow-samples", st.flow_samples,
                                      "number of path samples");
  m["level"] = sub->add_option("--level", st.level, "crossing level override");
}

void add_eta(CLI::App* sub, Staging& st, OptionMap& m) {
  m["epsilon"] = sub->add_option("--epsilon", st.epsilon,
                                 "heat time (0 = lower window end 30/lambda^2)");
  m["quadrature-order"] = sub->add_option("--quadrature-order", st.quadrature_order,
                                          "starting Gauss-Legendre order");
  m["h-power"] = sub->add_option("--h-power", st.h_power,
                                 "group element power (-1 = all residues)");
}

void add_clifford(CLI::App* sub, Staging& st, OptionMap& m) {
  m["clifford-samples"] = sub->add_option("--clifford-samples", st.clifford_samples,
                                          "random elements per rank");
}

void add_lefschetz(CLI::App* sub, Staging& st, OptionMap& m) {
  m["fixed-point-file"] = sub->add_option(
      "--fixed-point-file", st.fixed_point_file,
      "JSON fixed-point data file (omit for the built-in circle calibration)");
}

spinflow::Scenario build_scenario(const Staging& st, const OptionMap& m,
                                  const std::vector<std::string>& checks) {
  auto passed = [&](const char* key) {
    auto it = m.find(key);
    return it != m.end() && it->second->count() > 0;
  };

  spinflow::Scenario s;
  if (passed("config")) s = spinflow::load_scenario_file(st.config);

  if (passed("lambda")) s.lambda = st.lambda;
  if (passed("group-order")) s.group_order = st.group_order;
  // A loop flag replaces the config's loop source outright; mixing a config
  // loop file with, say, a command-line scalar winding would be ambiguous.
  if (passed("loop-k") || passed("loop-diag") || passed("loop-file")) {
    s.loop_k = 1;
    s.loop_diag.clear();
    s.loop_file.clear();
    if (passed("loop-k")) s.loop_k = st.loop_k;
    if (passed("loop-diag")) s.loop_diag = st.loop_diag;
    if (passed("loop-file")) s.loop_file = st.loop_file;
  }
  if (passed("flow-samples")) s.flow_samples = st.flow_samples;
  if (passed("level")) s.level = st.level;
  if (passed("epsilon")) s.epsilon = st.epsilon;
  if (passed("quadrature-order")) s.quadrature_order = st.quadrature_order;
  if (passed("h-power")) s.h_power = st.h_power;
  if (passed("clifford-samples")) s.clifford_samples = st.clifford_samples;
  if (passed("fixed-point-file")) s.fixed_point_file = st.fixed_point_file;
  if (passed("output")) s.output_path = st.output;
  if (passed("seed")) s.seed = st.seed;

  s.checks = checks;  // the subcommand, not the config, selects the suites
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spinflow: cross-verification lab for equivariant index, "
               "spectral flow, heat-trace and fixed-point computations"};
  app.require_subcommand(1);

  Staging st;
  st.seed = spinflow::Scenario{}.seed;

  struct SubEntry {
    std::vector<std::string> checks;
    OptionMap opts;
  };
  std::map<const CLI::App*, SubEntry> entries;

  auto make_sub = [&](const std::string& name, const std::string& desc,
                      const std::vector<std::string>& checks) {
    CLI::App* sub = app.add_subcommand(name, desc);
    entries[sub].checks = checks;
    add_common(sub, st, entries[sub].opts);
    return sub;
  };

  {
    CLI::App* sub = make_sub("clifford-check",
                             "trace formula on random Clifford elements", {"clifford-check"});
    add_clifford(sub, st, entries[sub].opts);
  }
  {
    CLI::App* sub = make_sub("index", "equivariant index vs winding", {"index"});
    add_model(sub, st, entries[sub].opts);
  }
  {
    CLI::App* sub = make_sub("specflow", "equivariant spectral flow vs index", {"specflow"});
    add_model(sub, st, entries[sub].opts);
    add_flow(sub, st, entries[sub].opts);
  }
  {
    CLI::App* sub = make_sub("eta", "heat-trace path integral vs index trace", {"eta"});
    add_model(sub, st, entries[sub].opts);
    add_flow(sub, st, entries[sub].opts);
    add_eta(sub, st, entries[sub].opts);
  }
  {
    CLI::App* sub = make_sub("lefschetz", "fixed-point evaluation", {"lefschetz"});
    add_lefschetz(sub, st, entries[sub].opts);
  }
  {
    CLI::App* sub = make_sub("verify-all", "every suite in declared order",
                             spinflow::kAllChecks);
    add_model(sub, st, entries[sub].opts);
    add_flow(sub, st, entries[sub].opts);
    add_eta(sub, st, entries[sub].opts);
    add_clifford(sub, st, entries[sub].opts);
    add_lefschetz(sub, st, entries[sub].opts);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const SubEntry& entry = entries.at(sub);
  try {
    spinflow::Scenario scenario = build_scenario(st, entry.opts, entry.checks);
    spinflow::Report report = spinflow::run_scenario(scenario);
    if (st.json_stdout)
      std::cout << spinflow::report_to_json(report).dump(2) << "\n";
    else
      std::cout << spinflow::render_table(report);
    spinflow::emit_report(report, scenario.output_path);
    return report.all_pass() ? 0 : 1;
  } catch (const spinflow::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const spinflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
