#pragma once

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinflow/charclass.hpp"
#include "spinflow/circle.hpp"
#include "spinflow/clifford.hpp"
#include "spinflow/equispec.hpp"
#include "spinflow/errors.hpp"
#include "spinflow/eta.hpp"
#include "spinflow/specflow.hpp"

// Scenario-driven verification front end. A Scenario bundles the model
// parameters (loop, cutoff, symmetry order), per-suite knobs and the list of
// requested checks; run_scenario executes the suites in declared order and
// returns a Report whose structured form is byte-stable for a fixed scenario
// and seed (wall-clock fields excepted). Configuration problems -- missing or
// malformed files, parameters outside their admissible ranges, loops that
// violate the symmetry constraint -- surface as ConfigError before any check
// runs; genuine check failures are recorded with pass=false instead of
// throwing, so a run always yields a full report.

namespace spinflow {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

struct Scenario {
  // Circle model. lambda = 0 picks the smallest admissible cutoff 8(d+1).
  // The loop is taken from loop_file when set, else loop_diag, else loop_k.
  int lambda = 0;
  int group_order = 1;
  int loop_k = 1;
  std::vector<int> loop_diag;
  std::string loop_file;

  // Spectral flow.
  int flow_samples = 9;
  std::optional<double> level;  // crossing level override

  // Heat-trace integrals. epsilon = 0 picks the lower window end 30/Lambda^2.
  double epsilon = 0.0;
  int quadrature_order = 32;
  int h_power = -1;  // -1 = report every residue 0..p-1

  // Clifford trace suite.
  int clifford_samples = 200;

  // Fixed-point evaluation; empty = built-in circle calibration battery.
  std::string fixed_point_file;

  // Harness plumbing.
  std::vector<std::string> checks;
  std::string output_path;
  std::uint64_t seed = 20260814;
};

inline const std::vector<std::string> kAllChecks = {
    "clifford-check", "index", "specflow", "eta", "lefschetz"};

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

namespace detail {

inline cplx complex_from_json(const ordered_json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(what + " must be a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline ordered_json complex_to_json(cplx z) { return ordered_json::array({z.real(), z.imag()}); }

// JSON has no encoding for non-finite numbers; nlohmann would emit `null`
// silently, so make the substitution explicit.
inline ordered_json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline ordered_json rep_to_json(const RepElement& r) {
  ordered_json a = ordered_json::array();
  for (long long c : r.coeffs) a.push_back(c);
  return a;
}

inline void require_keys(const ordered_json& j, const std::vector<std::string>& allowed,
                         const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto& k : allowed)
      if (k == key) known = true;
    if (!known) throw ConfigError(what + " has an unknown key: " + key);
  }
}

inline ordered_json parse_json_file(const std::string& path, const std::string& what) {
  if (!std::filesystem::exists(path))
    throw ConfigError(what + " not found: " + path);
  std::ifstream in(path);
  if (!in) throw ConfigError(what + " could not be opened: " + path);
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(what + " is not valid JSON (" + path + "): " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Loop specification files
// ---------------------------------------------------------------------------

// {"N": 2, "p": 2, "coefficients": [{"j": 2, "matrix": [[[re,im],...],...]}]}
inline MatrixLoop loop_from_json(const ordered_json& j) {
  detail::require_keys(j, {"N", "p", "coefficients"}, "loop specification");
  if (!j.contains("N") || !j["N"].is_number_integer())
    throw ConfigError("loop specification needs an integer N");
  if (!j.contains("p") || !j["p"].is_number_integer())
    throw ConfigError("loop specification needs an integer p");
  if (!j.contains("coefficients") || !j["coefficients"].is_array())
    throw ConfigError("loop specification needs a coefficients array");
  int N = j["N"].get<int>();
  int p = j["p"].get<int>();
  if (N < 1 || N > 8) throw ConfigError("loop N must lie in [1, 8]");
  if (p < 1 || p > 12) throw ConfigError("loop p must lie in [1, 12]");

  std::map<int, Eigen::MatrixXcd> coeffs;
  for (const auto& entry : j["coefficients"]) {
    detail::require_keys(entry, {"j", "matrix"}, "loop coefficient");
    if (!entry.contains("j") || !entry["j"].is_number_integer())
      throw ConfigError("loop coefficient needs an integer Fourier mode j");
    if (!entry.contains("matrix") || !entry["matrix"].is_array())
      throw ConfigError("loop coefficient needs a matrix");
    int mode = entry["j"].get<int>();
    if (coeffs.count(mode)) throw ConfigError("duplicate Fourier mode in loop file");
    const auto& rows = entry["matrix"];
    if (static_cast<int>(rows.size()) != N)
      throw ConfigError("loop coefficient matrix must have N rows");
    Eigen::MatrixXcd A(N, N);
    for (int r = 0; r < N; ++r) {
      if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != N)
        throw ConfigError("loop coefficient matrix must have N columns per row");
      for (int c = 0; c < N; ++c)
        A(r, c) = detail::complex_from_json(rows[r][c], "loop matrix entry");
    }
    coeffs[mode] = A;
  }
  try {
    return MatrixLoop(N, p, std::move(coeffs));
  } catch (const Error& e) {
    throw ConfigError(std::string("loop specification rejected: ") + e.what());
  }
}

inline MatrixLoop load_loop_file(const std::string& path) {
  return loop_from_json(detail::parse_json_file(path, "loop file"));
}

// ---------------------------------------------------------------------------
// Fixed-point data files
// ---------------------------------------------------------------------------

struct LefschetzSpec {
  std::vector<FixedPointData> components;
  cplx expected_total;
  double tolerance = 1e-10;
};

inline FixedPointData fixed_point_from_json(const ordered_json& j) {
  detail::require_keys(j,
                       {"dim_f", "codim", "angles", "f_roots", "nu_roots", "generators",
                        "chern_character", "integrator"},
                       "fixed-point component");
  FixedPointData data;
  if (!j.contains("dim_f") || !j["dim_f"].is_number_integer())
    throw ConfigError("fixed-point component needs an integer dim_f");
  data.dim_f = j["dim_f"].get<int>();

  if (j.contains("angles")) {
    if (!j["angles"].is_array()) throw ConfigError("angles must be an array");
    for (const auto& a : j["angles"]) {
      if (!a.is_number()) throw ConfigError("angles must be numbers");
      data.angles.push_back(a.get<double>());
    }
  }
  if (j.contains("codim")) {
    if (!j["codim"].is_number_integer() ||
        j["codim"].get<int>() != 2 * static_cast<int>(data.angles.size()))
      throw ConfigError("codim must equal twice the number of normal angles");
  }
  auto read_names = [&](const char* key, std::vector<std::string>& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_array()) throw ConfigError(std::string(key) + " must be an array");
    for (const auto& s : j[key]) {
      if (!s.is_string()) throw ConfigError(std::string(key) + " must hold strings");
      out.push_back(s.get<std::string>());
    }
  };
  read_names("f_roots", data.f_roots);
  read_names("nu_roots", data.nu_roots);

  if (!j.contains("generators") || !j["generators"].is_array() || j["generators"].empty())
    throw ConfigError("fixed-point component needs a nonempty generators array");
  std::vector<Generator> gens;
  for (const auto& g : j["generators"]) {
    detail::require_keys(g, {"name", "degree"}, "generator");
    if (!g.contains("name") || !g["name"].is_string())
      throw ConfigError("generator needs a name");
    Generator gen;
    gen.name = g["name"].get<std::string>();
    if (g.contains("degree")) {
      if (!g["degree"].is_number_integer()) throw ConfigError("generator degree must be an integer");
      gen.degree = g["degree"].get<int>();
    }
    gens.push_back(gen);
  }
  try {
    data.ring = SeriesRing(gens, data.dim_f);
  } catch (const Error& e) {
    throw ConfigError(std::string("fixed-point ring rejected: ") + e.what());
  }

  if (!j.contains("chern_character") || !j["chern_character"].is_array())
    throw ConfigError("fixed-point component needs a chern_character term array");
  data.chern_character = FormSeries<cplx>::constant(data.ring, cplx(0.0));
  for (const auto& term : j["chern_character"]) {
    detail::require_keys(term, {"monomial", "value"}, "chern_character term");
    if (!term.contains("monomial") || !term["monomial"].is_object())
      throw ConfigError("chern_character term needs a monomial object");
    if (!term.contains("value"))
      throw ConfigError("chern_character term needs a value");
    std::vector<int> expo(data.ring.size(), 0);
    for (const auto& [name, e] : term["monomial"].items()) {
      if (!e.is_number_integer()) throw ConfigError("monomial exponents must be integers");
      int idx;
      try {
        idx = data.ring.index_of(name);
      } catch (const Error&) {
        throw ConfigError("monomial uses an unknown generator: " + name);
      }
      expo[idx] = e.get<int>();
    }
    cplx value = detail::complex_from_json(term["value"], "chern_character value");
    try {
      data.chern_character.add_term(expo, value);
    } catch (const Error& e) {
      throw ConfigError(std::string("chern_character term rejected: ") + e.what());
    }
  }

  if (!j.contains("integrator") || !j["integrator"].is_object())
    throw ConfigError("fixed-point component needs an integrator table");
  for (const auto& [name, value] : j["integrator"].items())
    data.integrator[name] = detail::complex_from_json(value, "integrator value");
  return data;
}

inline LefschetzSpec lefschetz_spec_from_json(const ordered_json& j) {
  detail::require_keys(j, {"components", "expected_total", "tolerance"}, "fixed-point file");
  LefschetzSpec spec;
  if (!j.contains("components") || !j["components"].is_array())
    throw ConfigError("fixed-point file needs a components array");
  for (const auto& c : j["components"]) spec.components.push_back(fixed_point_from_json(c));
  if (!j.contains("expected_total"))
    throw ConfigError("fixed-point file needs an expected_total to check against");
  spec.expected_total = detail::complex_from_json(j["expected_total"], "expected_total");
  if (j.contains("tolerance")) {
    if (!j["tolerance"].is_number() || !(j["tolerance"].get<double>() > 0.0))
      throw ConfigError("tolerance must be a positive number");
    spec.tolerance = j["tolerance"].get<double>();
  }
  // Fail on inconsistent component data at load time, not mid-report.
  for (const auto& c : spec.components) {
    try {
      lefschetz_contribution(c);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("fixed-point component rejected: ") + e.what());
    }
  }
  return spec;
}

inline LefschetzSpec load_fixed_point_file(const std::string& path) {
  return lefschetz_spec_from_json(detail::parse_json_file(path, "fixed-point file"));
}

// ---------------------------------------------------------------------------
// Scenario loading and validation
// ---------------------------------------------------------------------------

inline Scenario scenario_from_json(const ordered_json& j) {
  detail::require_keys(j,
                       {"lambda", "group_order", "loop_k", "loop_diag", "loop_file",
                        "flow_samples", "level", "epsilon", "quadrature_order", "h_power",
                        "clifford_samples", "fixed_point_file", "checks", "output", "seed"},
                       "scenario");
  Scenario s;
  auto read_int = [&](const char* key, int& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
    out = j[key].get<int>();
  };
  read_int("lambda", s.lambda);
  read_int("group_order", s.group_order);
  read_int("loop_k", s.loop_k);
  read_int("flow_samples", s.flow_samples);
  read_int("quadrature_order", s.quadrature_order);
  read_int("h_power", s.h_power);
  read_int("clifford_samples", s.clifford_samples);
  if (j.contains("loop_diag")) {
    if (!j["loop_diag"].is_array()) throw ConfigError("loop_diag must be an array of integers");
    for (const auto& k : j["loop_diag"]) {
      if (!k.is_number_integer()) throw ConfigError("loop_diag must be an array of integers");
      s.loop_diag.push_back(k.get<int>());
    }
  }
  if (j.contains("loop_file")) {
    if (!j["loop_file"].is_string()) throw ConfigError("loop_file must be a path string");
    s.loop_file = j["loop_file"].get<std::string>();
  }
  if (j.contains("level")) {
    if (!j["level"].is_number()) throw ConfigError("level must be a number");
    s.level = j["level"].get<double>();
  }
  if (j.contains("epsilon")) {
    if (!j["epsilon"].is_number()) throw ConfigError("epsilon must be a number");
    s.epsilon = j["epsilon"].get<double>();
  }
  if (j.contains("fixed_point_file")) {
    if (!j["fixed_point_file"].is_string())
      throw ConfigError("fixed_point_file must be a path string");
    s.fixed_point_file = j["fixed_point_file"].get<std::string>();
  }
  if (j.contains("checks")) {
    if (!j["checks"].is_array()) throw ConfigError("checks must be an array of suite names");
    for (const auto& c : j["checks"]) {
      if (!c.is_string()) throw ConfigError("checks must be an array of suite names");
      s.checks.push_back(c.get<std::string>());
    }
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("output must be a path string");
    s.output_path = j["output"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      throw ConfigError("seed must be a non-negative integer");
    auto v = j["seed"].get<long long>();
    if (v < 0) throw ConfigError("seed must be a non-negative integer");
    s.seed = static_cast<std::uint64_t>(v);
  }
  return s;
}

inline Scenario load_scenario_file(const std::string& path) {
  return scenario_from_json(detail::parse_json_file(path, "config file"));
}

inline void validate_scenario(const Scenario& s) {
  if (s.group_order < 1) throw ConfigError("group order must be at least 1");
  if (s.lambda < 0) throw ConfigError("lambda must be non-negative (0 = automatic)");
  if (s.flow_samples < 2) throw ConfigError("flow grid needs at least 2 samples");
  if (s.quadrature_order < 2) throw ConfigError("quadrature order must be at least 2");
  if (s.clifford_samples < 1) throw ConfigError("clifford sample count must be positive");
  if (s.epsilon < 0.0 || !std::isfinite(s.epsilon))
    throw ConfigError("epsilon must be non-negative (0 = automatic)");
  if (s.h_power < -1 || (s.h_power >= 0 && s.h_power >= s.group_order))
    throw ConfigError("h_power must be -1 (all residues) or lie in [0, p)");
  // An empty check list is legal and yields a report with zero records.
  for (const auto& c : s.checks) {
    bool known = false;
    for (const auto& k : kAllChecks)
      if (k == c) known = true;
    if (!known) throw ConfigError("unknown check suite: " + c);
  }
}

// Loop, cutoff and heat window resolved from a scenario. Only built when a
// model-driven suite (index / specflow / eta) is requested, so e.g. a pure
// clifford-check run never rejects the default loop against a custom p.
struct ResolvedModel {
  MatrixLoop loop;
  int lambda = 0;
  double epsilon = 0.0;
  std::string source;  // human-readable provenance of the loop
};

inline ResolvedModel resolve_model(const Scenario& s) {
  std::optional<MatrixLoop> loop;
  std::string source;
  if (!s.loop_file.empty()) {
    MatrixLoop file_loop = load_loop_file(s.loop_file);
    if (s.group_order != 1 && s.group_order != file_loop.p())
      throw ConfigError("group order conflicts with the loop file's symmetry order");
    loop = file_loop;
    source = "file " + s.loop_file;
  } else {
    try {
      if (!s.loop_diag.empty()) {
        loop = MatrixLoop::diagonal(s.loop_diag, s.group_order);
        std::ostringstream os;
        os << "diagonal windings (";
        for (std::size_t i = 0; i < s.loop_diag.size(); ++i)
          os << (i ? "," : "") << s.loop_diag[i];
        os << ")";
        source = os.str();
      } else {
        loop = MatrixLoop::scalar_monomial(s.loop_k, s.group_order);
        source = "scalar winding " + std::to_string(s.loop_k);
      }
    } catch (const Error& e) {
      throw ConfigError(std::string("loop rejected: ") + e.what());
    }
  }

  int guard = 8 * (loop->degree() + 1);
  int lambda = (s.lambda == 0) ? guard : s.lambda;
  if (lambda < guard)
    throw ConfigError("lambda sits below the guard band 8(d+1) = " + std::to_string(guard));

  double lo = 30.0 / (static_cast<double>(lambda) * lambda);
  double hi = 120.0 / (static_cast<double>(lambda) * lambda);
  double epsilon = (s.epsilon == 0.0) ? lo : s.epsilon;
  if (epsilon < lo || epsilon > hi) {
    std::ostringstream os;
    os << "epsilon outside the admissible window [" << lo << ", " << hi << "]";
    throw ConfigError(os.str());
  }
  return {*loop, lambda, epsilon, source};
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct CheckRecord {
  std::string name;
  ordered_json inputs = ordered_json::object();
  ordered_json computed = ordered_json::object();
  ordered_json oracle = ordered_json::object();
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;  // one-line human summary; carries the error text on throw
  double wall_ms = 0.0;
};

struct Report {
  int schema_version = 1;
  std::uint64_t seed = 0;
  ordered_json scenario = ordered_json::object();
  std::vector<CheckRecord> records;

  bool all_pass() const {
    for (const auto& r : records)
      if (!r.pass) return false;
    return true;
  }
};

inline ordered_json scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["lambda"] = s.lambda;
  j["group_order"] = s.group_order;
  j["loop_k"] = s.loop_k;
  j["loop_diag"] = s.loop_diag;
  j["loop_file"] = s.loop_file;
  j["flow_samples"] = s.flow_samples;
  j["level"] = s.level ? ordered_json(*s.level) : ordered_json(nullptr);
  j["epsilon"] = s.epsilon;
  j["quadrature_order"] = s.quadrature_order;
  j["h_power"] = s.h_power;
  j["clifford_samples"] = s.clifford_samples;
  j["fixed_point_file"] = s.fixed_point_file;
  j["checks"] = s.checks;
  j["output"] = s.output_path;
  j["seed"] = s.seed;
  return j;
}

inline ordered_json report_to_json(const Report& r) {
  ordered_json j;
  j["schema"] = "spinflow-report/" + std::to_string(r.schema_version);
  j["seed"] = r.seed;
  j["scenario"] = r.scenario;
  ordered_json checks = ordered_json::array();
  for (const auto& rec : r.records) {
    ordered_json c;
    c["name"] = rec.name;
    c["pass"] = rec.pass;
    c["tolerance"] = rec.tolerance;
    c["inputs"] = rec.inputs;
    c["computed"] = rec.computed;
    c["oracle"] = rec.oracle;
    c["detail"] = rec.detail;
    c["wall_ms"] = rec.wall_ms;
    checks.push_back(c);
  }
  j["checks"] = checks;
  j["all_pass"] = r.all_pass();
  return j;
}

inline std::string render_table(const Report& r) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "check" << std::setw(8) << "status" << std::right
     << std::setw(10) << "wall_ms"
     << "  detail\n";
  os << std::string(16 + 8 + 10 + 2 + 40, '-') << "\n";
  for (const auto& rec : r.records) {
    os << std::left << std::setw(16) << rec.name << std::setw(8)
       << (rec.pass ? "PASS" : "FAIL") << std::right << std::setw(10) << std::fixed
       << std::setprecision(1) << rec.wall_ms << "  " << rec.detail << "\n";
    os.unsetf(std::ios::fixed);
  }
  os << (r.all_pass() ? "all checks passed" : "FAILURES present") << " ("
     << r.records.size() << " record" << (r.records.size() == 1 ? "" : "s") << ")\n";
  return os.str();
}

// Structured form to the configured path (when set); tabular form is the
// caller's to print, so library users and the CLI share one code path.
inline void emit_report(const Report& r, const std::string& output_path) {
  if (output_path.empty()) return;
  std::ofstream out(output_path);
  if (!out) throw ConfigError("cannot open report output path: " + output_path);
  out << report_to_json(r).dump(2) << "\n";
  if (!out) throw ConfigError("failed while writing report to: " + output_path);
}

// ---------------------------------------------------------------------------
// Check suites
// ---------------------------------------------------------------------------

namespace detail {

class StopWatch {
 public:
  StopWatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    auto d = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration<double, std::milli>(d).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline CliffordElement random_nonscalar_element(int n, std::mt19937_64& rng, int terms = 5) {
  std::uniform_int_distribution<std::uint32_t> mask_dist(1u, (1u << n) - 1u);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  CliffordElement a(n);
  for (int t = 0; t < terms; ++t) a.add_term(mask_dist(rng), cplx(coeff(rng), coeff(rng)));
  return a;
}

inline std::string rep_brief(const RepElement& r) {
  std::ostringstream os;
  os << "(";
  for (int j = 0; j < r.p(); ++j) os << (j ? "," : "") << r.coeffs[j];
  os << ")";
  return os.str();
}

inline ordered_json loop_inputs(const ResolvedModel& model) {
  ordered_json j;
  j["loop"] = model.source;
  j["N"] = model.loop.N();
  j["p"] = model.loop.p();
  j["degree"] = model.loop.degree();
  j["lambda"] = model.lambda;
  return j;
}

}  // namespace detail

// Trace formula: the symbol-route spin trace of random non-scalar elements
// must match the direct matrix trace in the 2^m-dimensional representation.
inline CheckRecord run_clifford_check(const Scenario& s) {
  CheckRecord rec;
  rec.name = "clifford-check";
  rec.tolerance = 1e-10;
  const std::vector<int> ranks = {3, 5, 7};
  rec.inputs["ranks"] = ranks;
  rec.inputs["samples_per_rank"] = s.clifford_samples;

  std::mt19937_64 rng(s.seed ^ 0x636c6966666f7264ull);
  double worst = 0.0;
  int count = 0;
  for (int n : ranks) {
    CliffordAlgebra alg(n);
    for (int t = 0; t < s.clifford_samples; ++t) {
      CliffordElement a = detail::random_nonscalar_element(n, rng);
      cplx via_symbol = alg.trace_spin_via_symbol(a);
      cplx direct = alg.spin_rep(a).trace();
      worst = std::max(worst, std::abs(via_symbol - direct));
      ++count;
    }
  }
  rec.computed["max_abs_deviation"] = worst;
  rec.computed["elements"] = count;
  rec.oracle["description"] = "direct spin-representation trace";
  rec.oracle["max_abs_deviation"] = 0.0;
  rec.pass = worst <= rec.tolerance;
  std::ostringstream os;
  os << "max |symbol trace - matrix trace| = " << std::scientific << std::setprecision(2)
     << worst << " over " << count << " elements";
  rec.detail = os.str();
  return rec;
}

// Index via rectangular sections against the winding of det g.
inline CheckRecord run_index_check(const Scenario& s, const ResolvedModel& model) {
  CheckRecord rec;
  rec.name = "index";
  rec.tolerance = 0.0;  // exact integers
  rec.inputs = detail::loop_inputs(model);

  CircleModel circle(model.loop, model.lambda);
  KernelCokernelResult kc = kernel_cokernel(circle);
  RepElement ind = kc.kernel - kc.cokernel;
  long long w = winding_number(model.loop);

  rec.computed["kernel"] = detail::rep_to_json(kc.kernel);
  rec.computed["cokernel"] = detail::rep_to_json(kc.cokernel);
  rec.computed["index"] = detail::rep_to_json(ind);
  rec.computed["index_total"] = ind.total();
  rec.computed["kernel_gap"] = detail::finite_or_null(kc.kernel_gap);
  rec.computed["cokernel_gap"] = detail::finite_or_null(kc.cokernel_gap);
  rec.oracle["winding"] = w;
  rec.oracle["index_total"] = -w;
  rec.pass = (ind.total() == -w);
  std::ostringstream os;
  os << "index " << detail::rep_brief(ind) << ", total " << ind.total()
     << " vs -winding = " << -w;
  rec.detail = os.str();
  return rec;
}

// Equivariant flow of the Dirac path against minus the index, per character,
// plus agreement with the reflection path's flow.
inline CheckRecord run_specflow_check(const Scenario& s, const ResolvedModel& model) {
  CheckRecord rec;
  rec.name = "specflow";
  rec.tolerance = 0.0;
  rec.inputs = detail::loop_inputs(model);
  rec.inputs["flow_samples"] = s.flow_samples;

  CircleModel circle(model.loop, model.lambda);
  RepElement ind = equivariant_index(circle);

  OperatorFamily fam_d = circle.d_path(s.flow_samples);
  double level_d = s.level ? *s.level : choose_level(fam_d);
  FlowResult flow_d = spectral_flow_per_character(fam_d, level_d);

  OperatorFamily fam_p = circle.p_path(s.flow_samples);
  double level_p = s.level ? *s.level : choose_level(fam_p);
  FlowResult flow_p = spectral_flow_per_character(fam_p, level_p);

  rec.inputs["level_d"] = level_d;
  rec.inputs["level_p"] = level_p;
  rec.computed["flow_d"] = detail::rep_to_json(flow_d.equivariant_flow);
  rec.computed["flow_p"] = detail::rep_to_json(flow_p.equivariant_flow);
  rec.computed["refinements_d"] = flow_d.refinements;
  rec.computed["refinements_p"] = flow_p.refinements;
  rec.oracle["minus_index"] = detail::rep_to_json(-ind);
  bool d_ok = (flow_d.equivariant_flow == -ind);
  bool p_ok = (flow_p.equivariant_flow == flow_d.equivariant_flow);
  rec.pass = d_ok && p_ok;
  std::ostringstream os;
  os << "flow " << detail::rep_brief(flow_d.equivariant_flow) << " vs -index "
     << detail::rep_brief(-ind) << (p_ok ? ", reflection path agrees" : ", reflection path DISAGREES");
  rec.detail = os.str();
  return rec;
}

// Heat-trace path integral against the character trace of the index.
inline CheckRecord run_eta_check(const Scenario& s, const ResolvedModel& model) {
  CheckRecord rec;
  rec.name = "eta";
  rec.tolerance = 1e-3;
  rec.inputs = detail::loop_inputs(model);
  rec.inputs["epsilon"] = model.epsilon;
  rec.inputs["quadrature_order"] = s.quadrature_order;

  CircleModel circle(model.loop, model.lambda);
  RepElement ind = equivariant_index(circle);
  OperatorFamily fam = circle.d_path(s.flow_samples);

  std::vector<int> hs;
  if (s.h_power >= 0)
    hs.push_back(s.h_power);
  else
    for (int h = 0; h < circle.p(); ++h) hs.push_back(h);
  rec.inputs["h_powers"] = hs;

  HeatGridResult grid =
      heat_index_integral_grid(fam, hs, {model.epsilon}, s.quadrature_order);
  ordered_json integrals = ordered_json::array();
  ordered_json traces = ordered_json::array();
  bool ok = true;
  double worst = 0.0;
  for (std::size_t a = 0; a < hs.size(); ++a) {
    double val = grid.values[a][0];
    cplx tr = character_trace(ind, hs[a]);
    double err = std::abs(cplx(val, 0.0) - tr);
    worst = std::max(worst, err);
    ok = ok && (err <= rec.tolerance);
    integrals.push_back(val);
    traces.push_back(detail::complex_to_json(tr));
  }
  rec.computed["heat_integrals"] = integrals;
  rec.computed["max_abs_error"] = worst;
  rec.oracle["index_character_traces"] = traces;
  rec.pass = ok;
  std::ostringstream os;
  os << "heat integral vs index trace, max error " << std::scientific << std::setprecision(2)
     << worst << " over " << hs.size() << " residue(s)";
  rec.detail = os.str();
  return rec;
}

// Fixed-point evaluation: a data file against its expected total, or the
// built-in circle calibration battery against the winding oracle.
inline CheckRecord run_lefschetz_check(const Scenario& s,
                                       const std::optional<LefschetzSpec>& spec) {
  CheckRecord rec;
  rec.name = "lefschetz";
  if (spec) {
    rec.tolerance = spec->tolerance;
    rec.inputs["source"] = s.fixed_point_file;
    rec.inputs["components"] = spec->components.size();
    ordered_json contributions = ordered_json::array();
    cplx total = 0.0;
    for (const auto& c : spec->components) {
      cplx v = lefschetz_contribution(c);
      contributions.push_back(detail::complex_to_json(v));
      total += v;
    }
    rec.computed["contributions"] = contributions;
    rec.computed["total"] = detail::complex_to_json(total);
    rec.oracle["expected_total"] = detail::complex_to_json(spec->expected_total);
    double err = std::abs(total - spec->expected_total);
    rec.computed["abs_error"] = err;
    rec.pass = err <= rec.tolerance;
    std::ostringstream os;
    os << "total (" << total.real() << (total.imag() < 0 ? "" : "+") << total.imag()
       << "i), |error| = " << std::scientific << std::setprecision(2) << err;
    rec.detail = os.str();
    return rec;
  }

  // Calibration battery: the full circle with winding-k character data must
  // reproduce minus the winding, and an empty fixed-point set totals zero.
  rec.tolerance = 1e-12;
  rec.inputs["source"] = "built-in circle calibration";
  std::vector<int> windings = {-3, -2, -1, 0, 1, 2, 3};
  rec.inputs["windings"] = windings;

  bool ok = true;
  double worst = 0.0;
  ordered_json contributions = ordered_json::array();
  ordered_json expected = ordered_json::array();
  for (int k : windings) {
    SeriesRing ring({{"dtheta", 1}}, 1);
    FixedPointData data;
    data.dim_f = 1;
    data.ring = ring;
    data.chern_character =
        cplx(0.0, static_cast<double>(k)) * FormSeries<cplx>::generator(ring, "dtheta");
    data.integrator["dtheta"] = cplx(2.0 * kPi, 0.0);
    cplx got = lefschetz_contribution(data);
    long long want = -winding_number(MatrixLoop::scalar_monomial(k));
    double err = std::abs(got - cplx(static_cast<double>(want), 0.0));
    worst = std::max(worst, err);
    ok = ok && (err <= rec.tolerance);
    contributions.push_back(detail::complex_to_json(got));
    expected.push_back(want);
  }
  cplx empty_total = lefschetz_total({});
  ok = ok && (empty_total == cplx(0.0, 0.0));
  rec.computed["contributions"] = contributions;
  rec.computed["empty_total"] = detail::complex_to_json(empty_total);
  rec.computed["max_abs_error"] = worst;
  rec.oracle["minus_winding"] = expected;
  rec.oracle["empty_total"] = detail::complex_to_json(cplx(0.0, 0.0));
  rec.pass = ok;
  std::ostringstream os;
  os << "circle contributions vs -winding, max error " << std::scientific
     << std::setprecision(2) << worst << "; empty set -> 0";
  rec.detail = os.str();
  return rec;
}

// ---------------------------------------------------------------------------
// Scenario runner
// ---------------------------------------------------------------------------

namespace detail {

inline bool wants(const std::vector<std::string>& checks, const std::string& name) {
  for (const auto& c : checks)
    if (c == name) return true;
  return false;
}

}  // namespace detail

// Executes the requested suites in declared order (duplicates collapse onto
// the first occurrence). Configuration problems throw ConfigError before any
// record is produced; a suite that throws mid-run becomes a failing record
// carrying the error text, so the report is always complete.
inline Report run_scenario(const Scenario& s) {
  validate_scenario(s);

  std::vector<std::string> order;
  for (const auto& c : s.checks)
    if (!detail::wants(order, c)) order.push_back(c);

  bool needs_model = detail::wants(order, "index") || detail::wants(order, "specflow") ||
                     detail::wants(order, "eta");
  std::optional<ResolvedModel> model;
  if (needs_model) model = resolve_model(s);

  std::optional<LefschetzSpec> lef;
  if (!s.fixed_point_file.empty()) lef = load_fixed_point_file(s.fixed_point_file);

  Report report;
  report.seed = s.seed;
  report.scenario = scenario_to_json(s);
  for (const auto& name : order) {
    detail::StopWatch watch;
    CheckRecord rec;
    try {
      if (name == "clifford-check")
        rec = run_clifford_check(s);
      else if (name == "index")
        rec = run_index_check(s, *model);
      else if (name == "specflow")
        rec = run_specflow_check(s, *model);
      else if (name == "eta")
        rec = run_eta_check(s, *model);
      else
        rec = run_lefschetz_check(s, lef);
    } catch (const Error& e) {
      rec.name = name;
      rec.pass = false;
      rec.computed["error"] = e.what();
      rec.detail = std::string("error: ") + e.what();
    }
    rec.wall_ms = watch.ms();
    report.records.push_back(rec);
  }
  return report;
}

}  // namespace spinflow
