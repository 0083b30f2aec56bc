#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "spinflow/harness.hpp"

namespace {

using spinflow::cplx;
using spinflow::ordered_json;

// Unique temp file holding `text`; removed when the guard dies.
struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& text, const char* tag = "blob") {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("spinflow_harness_" + std::string(tag) + "_" + std::to_string(++counter) + ".json");
    std::ofstream out(path);
    out << text;
  }
  ~TempFile() { std::filesystem::remove(path); }
  std::string str() const { return path.string(); }
};

const std::string kSwapLoopJson = R"({
  "N": 2, "p": 1,
  "coefficients": [
    {"j": 2,  "matrix": [[[0,0],[1,0]], [[0,0],[0,0]]]},
    {"j": -1, "matrix": [[[0,0],[0,0]], [[1,0],[0,0]]]}
  ]
})";

const std::string kCircleFixedPointJson = R"({
  "components": [
    {
      "dim_f": 1,
      "codim": 0,
      "angles": [],
      "generators": [{"name": "dtheta", "degree": 1}],
      "chern_character": [{"monomial": {"dtheta": 1}, "value": [0.0, 2.0]}],
      "integrator": {"dtheta": [6.283185307179586, 0.0]}
    }
  ],
  "expected_total": [-2.0, 0.0],
  "tolerance": 1e-10
})";

ordered_json strip_wall_times(ordered_json report) {
  for (auto& c : report["checks"]) c["wall_ms"] = 0.0;
  return report;
}

}  // namespace

TEST_CASE("loop_files_round_trip_through_json") {
  TempFile scalar(R"({"N":1,"p":2,"coefficients":[{"j":2,"matrix":[[[1.0,0.0]]]}]})", "loop");
  spinflow::MatrixLoop loaded = spinflow::load_loop_file(scalar.str());
  REQUIRE(loaded.N() == 1);
  REQUIRE(loaded.p() == 2);
  REQUIRE(loaded.degree() == 2);
  spinflow::MatrixLoop direct = spinflow::MatrixLoop::scalar_monomial(2, 2);
  for (double theta : {0.3, 1.7, 5.1})
    REQUIRE((loaded.eval(theta) - direct.eval(theta)).norm() < 1e-15);

  TempFile swap(kSwapLoopJson, "loop");
  spinflow::MatrixLoop perm = spinflow::load_loop_file(swap.str());
  REQUIRE(perm.N() == 2);
  REQUIRE(perm.degree() == 2);
  // Unitarity of the off-diagonal pair survives the round trip.
  Eigen::MatrixXcd g = perm.eval(0.9);
  REQUIRE((g.adjoint() * g - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-12);
  REQUIRE(spinflow::winding_number(perm) == 1);
}

TEST_CASE("loop_files_reject_malformed_or_inequivariant_data") {
  auto expect_config_error = [](const std::string& text) {
    TempFile f(text, "badloop");
    REQUIRE_THROWS_AS(spinflow::load_loop_file(f.str()), spinflow::ConfigError);
  };
  // Odd Fourier mode under p = 2 violates the symmetry constraint.
  expect_config_error(R"({"N":1,"p":2,"coefficients":[{"j":1,"matrix":[[[1.0,0.0]]]}]})");
  // Non-unitary coefficient.
  expect_config_error(R"({"N":1,"p":1,"coefficients":[{"j":0,"matrix":[[[0.5,0.0]]]}]})");
  // Missing field, wrong shapes, duplicate mode, junk entry, unknown key.
  expect_config_error(R"({"p":1,"coefficients":[]})");
  expect_config_error(R"({"N":2,"p":1,"coefficients":[{"j":0,"matrix":[[[1,0]]]}]})");
  expect_config_error(
      R"({"N":1,"p":1,"coefficients":[{"j":1,"matrix":[[[0.5,0]]]},{"j":1,"matrix":[[[0.5,0]]]}]})");
  expect_config_error(R"({"N":1,"p":1,"coefficients":[{"j":0,"matrix":[[["x",0]]]}]})");
  expect_config_error(R"({"N":1,"p":1,"winding":3,"coefficients":[]})");
  // Unparseable JSON and a missing file.
  expect_config_error("{not json");
  REQUIRE_THROWS_AS(spinflow::load_loop_file("/no/such/dir/loop.json"), spinflow::ConfigError);
}

TEST_CASE("scenario_json_covers_every_field_and_rejects_unknown_keys") {
  ordered_json j = ordered_json::parse(R"({
    "lambda": 40, "group_order": 2, "loop_k": 4, "loop_diag": [2, -2],
    "loop_file": "", "flow_samples": 7, "level": -0.25, "epsilon": 0.03,
    "quadrature_order": 16, "h_power": 1, "clifford_samples": 50,
    "fixed_point_file": "", "checks": ["index", "eta"], "output": "r.json",
    "seed": 99
  })");
  spinflow::Scenario s = spinflow::scenario_from_json(j);
  REQUIRE(s.lambda == 40);
  REQUIRE(s.group_order == 2);
  REQUIRE(s.loop_k == 4);
  REQUIRE(s.loop_diag == std::vector<int>{2, -2});
  REQUIRE(s.flow_samples == 7);
  REQUIRE(s.level.has_value());
  REQUIRE(*s.level == Catch::Approx(-0.25));
  REQUIRE(s.epsilon == Catch::Approx(0.03));
  REQUIRE(s.quadrature_order == 16);
  REQUIRE(s.h_power == 1);
  REQUIRE(s.clifford_samples == 50);
  REQUIRE(s.checks == std::vector<std::string>{"index", "eta"});
  REQUIRE(s.output_path == "r.json");
  REQUIRE(s.seed == 99);

  REQUIRE_THROWS_AS(spinflow::scenario_from_json(ordered_json::parse(R"({"lamda": 40})")),
                    spinflow::ConfigError);
  REQUIRE_THROWS_AS(spinflow::scenario_from_json(ordered_json::parse(R"({"loop_k": "two"})")),
                    spinflow::ConfigError);
  REQUIRE_THROWS_AS(spinflow::scenario_from_json(ordered_json::parse(R"({"seed": -5})")),
                    spinflow::ConfigError);
  // Defaults survive an empty object.
  spinflow::Scenario d = spinflow::scenario_from_json(ordered_json::object());
  REQUIRE(d.group_order == 1);
  REQUIRE(d.loop_k == 1);
  REQUIRE_FALSE(d.level.has_value());
}

TEST_CASE("scenario_validation_guards_parameter_ranges") {
  spinflow::Scenario s;
  s.checks = {"index"};
  REQUIRE_NOTHROW(spinflow::validate_scenario(s));

  auto expect_invalid = [](spinflow::Scenario bad) {
    bad.checks = {"index"};
    REQUIRE_THROWS_AS(spinflow::validate_scenario(bad), spinflow::ConfigError);
  };
  expect_invalid([] { spinflow::Scenario s; s.group_order = 0; return s; }());
  expect_invalid([] { spinflow::Scenario s; s.lambda = -8; return s; }());
  expect_invalid([] { spinflow::Scenario s; s.flow_samples = 1; return s; }());
  expect_invalid([] { spinflow::Scenario s; s.quadrature_order = 1; return s; }());
  expect_invalid([] { spinflow::Scenario s; s.clifford_samples = 0; return s; }());
  expect_invalid([] { spinflow::Scenario s; s.epsilon = -1.0; return s; }());
  expect_invalid([] { spinflow::Scenario s; s.h_power = 1; return s; }());  // p = 1
  spinflow::Scenario unknown;
  unknown.checks = {"index", "frobnicate"};
  REQUIRE_THROWS_AS(spinflow::validate_scenario(unknown), spinflow::ConfigError);
}

TEST_CASE("model_resolution_applies_guard_band_and_heat_window") {
  spinflow::Scenario s;
  s.loop_k = 2;  // degree 2 -> guard band 24
  spinflow::ResolvedModel m = spinflow::resolve_model(s);
  REQUIRE(m.lambda == 24);
  REQUIRE(m.epsilon == Catch::Approx(30.0 / (24.0 * 24.0)));
  REQUIRE(m.loop.N() == 1);

  s.lambda = 20;
  REQUIRE_THROWS_AS(spinflow::resolve_model(s), spinflow::ConfigError);
  s.lambda = 0;
  s.epsilon = 200.0 / (24.0 * 24.0);
  REQUIRE_THROWS_AS(spinflow::resolve_model(s), spinflow::ConfigError);
  s.epsilon = 100.0 / (24.0 * 24.0);
  REQUIRE(spinflow::resolve_model(s).epsilon == Catch::Approx(100.0 / 576.0));

  // Diagonal windings take precedence over the scalar k; a loop file over both.
  spinflow::Scenario diag;
  diag.loop_k = 9;
  diag.loop_diag = {1, -1};
  spinflow::ResolvedModel md = spinflow::resolve_model(diag);
  REQUIRE(md.loop.N() == 2);
  REQUIRE(md.loop.degree() == 1);

  TempFile file(kSwapLoopJson, "loop");
  spinflow::Scenario withfile = diag;
  withfile.loop_file = file.str();
  REQUIRE(spinflow::resolve_model(withfile).loop.degree() == 2);

  // The file's symmetry order is authoritative; a conflicting explicit p fails.
  TempFile p2(R"({"N":1,"p":2,"coefficients":[{"j":2,"matrix":[[[1.0,0.0]]]}]})", "loop");
  spinflow::Scenario adopt;
  adopt.loop_file = p2.str();
  REQUIRE(spinflow::resolve_model(adopt).loop.p() == 2);
  adopt.group_order = 3;
  REQUIRE_THROWS_AS(spinflow::resolve_model(adopt), spinflow::ConfigError);

  // Inequivariant scalar winding under an explicit group order.
  spinflow::Scenario odd;
  odd.loop_k = 3;
  odd.group_order = 2;
  REQUIRE_THROWS_AS(spinflow::resolve_model(odd), spinflow::ConfigError);
}

TEST_CASE("fixed_point_files_load_validate_and_evaluate") {
  TempFile good(kCircleFixedPointJson, "fp");
  spinflow::LefschetzSpec spec = spinflow::load_fixed_point_file(good.str());
  REQUIRE(spec.components.size() == 1);
  REQUIRE(spec.tolerance == Catch::Approx(1e-10));
  cplx total = spinflow::lefschetz_total(spec.components);
  REQUIRE(std::abs(total - spec.expected_total) < 1e-12);

  auto expect_config_error = [](const std::string& text) {
    TempFile f(text, "badfp");
    REQUIRE_THROWS_AS(spinflow::load_fixed_point_file(f.str()), spinflow::ConfigError);
  };
  // The file-driven check is meaningless without its oracle.
  expect_config_error(R"({"components": []})");
  // codim inconsistent with the angle list.
  expect_config_error(R"({
    "components": [{"dim_f": 1, "codim": 2, "angles": [],
      "generators": [{"name": "dtheta", "degree": 1}],
      "chern_character": [], "integrator": {}}],
    "expected_total": [0.0, 0.0]})");
  // Angle congruent to zero is a genuine singularity of the sine factor.
  expect_config_error(R"({
    "components": [{"dim_f": 1, "angles": [0.0], "nu_roots": ["v"],
      "generators": [{"name": "dtheta", "degree": 1}, {"name": "v", "degree": 2}],
      "chern_character": [{"monomial": {"dtheta": 1}, "value": [0.0, 1.0]}],
      "integrator": {"dtheta": [6.283, 0.0]}}],
    "expected_total": [0.0, 0.0]})");
  // Unknown generator in a monomial; missing integrator entry for the top part.
  expect_config_error(R"({
    "components": [{"dim_f": 1,
      "generators": [{"name": "dtheta", "degree": 1}],
      "chern_character": [{"monomial": {"dphi": 1}, "value": [0.0, 1.0]}],
      "integrator": {}}],
    "expected_total": [0.0, 0.0]})");
  expect_config_error(R"({
    "components": [{"dim_f": 1,
      "generators": [{"name": "dtheta", "degree": 1}],
      "chern_character": [{"monomial": {"dtheta": 1}, "value": [0.0, 1.0]}],
      "integrator": {}}],
    "expected_total": [0.0, 0.0]})");
}

TEST_CASE("reference_scenario_reports_index_flow_and_heat_in_agreement") {
  spinflow::Scenario s;
  s.loop_k = 1;
  s.checks = {"index", "specflow", "eta"};
  spinflow::Report report = spinflow::run_scenario(s);

  REQUIRE(report.records.size() == 3);
  REQUIRE(report.all_pass());
  REQUIRE(report.records[0].name == "index");
  REQUIRE(report.records[1].name == "specflow");
  REQUIRE(report.records[2].name == "eta");

  REQUIRE(report.records[0].computed["index_total"].get<long long>() == -1);
  REQUIRE(report.records[1].computed["flow_d"] == ordered_json::array({1}));
  double heat = report.records[2].computed["heat_integrals"][0].get<double>();
  REQUIRE(heat == Catch::Approx(-1.0).margin(1e-3));

  ordered_json doc = spinflow::report_to_json(report);
  REQUIRE(doc["schema"] == "spinflow-report/1");
  REQUIRE(doc["all_pass"].get<bool>());
  REQUIRE(doc["checks"].size() == 3);
}

TEST_CASE("reports_are_byte_stable_for_fixed_scenario_and_seed") {
  spinflow::Scenario s;
  s.loop_k = 2;
  s.group_order = 2;
  s.clifford_samples = 25;
  s.checks = {"clifford-check", "index", "lefschetz"};
  std::string a = strip_wall_times(spinflow::report_to_json(spinflow::run_scenario(s))).dump(2);
  std::string b = strip_wall_times(spinflow::report_to_json(spinflow::run_scenario(s))).dump(2);
  REQUIRE(a == b);

  // A different seed moves the sampled suite's inputs (and nothing else
  // breaks); the deviation field may or may not change, but the run stays
  // reproducible under its own seed.
  spinflow::Scenario t = s;
  t.seed = 7;
  std::string c = strip_wall_times(spinflow::report_to_json(spinflow::run_scenario(t))).dump(2);
  std::string d = strip_wall_times(spinflow::report_to_json(spinflow::run_scenario(t))).dump(2);
  REQUIRE(c == d);
}

TEST_CASE("verify_all_union_runs_in_declared_order_and_deduplicates") {
  spinflow::Scenario s;
  s.clifford_samples = 10;
  s.checks = spinflow::kAllChecks;
  spinflow::Report report = spinflow::run_scenario(s);
  REQUIRE(report.records.size() == 5);
  for (std::size_t i = 0; i < spinflow::kAllChecks.size(); ++i)
    REQUIRE(report.records[i].name == spinflow::kAllChecks[i]);
  REQUIRE(report.all_pass());

  spinflow::Scenario dup;
  dup.checks = {"index", "index", "index"};
  REQUIRE(spinflow::run_scenario(dup).records.size() == 1);
}

TEST_CASE("failing_and_erroring_checks_mark_the_report_without_aborting_it") {
  TempFile wrong(R"({
    "components": [
      {"dim_f": 1,
       "generators": [{"name": "dtheta", "degree": 1}],
       "chern_character": [{"monomial": {"dtheta": 1}, "value": [0.0, 1.0]}],
       "integrator": {"dtheta": [6.283185307179586, 0.0]}}
    ],
    "expected_total": [5.0, 0.0]
  })", "fp");
  spinflow::Scenario s;
  s.fixed_point_file = wrong.str();
  s.checks = {"index", "lefschetz"};
  spinflow::Report report = spinflow::run_scenario(s);
  REQUIRE(report.records.size() == 2);
  REQUIRE(report.records[0].pass);
  REQUIRE_FALSE(report.records[1].pass);
  REQUIRE_FALSE(report.all_pass());
  std::string table = spinflow::render_table(report);
  REQUIRE(table.find("FAIL") != std::string::npos);
  REQUIRE(table.find("FAILURES present") != std::string::npos);
}

TEST_CASE("empty_check_list_yields_a_valid_zero_record_report") {
  spinflow::Scenario s;
  spinflow::Report report = spinflow::run_scenario(s);
  REQUIRE(report.records.empty());
  REQUIRE(report.all_pass());
  std::string table = spinflow::render_table(report);
  REQUIRE(table.find("0 records") != std::string::npos);
  ordered_json doc = spinflow::report_to_json(report);
  REQUIRE(doc["checks"].is_array());
  REQUIRE(doc["checks"].empty());
}

TEST_CASE("structured_reports_write_to_disk_and_surface_io_failures") {
  spinflow::Scenario s;
  s.checks = {"lefschetz"};
  spinflow::Report report = spinflow::run_scenario(s);

  auto path = std::filesystem::temp_directory_path() / "spinflow_harness_report.json";
  spinflow::emit_report(report, path.string());
  std::ifstream in(path);
  REQUIRE(in.good());
  ordered_json parsed = ordered_json::parse(in);
  REQUIRE(parsed["schema"] == "spinflow-report/1");
  REQUIRE(parsed["checks"].size() == 1);
  REQUIRE(parsed["checks"][0]["name"] == "lefschetz");
  std::filesystem::remove(path);

  REQUIRE_THROWS_AS(spinflow::emit_report(report, "/no/such/dir/report.json"),
                    spinflow::ConfigError);
  // Empty path means "structured output not requested".
  REQUIRE_NOTHROW(spinflow::emit_report(report, ""));
}

TEST_CASE("equivariant_scenario_reports_per_character_data") {
  spinflow::Scenario s;
  s.loop_diag = {2, -4};
  s.group_order = 2;
  s.checks = {"index", "specflow"};
  spinflow::Report report = spinflow::run_scenario(s);
  REQUIRE(report.all_pass());
  // winding 2 - 4 = -2; index total +2 split evenly across the two characters.
  REQUIRE(report.records[0].computed["index_total"].get<long long>() == 2);
  REQUIRE(report.records[0].computed["index"] == ordered_json::array({1, 1}));
  REQUIRE(report.records[1].computed["flow_d"] == ordered_json::array({-1, -1}));
}
