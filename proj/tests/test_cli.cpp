#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fermisig/domain_spec.hpp"
#include "fermisig/report.hpp"
#include "fermisig/sigop.hpp"
#include "fermisig/spectral.hpp"

using namespace fermisig;

TEST_CASE("parse_domain_spec: minimal simple spec") {
  const auto spec = parse_domain_spec(R"json({
    "schema_version": 1, "kind": "simple",
    "breakpoints": [0, 1], "incidence": [[true]]})json");
  const auto* sd = std::get_if<SimpleDomain>(&spec.domain);
  REQUIRE(sd != nullptr);
  CHECK(sd->K() == 1);
  const auto rep = spectrum(build_simple(*sd));
  CHECK(rep.eigenvalues[0] == doctest::Approx(kInvFourPi));
}

TEST_CASE("parse_domain_spec: graph with steep boundary is rejected") {
  const std::string text = R"json({
    "schema_version": 1, "kind": "graph", "b": 1.0,
    "t_plus": {"points": [[0, 0], [0.5, 0.75], [1, 0]]},
    "t_minus": {"points": [[0, 0], [1, 0]]}})json";
  CHECK_THROWS_AS(parse_domain_spec(text), InvariantViolation);
}

TEST_CASE("parse_domain_spec: conformal factor expression") {
  const auto spec = parse_domain_spec(R"json({
    "schema_version": 1, "kind": "conformal",
    "base": {"kind": "graph", "b": 1.0,
             "t_plus": {"points": [[0,0],[0.5,0.5],[1,0]]},
             "t_minus": {"points": [[0,0],[0.5,-0.5],[1,0]]}},
    "f": {"expr": "1 + 0.3*sin(3.141592653589793*x)*exp(-t^2)"}})json");
  const auto* cd = std::get_if<ConformalDomain>(&spec.domain);
  REQUIRE(cd != nullptr);
  CHECK(cd->f(0.0, 0.5) == doctest::Approx(1.3).epsilon(1e-14));
}

TEST_CASE("parse_domain_spec: boundary from an expression is sampled") {
  const auto spec = parse_domain_spec(R"json({
    "schema_version": 1, "kind": "graph", "b": 1.0,
    "t_plus": {"expr": "min(x, 1-x)", "segments": 32},
    "t_minus": {"points": [[0, 0], [1, 0]]}})json");
  const auto* gd = std::get_if<GraphDomain>(&spec.domain);
  REQUIRE(gd != nullptr);
  CHECK(gd->t_plus.eval(0.5) == doctest::Approx(0.5));
  CHECK(gd->t_plus.xs.size() == 33);
}

TEST_CASE("syntax and schema errors") {
  CHECK_THROWS_AS(parse_domain_spec("{not json"), SyntaxError);
  CHECK_THROWS_AS(parse_domain_spec(R"json({"schema_version": 2, "kind": "simple"})json"), SchemaError);
  CHECK_THROWS_AS(parse_domain_spec(R"json({"schema_version": 1, "kind": "blob"})json"), SchemaError);
  CHECK_THROWS_AS(parse_domain_spec(R"json({"schema_version": 1, "kind": "graph", "b": 1.0,
    "t_plus": {}, "t_minus": {}})json"),
                  SchemaError);
}

TEST_CASE("round-trip: print then parse reproduces the spec") {
  const char* sources[] = {
      R"json({"schema_version":1,"kind":"simple","breakpoints":[0,0.5,1.25],
          "incidence":[[true,true],[false,true]]})json",
      R"json({"schema_version":1,"kind":"graph","b":2.0,
          "t_plus":{"points":[[0,0],[1,0.75],[2,0]]},
          "t_minus":{"points":[[0,0],[0.8,-0.5],[2,0]]}})json"};
  for (const char* src : sources) {
    const auto spec = parse_domain_spec(src);
    const auto round = parse_domain_spec(print_domain_spec(spec));
    CHECK(round.echo == spec.echo);
  }
}

TEST_CASE("report rendering: 17 significant digits and determinism") {
  ReportDocument doc;
  doc.command = "spectrum";
  doc.inputs["options"] = {{"seed", 1}};
  doc.results["lambda_max"] = kInvFourPi;
  doc.eigenvalues = {kInvFourPi, -kInvFourPi};
  const std::string a = render_report_json(doc);
  const std::string b = render_report_json(doc);
  CHECK(a == b);
  CHECK(a.find("0.079577471545947673") != std::string::npos);
  CHECK(a.find("timestamp") == std::string::npos);

  const std::string csv = render_eigenvalue_csv(doc);
  CHECK(csv == "index,value\n1,0.079577471545947673\n2,-0.079577471545947673\n");
}

TEST_CASE("emit_report writes the requested formats") {
  const auto dir = std::filesystem::temp_directory_path() / "fermisig-test-emit";
  std::filesystem::remove_all(dir);
  ReportDocument doc;
  doc.command = "spectrum";
  doc.eigenvalues = {0.5, -0.5, 0.25, -0.25};
  const auto files = emit_report(doc, {"json", "csv", "svg"}, dir);
  CHECK(files.size() == 3);
  for (const auto& f : files) CHECK(std::filesystem::exists(f));

  // empty spectrum still produces valid files with zero rows
  ReportDocument empty;
  empty.command = "spectrum";
  const auto efiles = emit_report(empty, {"json", "csv"}, dir);
  std::ifstream csv(efiles[1]);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "index,value");
  CHECK_FALSE(static_cast<bool>(std::getline(csv, line)));

  CHECK_THROWS_AS(emit_report(doc, {"pdf"}, dir), SchemaError);
  std::filesystem::remove_all(dir);
}
