#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "switchaff/demos.hpp"
#include "switchaff/json_io.hpp"

using namespace sa;
using nlohmann::json;
namespace fs = std::filesystem;

TEST_CASE("system json round trip is bit exact") {
  Demo d = demo("motor-position");
  auto back = system_from_json(system_to_json(d.sys));
  CHECK(back.n == d.sys.n);
  CHECK(back.N == d.sys.N);
  REQUIRE(back.labels.size() == d.sys.labels.size());
  CHECK(back.labels[0] == d.sys.labels[0]);
  for (int i = 0; i < d.sys.N; ++i) {
    CHECK((back.A[i] - d.sys.A[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.b[i] - d.sys.b[i]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("system json accepts a minimal hand-written file") {
  auto sys = system_from_json(R"({
    "A": [[[0.0, 1.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, -1.0]]],
    "b": [[1.0, 0.0], [0.0, 0.0]]
  })");
  CHECK(sys.n == 2);
  CHECK(sys.N == 2);
  CHECK(sys.A[0](0, 1) == 1.0);
  CHECK(sys.b[0](0) == 1.0);
  CHECK(sys.labels.empty());
}

TEST_CASE("system json rejects malformed input with a named reason") {
  CHECK_THROWS_AS(system_from_json("not json at all"),
                  std::invalid_argument);
  CHECK_THROWS_WITH_AS(system_from_json("[1, 2]"),
                       "system file must be an object",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(system_from_json("{}"),
                       "system file needs \"A\" and \"b\"",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      system_from_json(R"({"A": [[[0]]], "b": [[0], [0]]})"),
      "\"A\" and \"b\" must list one entry per mode", std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      system_from_json(R"({"A": [[[0, 1], [2]], [[0]]], "b": [[0], [0]]})"),
      "A[0] rows must have equal length", std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      system_from_json(R"({"A": [[[0]], [[0]]], "b": [["x"], [0]]})"),
      "b[0] entries must be numbers", std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      system_from_json(R"({"n": 3, "A": [[[0]], [[0]]], "b": [[0], [0]]})"),
      "declared n disagrees with matrix sizes", std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      system_from_json(R"({"N": 5, "A": [[[0]], [[0]]], "b": [[0], [0]]})"),
      "declared N disagrees with the mode count", std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      system_from_json(
          R"({"A": [[[0]], [[0]]], "b": [[0], [0]], "labels": [1, 2]})"),
      "labels must be strings", std::invalid_argument);
}

TEST_CASE("disturbance json parses and stays right-continuous") {
  auto dist = disturbance_from_json(R"({
    "E": [0.0, 0.0, 1.0, 0.0],
    "breakpoints": [0.5, 2.0],
    "values": [0.0, 12.5, 3.0]
  })",
                                    4);
  CHECK(dist.E(2) == 1.0);
  CHECK(dist.evaluate(0.4) == 0.0);
  CHECK(dist.evaluate(0.5) == 12.5);
  CHECK(dist.evaluate(1.9) == 12.5);
  CHECK(dist.evaluate(2.0) == 3.0);
  CHECK(dist.evaluate(100.0) == 3.0);
}

TEST_CASE("disturbance json errors are specific") {
  CHECK_THROWS_WITH_AS(disturbance_from_json("[]", 2),
                       "disturbance file must be an object",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      disturbance_from_json(R"({"breakpoints": [], "values": [0]})", 2),
      "disturbance file needs \"E\"", std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      disturbance_from_json(
          R"({"E": [1], "breakpoints": [], "values": [0]})", 2),
      "disturbance channel E has wrong dimension", std::invalid_argument);
  // Wrong values length trips the profile's own validation.
  CHECK_THROWS_AS(disturbance_from_json(
                      R"({"E": [1, 0], "breakpoints": [1.0], "values": [0]})",
                      2),
                  std::invalid_argument);
}

TEST_CASE("law report serializes the certificate and its checklist") {
  auto law = fx::example1_published();
  auto rep = verify_certificate(law);
  json j = json::parse(law_report_json(law, rep));
  CHECK(j["all_passed"].get<bool>());
  CHECK(j["P_bar"][0][0].get<double>() == 1.5);
  CHECK(j["P_perp"][0][0].get<double>() == 1.0);
  CHECK(j["margins"]["decrease"].get<double>() > 0.0);
  CHECK(j["checks"].size() == 10);
  CHECK(j["checks"][0]["name"].get<std::string>() == "bases_orthonormal");
  CHECK(j["interior"]["valid"].get<bool>());
  REQUIRE(j["interior"].contains("mu"));
  CHECK(j["interior"]["mu"].size() == 3);
  CHECK(j["lambda"].size() == 3);
  CHECK(j["x_e"].size() == 2);
}

TEST_CASE("rate report carries the certificate scalars and gram digests") {
  RateCertificate cert;
  cert.alpha = 0.5;
  cert.eps = 0.25;
  cert.rho = 1.0;
  cert.beta = 2.0;
  cert.r = 1.0;
  cert.Q = Mat::Identity(2, 2);
  cert.certified = true;
  SosResult sos;
  sos.solver_margin = 1e-3;
  QuarticGram g;
  g.basis = {"z1", "z2"};
  g.gram = Mat::Identity(2, 2);
  g.min_eig = 1.0;
  sos.grams_lower = {g};

  json j = json::parse(rate_report_json(cert, sos));
  CHECK(j["certified"].get<bool>());
  CHECK(j["alpha"].get<double>() == 0.5);
  CHECK(j["epsilon"].get<double>() == 0.25);
  CHECK(j["Q_eigenvalues"].size() == 2);
  CHECK(j["Q_eigenvalues"][0].get<double>() == doctest::Approx(1.0));
  CHECK(j["grams"]["lower"].size() == 1);
  CHECK(j["grams"]["lower"][0]["dim"].get<int>() == 2);
  CHECK(j["grams"]["upper"].empty());
}

TEST_CASE("rate curve serializes row per radius") {
  std::vector<RateCurveRow> rows = {{1.0, 2.0, 0.5, 0.25},
                                    {2.0, 1.5, 0.5, 0.125}};
  json j = json::parse(rate_curve_json(rows));
  REQUIRE(j["rows"].size() == 2);
  CHECK(j["rows"][1]["r"].get<double>() == 2.0);
  CHECK(j["rows"][1]["beta"].get<double>() == 1.5);
  CHECK(j["rows"][0]["alpha"].get<double>() == 0.25);
}

TEST_CASE("atomic_write lands complete files and fails loudly otherwise") {
  fs::path dir = fs::temp_directory_path() / "switchaff_jsonio_test";
  fs::create_directories(dir);
  fs::path target = dir / "report.json";

  atomic_write(target.string(), "first\n");
  atomic_write(target.string(), "second\n");
  std::ifstream in(target);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  CHECK(content == "second\n");

  // No temp droppings survive a successful write.
  size_t stray = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().find(".tmp") != std::string::npos)
      ++stray;
  CHECK(stray == 0);

  CHECK_THROWS_AS(
      atomic_write((dir / "missing" / "report.json").string(), "x"),
      std::runtime_error);
  fs::remove_all(dir);
}
