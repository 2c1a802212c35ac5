#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "sulab/config.hpp"
#include "sulab/experiment.hpp"
#include "sulab/field.hpp"
#include "sulab/io.hpp"
#include "sulab/oracles.hpp"

using namespace sulab;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() / ("sulab_test_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("config parser handles comments, whitespace and types") {
  Config c = Config::parse_string(
      "# comment only\n"
      "grid.n = 64   # trailing comment\n"
      "  solver.tol=1e-7\n"
      "\n"
      "schedule.alphas = 1.2, 1.1 , 1.05\n"
      "flags.quiet = true\n");
  CHECK(c.get_int("grid.n") == 64);
  CHECK(c.get_double("solver.tol") == doctest::Approx(1e-7));
  auto v = c.get_list("schedule.alphas");
  REQUIRE(v.size() == 3);
  CHECK(v[1] == doctest::Approx(1.1));
  CHECK(c.get_bool("flags.quiet", false));
  CHECK(c.get_double("missing.key", 2.5) == 2.5);
}

TEST_CASE("config errors name the offending field") {
  Config c = Config::parse_string("a.b = hello\n");
  try {
    c.get_double("a.b");
    FAIL("expected ConfigInvalid");
  } catch (const ConfigInvalid& e) {
    CHECK(e.field == "a.b");
  }
  try {
    c.get_string("grid.n");
    FAIL("expected ConfigInvalid");
  } catch (const ConfigInvalid& e) {
    CHECK(e.field == "grid.n");
  }
  CHECK_THROWS_AS(Config::parse_string("not a key value line\n"), ConfigInvalid);
  CHECK_THROWS_AS(Config::parse_string("= 3\n"), ConfigInvalid);
}

TEST_CASE("fmt17 round-trips doubles bit exactly") {
  for (double x : {kPi, 1.0 / 3.0, 1e-300, 6.02e23, -0.0, 0.1, 123456789.123456789}) {
    const std::string s = fmt17(x);
    const double back = std::strtod(s.c_str(), nullptr);
    CHECK(std::memcmp(&back, &x, sizeof(double)) == 0);
  }
}

TEST_CASE("field serialization round-trips torus and polar fields") {
  fs::path d = temp_dir("field");
  {
    TorusGrid g = build_torus_grid(16, 2.0);
    MapField f = make_field(g);
    BubbleMap b;
    b.lambda = 0.4;
    b.center = {1.0, 1.0};
    fill_field(f, [&](Vec2 xy) { return b(xy); });
    save_field(f, (d / "t").string());
    MapField r = load_field((d / "t").string());
    CHECK(r.grid_kind == GridKind::Torus);
    CHECK(r.torus.n == 16);
    CHECK(r.torus.side == 2.0);
    REQUIRE(r.values.size() == f.values.size());
    CHECK(std::memcmp(r.values.data(), f.values.data(),
                      f.values.size() * sizeof(double)) == 0);
  }
  {
    PolarGrid g = build_polar_grid({0.5, -0.25}, 0.01, 1.5, 24, 20);
    MapField f = make_field(g, BoundaryKind::DirichletRing);
    f.fix_inner = true;
    fill_field_polar(f, [](double r, double th) {
      return Vec3{r * std::cos(th), r * std::sin(th), std::log(r)};
    });
    save_field(f, (d / "p").string());
    MapField r = load_field((d / "p").string());
    CHECK(r.grid_kind == GridKind::Polar);
    CHECK(r.polar.n_r == 24);
    CHECK(r.polar.n_theta == 20);
    CHECK(r.polar.center[0] == 0.5);
    CHECK(r.bc == BoundaryKind::DirichletRing);
    CHECK(r.fix_inner);
    CHECK_FALSE(r.fix_outer);
    CHECK(std::memcmp(r.values.data(), f.values.data(),
                      f.values.size() * sizeof(double)) == 0);
  }
  CHECK_THROWS_AS(load_field((d / "nope").string()), Error);
}

TEST_CASE("csv writer enforces its column count") {
  fs::path d = temp_dir("csv");
  const std::string path = (d / "x.csv").string();
  {
    CsvWriter w(path, {"a", "b"});
    w.row({1.0, 2.0});
    w.row_cells({"x", "0.5"});
    CHECK_THROWS_AS(w.row({1.0}), Error);
  }
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "a,b");
  std::getline(in, line);
  CHECK(line == "1,2");
}

TEST_CASE("experiment validation names missing fields") {
  Config c = Config::parse_string("experiment = torus_continuation\n");
  try {
    validate_experiment(c);
    FAIL("expected ConfigInvalid");
  } catch (const ConfigInvalid& e) {
    CHECK(e.field == "grid.n");
  }
  Config bad = Config::parse_string("experiment = warp_drive\n");
  try {
    validate_experiment(bad);
    FAIL("expected ConfigInvalid");
  } catch (const ConfigInvalid& e) {
    CHECK(e.field == "experiment");
  }
  Config suite = Config::parse_string(
      "experiment = synthetic_identity_suite\n"
      "family.alpha = 1.05\n"
      "family.lambda = 1e-3\n"
      "grid.n_r = 64\n"
      "grid.n_theta = 32\n"
      "grid.r_max = 0.001\n");  // grid cannot cover the band
  CHECK_THROWS_AS(validate_experiment(suite), ConfigInvalid);
}

TEST_CASE("oracle validation run emits the full artifact set") {
  fs::path d = temp_dir("oracle_run");
  Config c = Config::parse_string(
      "experiment = oracle_validation\n"
      "oracle.n_r = 64\n"
      "oracle.n_theta = 64\n"
      "oracle.quad_tol = 1e-7\n");
  const bool complete = run_experiment(c, (d / "out").string());
  CHECK(complete);
  for (const char* name : {"run.jsonl", "records.csv", "identity.csv", "neck.csv",
                           "profile.csv", "metrics.csv", "summary.json"})
    CHECK(fs::exists(d / "out" / name));
  std::ifstream in(d / "out" / "summary.json");
  nlohmann::json s = nlohmann::json::parse(in);
  CHECK(s["experiment"] == "oracle_validation");
  CHECK_FALSE(s["partial"].get<bool>());
  // headline metric survived the round trip through metrics.csv
  const double rel = s["metrics"]["equator_energy_rel_err"].get<double>();
  CHECK(rel < 0.01);
}
