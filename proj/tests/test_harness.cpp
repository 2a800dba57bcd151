#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "jsde/error.hpp"
#include "jsde/harness.hpp"
#include "jsde/model.hpp"

using namespace jsde;

TEST_CASE("mean and standard error") {
  const MeanStat s = mean_stat({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(s.n == 4);
}

TEST_CASE("explosion frequencies are monotone in the radius") {
  ExperimentConfig c;
  c.kind = ExperimentKind::explosion;
  c.model_name = "linear";
  c.radii = {250.0, 2.0, 10.0};
  c.paths = 300;
  c.skip_checks = true;
  const ExperimentSummary s = run_explosion(c);
  REQUIRE(s.radii.size() == 3);
  CHECK(s.radii[0].radius == 2.0);  // sorted
  for (std::size_t i = 1; i < s.radii.size(); ++i) CHECK(s.radii[i].exits <= s.radii[i - 1].exits);
  CHECK(s.rows.size() == 300);
}

TEST_CASE("a failing growth pre-check blocks the run unless skipped") {
  ExperimentConfig c;
  c.kind = ExperimentKind::explosion;
  CoefficientSet m = preset("zero");
  m.label = "cubic";
  m.b = [](double x) { return x * x * x; };
  c.model = m;
  c.mu = 10.0;
  c.paths = 10;
  CHECK_THROWS_AS(run_explosion(c), DomainError);
  c.skip_checks = true;
  c.radii = {10.0};
  CHECK_NOTHROW(run_explosion(c));
}

TEST_CASE("uniqueness on a deterministic model without jumps") {
  ExperimentConfig c;
  c.kind = ExperimentKind::uniqueness;
  c.model_name = "constant_drift";
  c.steps = {0.25, 0.125, 0.0625};
  c.paths = 5;
  const ExperimentSummary s = run_uniqueness(c);
  for (const LevelRow& l : s.levels) CHECK(l.statistic.mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.coupling_verified);
}

TEST_CASE("convergence: exact schemes are flagged exact") {
  ExperimentConfig c;
  c.kind = ExperimentKind::convergence;
  c.model_name = "constant_drift";
  c.steps = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  c.paths = 10;
  CHECK(run_convergence(c).exact);
}

TEST_CASE("convergence order of the tamed scheme on the cube drift preset") {
  ExperimentConfig c;
  c.kind = ExperimentKind::convergence;
  c.model_name = "example_41";
  c.steps = {1.0 / 256, 1.0 / 512, 1.0 / 1024, 1.0 / 2048};
  c.paths = 1000;
  c.master_seed = 2024;
  const ExperimentSummary s = run_convergence(c);
  REQUIRE(s.slope);
  CHECK(*s.slope >= 0.3);
  CHECK(*s.slope <= 0.7);
  REQUIRE(s.order_ci_low);
  CHECK(*s.order_ci_low <= *s.slope);
  CHECK(*s.order_ci_high >= *s.slope);
}

TEST_CASE("contraction keeps the distance e^-t") {
  ExperimentConfig c;
  c.kind = ExperimentKind::nonconfluence;
  c.model_name = "contraction";
  c.x0 = 0.0;
  c.y0 = 1.0;
  c.paths = 3;
  c.steps = {1.0 / 1024};
  const ExperimentSummary s = run_nonconfluence(c);
  CHECK(s.smallest_distance == doctest::Approx(std::exp(-1.0)).epsilon(1e-3));
  for (const EpsilonRow& e : s.epsilons) CHECK(e.below == (e.epsilon > std::exp(-1.0) ? 3u : 0u));
}

TEST_CASE("budget and ladder validation") {
  ExperimentConfig c;
  c.kind = ExperimentKind::explosion;
  c.paths = 1000;
  c.steps = {1e-6};
  c.budget = 1e6;
  CHECK_THROWS_AS(run_experiment(c), ResourceError);
  ExperimentConfig u;
  u.kind = ExperimentKind::uniqueness;
  u.steps = {0.25, 0.125};
  CHECK_THROWS_AS(run_experiment(u), DomainError);
}

TEST_CASE("summary JSON and data CSV layout") {
  ExperimentConfig c;
  c.kind = ExperimentKind::explosion;
  c.paths = 20;
  c.master_seed = 5;
  const ExperimentSummary s = run_experiment(c);
  const nlohmann::json j = to_json(s);
  for (const char* k : {"experiment", "config", "statistics", "bounds", "seeds"}) CHECK(j.contains(k));
  const auto dir = std::filesystem::temp_directory_path() / "jsde_harness_test";
  write_outputs(s, dir);
  std::ifstream in(dir / "data.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("path_index,seed", 0) == 0);
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 20);
  CHECK(std::filesystem::exists(dir / "summary.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("parallel_for visits every index and rethrows the lowest failure") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(1000, 4, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  try {
    parallel_for(100, 3, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "17");
  }
}

TEST_CASE("experiment kinds parse") {
  CHECK(parse_experiment_kind("convergence") == ExperimentKind::convergence);
  CHECK_THROWS_AS(parse_experiment_kind("explode"), CatalogError);
}
