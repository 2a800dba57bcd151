#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "jsde/error.hpp"
#include "jsde/integrator.hpp"
#include "jsde/model.hpp"
#include "jsde/noise.hpp"

using namespace jsde;

namespace {
PathResult run(const std::string& name, double h, double x0, std::uint64_t seed = 1, double horizon = 1.0) {
  const CoefficientSet m = preset(name);
  return simulate(m, sample_noise(m, horizon, h, seed), default_scheme(m, h), x0);
}
}  // namespace

TEST_CASE("zero coefficients leave the state unchanged") {
  const PathResult p = run("zero", 1.0 / 32.0, 3.5);
  for (double x : p.states) CHECK(x == 3.5);
  CHECK(p.times.back() == doctest::Approx(1.0));
}

TEST_CASE("constant drift is integrated exactly") {
  const PathResult p = run("constant_drift", 1.0 / 16.0, 0.0);
  for (std::size_t i = 0; i < p.times.size(); ++i) CHECK(p.states[i] == doctest::Approx(p.times[i]));
}

TEST_CASE("Euler contraction is (1 - h)^k") {
  const double h = 1.0 / 64.0;
  const PathResult p = run("contraction", h, 1.0);
  CHECK(p.final_state() == doctest::Approx(std::pow(1.0 - h, 64)).epsilon(1e-12));
}

TEST_CASE("jump-adapted grid invariants") {
  const CoefficientSet m = preset("example_41");
  for (std::uint64_t s = 0; s < 40; ++s) {
    const NoiseRealization n = sample_noise(m, 1.0, 1.0 / 16.0, s);
    const PathResult p = simulate(m, n, default_scheme(m, 1.0 / 16.0), 1.0);
    REQUIRE(p.times.size() == p.states.size());
    REQUIRE(p.times.size() == p.left_limits.size());
    REQUIRE(p.times.size() == p.kinds.size());
    for (std::size_t i = 1; i < p.times.size(); ++i) CHECK(p.times[i] > p.times[i - 1]);
    for (std::size_t i = 0; i < p.times.size(); ++i)
      if (p.kinds[i] == PointKind::grid) CHECK(p.states[i] == p.left_limits[i]);
    CHECK(p.times.size() == 17 + n.jump_events.size());
    CHECK(p.realization_seed == s);
  }
}

TEST_CASE("explosion stops the path at the first exit") {
  const CoefficientSet m = preset("linear");
  SchemeConfig sc = default_scheme(m, 1.0 / 64.0, 5.0);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const PathResult p = simulate(m, sample_noise(m, 4.0, 1.0 / 64.0, s), sc, 1.0);
    if (p.exploded) {
      REQUIRE(p.exit_time.has_value());
      CHECK(std::abs(p.final_state()) >= 5.0);
      CHECK(p.times.back() == *p.exit_time);
      for (std::size_t i = 0; i + 1 < p.states.size(); ++i) CHECK(std::abs(p.states[i]) < 5.0);
    }
    // Exit from a bigger ball is never earlier than from a smaller one.
    const auto small = first_exit_time(p, 2.0), large = first_exit_time(p, 4.0);
    if (large) {
      REQUIRE(small);
      CHECK(*small <= *large);
    }
  }
}

TEST_CASE("taming bounds the drift increment") {
  const CoefficientSet m = preset("example_41");
  CHECK(default_scheme(m, 0.1).taming == Taming::drift_tamed);
  CHECK(default_scheme(preset("example_31"), 0.1).taming == Taming::off);
  // A huge start does not overflow when tamed.
  const PathResult p = run("example_41", 1.0 / 16.0, 1e5);
  CHECK(std::isfinite(p.final_state()));
}

TEST_CASE("Ito-Levy expansion matches f(X) for an affine f exactly") {
  const CoefficientSet m = preset("example_41");
  const NoiseRealization n = sample_noise(m, 1.0, 1.0 / 128.0, 11);
  const PathResult p = simulate(m, n, default_scheme(m, 1.0 / 128.0), 0.7);
  const ItoFunction f{[](double x) { return 3.0 * x + 1.0; }, [](double) { return 3.0; },
                      [](double) { return 0.0; }};
  const PathResult y = ito_levy_apply(f, p, m, n);
  for (std::size_t i = 0; i < p.states.size(); ++i)
    CHECK(y.states[i] == doctest::Approx(3.0 * p.states[i] + 1.0).epsilon(1e-10));
}

TEST_CASE("path dump header and rows") {
  const PathResult p = run("contraction", 0.5, 1.0);
  std::ostringstream s;
  write_path_csv(s, p, "contraction", 0.5, 1e6);
  const std::string text = s.str();
  CHECK(text.rfind("# label=contraction", 0) == 0);
  CHECK(text.find("time,state,event_kind\n") != std::string::npos);
  CHECK(text.find("0.5,0.5,grid") != std::string::npos);
}
