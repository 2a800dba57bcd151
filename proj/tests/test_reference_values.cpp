// Worked reference values: closed forms, trivial models and small hand-built cases.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "jsde/analysis.hpp"
#include "jsde/harness.hpp"
#include "jsde/integrator.hpp"
#include "jsde/model.hpp"
#include "jsde/noise.hpp"
#include "jsde/verifier.hpp"

using namespace jsde;
using std::numbers::e;

namespace {
const ConditionResult& cond(const AssumptionReport& r, const std::string& name) {
  for (const ConditionResult& c : r.conditions)
    if (c.name == name) return c;
  FAIL("missing condition " << name);
  throw;
}
}  // namespace

TEST_CASE("catalog values") {
  CHECK(builtin_modulus("identity").rho(0.5) == doctest::Approx(0.5));
  CHECK(builtin_modulus("neg_x_log_x").rho(1.0 / e) == doctest::Approx(1.0 / e));
  CHECK(builtin_modulus("x_log_log").rho(std::exp(-e)) == doctest::Approx(std::exp(-e)));
  CHECK(builtin_growth("one").upsilon(17.0) == 1.0);
  CHECK(builtin_growth("log").upsilon(e * e) == doctest::Approx(2.0));
  CHECK(builtin_growth("log_loglog").upsilon(std::exp(e)) == doctest::Approx(e));
}

TEST_CASE("preset coefficient values") {
  const CoefficientSet a = preset("example_31");
  CHECK(a.b(1.0 / e) == doctest::Approx(1.0 / e));
  CHECK(a.sigma(4.0) == doctest::Approx(2.0));
  CHECK(calibrate_jump_scale(MarkMeasure::lebesgue(-1.0, 1.0, "u")) == doctest::Approx(std::sqrt(1.5)));
  const CoefficientSet b = preset("example_41");
  CHECK(b.b(1.0) == doctest::Approx(-2.0));
  CHECK(b.b(-1.0) == doctest::Approx(2.0));
  CHECK(b.sigma(3.0) == doctest::Approx(6.0));
}

TEST_CASE("noise: zero measures and a unit-rate large-jump measure") {
  const NoiseRealization z = sample_noise(zero_model(), 1.0, 0.125, 4);
  CHECK(z.jump_events.empty());
  CHECK(z.brownian_increments.size() == 8);

  CoefficientSet m = zero_model();
  m.nu2 = MarkMeasure::lebesgue(1.0, 2.0, "unit");
  double total = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const NoiseRealization r = sample_noise(m, 1.0, 0.25, derive_path_seed(1, i));
    total += static_cast<double>(r.jump_events.size());
    for (const JumpEvent& ev : r.jump_events) {
      CHECK(ev.mark > 1.0 - 1e-12);
      CHECK(ev.mark <= 2.0);
    }
  }
  CHECK(std::abs(total / n - 1.0) <= 5.0 * std::sqrt(1.0 / n));
}

TEST_CASE("small-jump truncation values") {
  const TruncatedMeasure a = truncate_small_jumps(MarkMeasure::from_atoms({{0.5, 2.0}}, "a"), 0.1);
  CHECK(a.measure.total_mass() == doctest::Approx(2.0));
  const TruncatedMeasure l = truncate_small_jumps(MarkMeasure::lebesgue(-1.0, 1.0, "l"), 0.5);
  CHECK(l.measure.total_mass() == doctest::Approx(1.0));
  CHECK(l.measure.sample_mark(0.25) == doctest::Approx(-0.75));
  CHECK(l.measure.sample_mark(0.75) == doctest::Approx(0.75));
  CHECK(truncate_small_jumps(MarkMeasure::lebesgue(-1.0, 1.0, "l"), 0.0).measure.total_mass() ==
        doctest::Approx(2.0));
}

TEST_CASE("large-jump split by membership") {
  NoiseRealization n;
  n.horizon = 1.0;
  n.jump_events = {{0.2, 1.2, JumpSource::large}, {0.6, 1.8, JumpSource::large}};
  const LargeJumpSplit s = split_large_jumps(n, SubSupport::of({{1.0, 1.5, false, true}}));
  REQUIRE(s.inside.size() == 1);
  REQUIRE(s.outside.size() == 1);
  CHECK(s.inside[0].mark == 1.2);
  CHECK(s.outside[0].mark == 1.8);
}

TEST_CASE("a single unit jump moves the state by one") {
  CoefficientSet m = zero_model();
  m.nu2 = MarkMeasure::from_atoms({{1.0, 1.0}}, "one");
  m.c2 = [](double, double) { return 1.0; };
  NoiseRealization n;
  n.horizon = 1.0;
  n.base_grid = {0.0, 0.5, 1.0};
  n.brownian_increments = {0.0, 0.0};
  n.jump_events = {{0.3, 1.0, JumpSource::large}};
  n.event_brownian = {0.0};
  n.seed = 9;
  SchemeConfig sc;
  sc.base_step = 0.5;
  const PathResult p = simulate(m, n, sc, 2.0);
  CHECK(p.final_state() == 3.0);
  CHECK(p.times.size() == 4);

  const ItoFunction sq{[](double x) { return x * x; }, [](double x) { return 2.0 * x; }, [](double) { return 2.0; }};
  const PathResult y = ito_levy_apply(sq, simulate(m, n, sc, 0.0), m, n);
  CHECK(y.states[0] == 0.0);
  CHECK(y.states[1] == doctest::Approx(1.0));
  CHECK(y.final_state() == doctest::Approx(1.0));
}

TEST_CASE("first exit time on hand-built paths") {
  PathResult c;
  c.times = {0.0, 0.5, 1.0};
  c.states = {3.0, 3.0, 3.0};
  CHECK_FALSE(first_exit_time(c, 5.0).has_value());
  CHECK(*first_exit_time(c, 2.0) == 0.0);
  PathResult r;
  r.times = {0.0, 1.0, 2.0, 3.0};
  r.states = {0.0, 1.0, 2.0, 3.0};
  CHECK(*first_exit_time(r, 2.5) == 3.0);
}

TEST_CASE("Ito-Levy expansion: identity and deterministic square") {
  const CoefficientSet m = preset("example_31");
  const NoiseRealization n = sample_noise(m, 1.0, 1.0 / 64.0, 8);
  const PathResult p = simulate(m, n, default_scheme(m, 1.0 / 64.0), 0.5);
  const ItoFunction id{[](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
  const PathResult y = ito_levy_apply(id, p, m, n);
  for (std::size_t i = 0; i < p.states.size(); ++i) CHECK(y.states[i] == doctest::Approx(p.states[i]).epsilon(1e-12));

  const CoefficientSet c = preset("constant_drift");
  const double h = 1.0 / 128.0;
  const NoiseRealization nc = sample_noise(c, 1.0, h, 1);
  const PathResult pc = simulate(c, nc, default_scheme(c, h), 0.0);
  const ItoFunction sq{[](double x) { return x * x; }, [](double x) { return 2.0 * x; }, [](double) { return 2.0; }};
  const PathResult yc = ito_levy_apply(sq, pc, c, nc);
  for (std::size_t i = 0; i < pc.times.size(); ++i)
    CHECK(std::abs(yc.states[i] - pc.times[i] * pc.times[i]) <= 1.01 * h);
}

TEST_CASE("Omega reference values") {
  const OmegaTransform id(builtin_modulus("identity"), 1.0);
  CHECK(id.forward(e) == doctest::Approx(1.0));
  CHECK(id.inverse(1.0) == doctest::Approx(e));
  CHECK(id.forward(1.0) == 0.0);
  const OmegaTransform nl(builtin_modulus("neg_x_log_x"), 1.0 / e);
  CHECK(nl.forward(1.0 / (e * e)) == doctest::Approx(-std::log(2.0)).epsilon(1e-10));
  for (const std::string& key : modulus_catalog()) {
    CAPTURE(key);
    const Modulus m = builtin_modulus(key);
    const double tb = std::min(1.0, m.domain_upper);
    const OmegaTransform om(m, tb);
    double prev = om.forward(tb);
    for (int k = 1; k <= 12; ++k) {
      const double v = om.forward(tb * std::pow(10.0, -k));
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("Bihari bound with g = 0 reduces to f(t)") {
  const OmegaTransform id(builtin_modulus("identity"), 1.0);
  const double b = bihari_bound(id, [](double t) { return 1.0 + t; }, [](double) { return 0.0; }, 3.0).bound;
  CHECK(b == doctest::Approx(4.0));
}

TEST_CASE("phi reference values") {
  CHECK(PhiFunction(builtin_growth("one"))(4.0) == doctest::Approx(5.0));
  for (const std::string& key : growth_catalog()) CHECK(PhiFunction(builtin_growth(key))(0.0) == 1.0);
  // Log growth at x = 10 against an independent quadrature of ds / (s Y(s) + 1).
  const GrowthFunction lg = builtin_growth("log");
  std::vector<double> cuts = lg.kinks;
  const double oracle = integrate([&](double s) { return 1.0 / (s * lg.upsilon(s) + 1.0); }, 0.0, 10.0, cuts,
                                  {1e-14, 1e-13, 4000})
                            .value;
  CHECK(PhiFunction(lg).log_value(10.0) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(moment_bound(builtin_growth("one"), 1.0, 0.0, 3.0, 0.0) == doctest::Approx(4.0));
  CHECK(moment_bound(builtin_growth("log"), 0.0, 2.0, 3.0, 5.0) ==
        doctest::Approx(moment_bound(builtin_growth("log"), 0.0, 2.0, 3.0, 0.0)));
}

TEST_CASE("a-sequence reference values") {
  const ASequence id = a_sequence(builtin_modulus("identity"), 3);
  CHECK(id.value(0) == 1.0);
  CHECK(id.value(1) == doctest::Approx(std::exp(-1.0)));
  CHECK(id.value(2) == doctest::Approx(std::exp(-3.0)));
  CHECK(id.value(3) == doctest::Approx(std::exp(-6.0)));
  for (const std::string& key : modulus_catalog()) CHECK(a_sequence(builtin_modulus(key), 1).value(0) == 1.0);
  // a_1 for -x ln x by direct quadrature of 1/rho plus bisection.
  const Modulus nl = builtin_modulus("neg_x_log_x");
  const double cut[] = {1.0 / e};
  auto mass = [&](double a) {
    return integrate([&](double s) { return 1.0 / nl.rho(s); }, a, 1.0, cut, {1e-14, 1e-12, 4000}).value - 1.0;
  };
  const double a1 = bisect(mass, 1e-6, 0.99, 1e-15);
  CHECK(a_sequence(nl, 1).value(1) == doctest::Approx(a1).epsilon(1e-9));
}

TEST_CASE("psi_1(1) by two independent integrations") {
  const PsiFamily p(builtin_modulus("identity"), 1);
  const double lo = std::exp(p.log_a_n());
  const double nested = integrate([&](double r) { return p.psi_prime(r); }, lo, 1.0, {1e-13, 1e-12, 4000}).value;
  const int n = 200000;
  double trap = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = lo + (1.0 - lo) * i / n, b = lo + (1.0 - lo) * (i + 1) / n;
    trap += 0.5 * (p.psi_prime(a) + p.psi_prime(b)) * (b - a);
  }
  CHECK(nested == doctest::Approx(trap).epsilon(1e-6));
  CHECK(p.psi(1.0) == doctest::Approx(nested).epsilon(1e-6));
}

TEST_CASE("psi slope reaches one beyond a_{n-1} and psi_n approaches |r|") {
  for (const std::string& key : modulus_catalog()) {
    CAPTURE(key);
    const Modulus m = builtin_modulus(key);
    const ASequence seq = a_sequence(m, 20);
    for (int n : {1, 5, 20}) {
      const PsiFamily p(m, seq, n);
      for (double d : {0.0, 0.5, 2.0}) CHECK(std::abs(p.psi_prime_at_log(p.log_a_prev() + d) - 1.0) <= 1e-8);
    }
    const PsiFamily p5(m, seq, 5), p20(m, seq, 20);
    for (double r : {0.05, 0.2, 0.5}) {
      if (r > m.domain_upper) continue;
      CHECK(r - p20.psi(r) <= r - p5.psi(r));
    }
  }
}

TEST_CASE("constants for alpha = 0 and delta = 2") {
  const NonconfluenceConstants a = nonconfluence_constants(0.0, 1.0, 0.0);
  CHECK(a.K == 1.0);
  CHECK(a.K_prime == 1.0);
  CHECK(a.K1 == 0.0);
  CHECK(a.K2 == 2.0);
  const NonconfluenceConstants b = nonconfluence_constants(1.0, 2.0, 0.0);
  CHECK(b.K == 1.5);
  CHECK(b.K_prime == 1.0);
  CHECK(b.K1 == 0.0);
  CHECK(b.K2 == 4.5);
}

TEST_CASE("R-inequality trivial cases") {
  const RPair zero_y[] = {{1.0, 0.0}, {-3.0, 0.0}, {0.2, 0.0}};
  CHECK(r_inequality_check(1.5, 0.5, zero_y).worst_slack <= 0.0);
  const RPair any[] = {{1.0, 2.0}, {-3.0, 1.0}, {0.2, -0.1}};
  const RInequalityResult r0 = r_inequality_check(0.0, 0.5, any);
  CHECK(r0.worst_slack <= 0.0);
  CHECK(r0.lhs == 0.0);
}

TEST_CASE("verifier reference cases") {
  CHECK(check_modulus(builtin_modulus("identity")).verdict == Verdict::no_violation_found);
  CHECK(check_modulus(builtin_modulus("neg_x_log_x")).verdict == Verdict::no_violation_found);
  // x^2 is convex (violated) but int ds / s^2 diverges; sqrt(x) is the divergence counterexample.
  const AssumptionReport sq2 = check_modulus(power_modulus(2.0));
  CHECK(sq2.verdict == Verdict::violated);
  CHECK(cond(sq2, "midpoint_concave").verdict == Verdict::violated);
  CHECK(cond(sq2, "divergent_at_0").verdict == Verdict::no_violation_found);
  CHECK(cond(check_modulus(power_modulus(0.5)), "divergent_at_0").verdict == Verdict::violated);

  const CoefficientSet a = preset("example_31");
  const double mu = growth_ratio_supremum(a, builtin_growth("one"));
  CHECK(check_growth(a, builtin_growth("one"), mu).verdict == Verdict::no_violation_found);
  CoefficientSet cube = zero_model();
  cube.b = [](double x) { return x * x * x; };
  for (double mu_fixed : {1.0, 1e3, 1e5}) {
    const AssumptionReport r = check_growth(cube, builtin_growth("log"), mu_fixed);
    CHECK(r.verdict == Verdict::violated);
    CHECK(std::abs(r.worst_witness->inputs.at("x").get<double>()) >= 100.0);
  }
  CHECK(check_growth(zero_model(), builtin_growth("one"), 0.0).verdict == Verdict::no_violation_found);

  for (const std::string& key : modulus_catalog())
    CHECK(check_local_conditions(zero_model(), builtin_modulus(key), 1.0, 0.1).verdict ==
          Verdict::no_violation_found);
  CoefficientSet lin = zero_model();
  lin.b = [](double x) { return x; };
  CHECK(check_local_conditions(lin, builtin_modulus("identity"), 1.0, 1.0).verdict == Verdict::no_violation_found);
  CoefficientSet sq = zero_model();
  sq.b = [](double x) { return x * x; };
  CHECK(check_local_conditions(sq, builtin_modulus("identity"), 1.0, 1.0).verdict == Verdict::violated);

  const Modulus id = builtin_modulus("identity");
  GridSpec grid;
  grid.gap_hi = 1.0;
  CoefficientSet dec = zero_model();
  dec.nu1 = MarkMeasure::lebesgue(-1.0, 1.0, "u");
  dec.c1 = [](double x, double) { return -x; };
  CHECK(cond(check_corollary_conditions(dec, id, scaled_modulus(id, 10.0), 1.0, grid), "c1_non_decreasing")
            .verdict == Verdict::violated);
  CHECK(check_corollary_conditions(zero_model(), id, id, 1.0, grid).verdict == Verdict::no_violation_found);

  CoefficientSet grow = zero_model();
  const double g = std::sqrt(1.5);
  grow.nu1 = MarkMeasure::lebesgue(-1.0, 1.0, "u");
  grow.c1 = [g](double x, double u) { return g * std::abs(u) * x; };
  const AssumptionReport sep = check_nonconfluence_conditions(grow, scaled_modulus(id, 4.0), 0.0, 0.5);
  CHECK(cond(sep, "separation_nu1").verdict == Verdict::no_violation_found);
}

TEST_CASE("trivial experiments") {
  ExperimentConfig c;
  c.model_name = "zero";
  c.paths = 20;
  c.x0 = 1.0;
  c.kind = ExperimentKind::explosion;
  c.radii = {2.0, 5.0};
  for (const RadiusRow& r : run_explosion(c).radii) CHECK(r.frequency == 0.0);

  c.kind = ExperimentKind::uniqueness;
  c.steps = {0.25, 0.125, 0.0625};
  for (const LevelRow& l : run_uniqueness(c).levels) CHECK(l.statistic.mean == 0.0);

  c.kind = ExperimentKind::nonconfluence;
  c.x0 = 0.0;
  c.y0 = 1.0;
  c.steps = {1.0 / 64};
  const ExperimentSummary n = run_nonconfluence(c);
  CHECK(n.smallest_distance == 1.0);
  CHECK(n.min_distance.mean == 1.0);

  c.kind = ExperimentKind::convergence;
  c.model_name = "contraction";
  c.x0 = 1.0;
  c.steps = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  const ExperimentSummary cv = run_convergence(c);
  REQUIRE(cv.slope);
  CHECK(*cv.slope == doctest::Approx(1.0).epsilon(0.1));
}
