#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "jsde/error.hpp"
#include "jsde/model.hpp"

using namespace jsde;

TEST_CASE("every catalog preset builds and validates") {
  for (const std::string& name : preset_catalog()) {
    CAPTURE(name);
    const CoefficientSet m = preset(name);
    CHECK(m.label == name);
    CHECK_NOTHROW(validate(m));
  }
}

TEST_CASE("unknown preset names list the catalog") {
  try {
    preset("example_13");
    FAIL("expected CatalogError");
  } catch (const CatalogError& e) {
    const std::string what = e.what();
    CHECK(what.find("example_31") != std::string::npos);
  }
}

TEST_CASE("paper presets have the documented structure") {
  const CoefficientSet a = preset("example_31");
  CHECK(a.u3.is_empty());
  CHECK_FALSE(a.superlinear_drift);
  CHECK(a.b(std::exp(-1.0)) == doctest::Approx(std::exp(-1.0)));
  CHECK(a.b(0.0) == 0.0);
  const CoefficientSet b = preset("example_41");
  CHECK(b.superlinear_drift);
  CHECK(b.c1_slope.has_value());
  CHECK(b.c2_slope.has_value());
  CHECK(b.b(8.0) == doctest::Approx(-(512.0 + 2.0)));
  CHECK(b.nu2.has_finite_mass());
}

TEST_CASE("lebesgue and atom measures integrate exactly") {
  const MarkMeasure leb = MarkMeasure::lebesgue(-1.0, 2.0, "leb");
  CHECK(leb.total_mass() == doctest::Approx(3.0));
  CHECK(leb.integrate([](double u) { return u * u; }) == doctest::Approx(3.0).epsilon(1e-12));
  const MarkMeasure at = MarkMeasure::from_atoms({{1.0, 0.25}, {-2.0, 0.75}}, "atoms");
  CHECK(at.total_mass() == doctest::Approx(1.0));
  CHECK(at.integrate([](double u) { return u; }) == doctest::Approx(0.25 - 1.5));
  CHECK(MarkMeasure().is_zero());
}

TEST_CASE("inverse-CDF sampling stays on the support and follows the CDF") {
  const MarkMeasure leb = MarkMeasure::lebesgue(2.0, 4.0, "leb");
  for (int i = 1; i < 100; ++i) {
    const double q = i / 100.0;
    CHECK(leb.sample_mark(q) == doctest::Approx(2.0 + 2.0 * q).epsilon(1e-9));
  }
  const MarkMeasure at = MarkMeasure::from_atoms({{1.0, 1.0}, {5.0, 3.0}}, "atoms");
  CHECK(at.sample_mark(0.2) == 1.0);
  CHECK(at.sample_mark(0.3) == 5.0);
}

TEST_CASE("mark grid cells carry the total mass") {
  const MarkMeasure leb = MarkMeasure::lebesgue(0.0, 1.0, "leb");
  double mass = 0.0;
  for (const MarkCell& c : leb.mark_grid(50)) mass += c.mass;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("restriction to a sub-support") {
  const MarkMeasure leb = MarkMeasure::lebesgue(0.0, 4.0, "leb");
  const SubSupport s = SubSupport::of({{1.0, 2.0, true, true}, {3.0, 3.5, true, true}});
  CHECK(leb.restricted_to(s).total_mass() == doctest::Approx(1.5));
  CHECK(leb.restricted_to(SubSupport::nothing()).is_zero());
  CHECK(leb.restricted_to(SubSupport::everything()).total_mass() == doctest::Approx(4.0));
}

TEST_CASE("moduli: ratio_at_log agrees with rho and scaling is linear") {
  for (const std::string& key : modulus_catalog()) {
    CAPTURE(key);
    const Modulus m = builtin_modulus(key);
    for (double x : {1e-8, 1e-3, 0.05, 0.2}) {
      if (x > m.domain_upper) continue;
      CHECK(m.ratio_at(std::log(x)) * x == doctest::Approx(m.rho(x)).epsilon(1e-12));
      CHECK(m.rho(x) > 0.0);
    }
    const Modulus s = scaled_modulus(m, 3.0);
    CHECK(s.rho(0.01) == doctest::Approx(3.0 * m.rho(0.01)));
  }
  CHECK_THROWS_AS(builtin_modulus("nope"), CatalogError);
}

TEST_CASE("growth functions are at least one and non-decreasing") {
  for (const std::string& key : growth_catalog()) {
    CAPTURE(key);
    const GrowthFunction g = builtin_growth(key);
    double prev = g.upsilon(0.0);
    CHECK(prev >= 1.0);
    for (double x = 0.5; x < 1e6; x *= 3.0) {
      CHECK(g.upsilon(x) >= prev);
      prev = g.upsilon(x);
    }
  }
}

TEST_CASE("jump scale calibration normalizes the second moment") {
  const MarkMeasure leb = MarkMeasure::lebesgue(-1.0, 1.0, "leb");
  const double g = calibrate_jump_scale(leb);
  CHECK(g * g * (2.0 / 3.0) == doctest::Approx(1.0));
}
