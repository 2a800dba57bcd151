#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "jsde/error.hpp"
#include "jsde/model.hpp"
#include "jsde/verifier.hpp"

using namespace jsde;

namespace {
const ConditionResult* find(const AssumptionReport& r, const std::string& name) {
  for (const ConditionResult& c : r.conditions)
    if (c.name == name) return &c;
  return nullptr;
}
}  // namespace

TEST_CASE("paper presets pass their designated profiles") {
  for (const char* name : {"example_31", "example_41"}) {
    const CoefficientSet m = preset(name);
    const auto profiles = designated_profiles(name);
    CHECK_FALSE(profiles.empty());
    for (const VerificationProfile& p : profiles) {
      CAPTURE(name);
      CAPTURE(to_string(p.assumption));
      CHECK(run_profile(m, p).verdict == Verdict::no_violation_found);
    }
  }
  CHECK(designated_profile("example_31", AssumptionId::A25).has_value());
  CHECK_FALSE(designated_profile("zero", AssumptionId::A25).has_value());
}

TEST_CASE("catalog moduli pass and sqrt fails divergence") {
  for (const std::string& key : modulus_catalog()) {
    CAPTURE(key);
    CHECK(check_modulus(builtin_modulus(key)).verdict == Verdict::no_violation_found);
  }
  const AssumptionReport r = check_modulus(power_modulus(0.5));
  CHECK(r.verdict == Verdict::violated);
  REQUIRE(find(r, "divergent_at_0"));
  CHECK(find(r, "divergent_at_0")->verdict == Verdict::violated);
  CHECK(find(r, "midpoint_concave")->verdict == Verdict::no_violation_found);
}

TEST_CASE("non-concave modulus is caught") {
  const AssumptionReport r = check_modulus(power_modulus(2.0));
  REQUIRE(find(r, "midpoint_concave"));
  CHECK(find(r, "midpoint_concave")->verdict == Verdict::violated);
}

TEST_CASE("witness slack is lhs minus rhs and exceeds the threshold") {
  CoefficientSet m = zero_model();
  m.b = [](double x) { return x * x * x; };
  const AssumptionReport r = check_growth(m, builtin_growth("one"), 10.0);
  CHECK(r.verdict == Verdict::violated);
  REQUIRE(r.worst_witness);
  const Witness& w = *r.worst_witness;
  CHECK(w.slack == doctest::Approx(w.lhs - w.rhs));
  CHECK(w.slack > w.threshold);
  const double x = w.inputs.at("x");
  CHECK(w.lhs == doctest::Approx(growth_lhs(m, x)));
}

TEST_CASE("growth passes at the grid supremum and fails just below it") {
  const CoefficientSet m = preset("ou_toy");
  const double mu = growth_ratio_supremum(m, builtin_growth("one"));
  CHECK(check_growth(m, builtin_growth("one"), mu).verdict == Verdict::no_violation_found);
  CHECK(check_growth(m, builtin_growth("one"), 0.9 * mu).verdict == Verdict::violated);
}

TEST_CASE("advisory conditions do not decide the verdict") {
  const AssumptionReport r = check_growth(preset("ou_toy"), builtin_growth("one"), 5.0);
  const ConditionResult* adv = find(r, "upsilon_unbounded");
  REQUIRE(adv);
  CHECK(adv->advisory);
  CHECK(adv->verdict == Verdict::violated);
  CHECK(r.verdict == Verdict::no_violation_found);
}

TEST_CASE("decreasing small-jump map and annihilating large jumps are caught") {
  CoefficientSet a = zero_model();
  a.nu1 = MarkMeasure::lebesgue(0.1, 1.0, "nu1");
  a.c1 = [](double x, double u) { return -u * x; };
  GridSpec grid;
  grid.gap_hi = 1.0;
  const Modulus id = builtin_modulus("identity");
  const AssumptionReport ra = check_corollary_conditions(a, id, scaled_modulus(id, 100.0), 1.0, grid);
  CHECK(find(ra, "c1_non_decreasing")->verdict == Verdict::violated);

  CoefficientSet b = zero_model();
  b.nu2 = MarkMeasure::lebesgue(0.0, 1.0, "nu2");
  b.c2 = [](double x, double) { return -x; };
  const AssumptionReport rb = check_nonconfluence_conditions(b, id, 0.0, 0.5);
  CHECK(find(rb, "separation_nu2")->verdict == Verdict::violated);
  CHECK(rb.verdict == Verdict::violated);
}

TEST_CASE("affine jump maps get the structural separation test") {
  CoefficientSet m = zero_model();
  m.nu2 = MarkMeasure::lebesgue(0.0, 1.0, "nu2");
  m.c2 = [](double x, double u) { return -u * x; };
  m.c2_slope = [](double u) { return -u; };
  const AssumptionReport r = check_nonconfluence_conditions(m, builtin_modulus("identity"), 0.0, 0.5);
  REQUIRE(find(r, "separation_affine_nu2"));
  CHECK(find(r, "separation_affine_nu2")->verdict == Verdict::violated);
}

TEST_CASE("Lipschitz form of the local conditions") {
  const Modulus id = builtin_modulus("identity");
  CHECK(check_local_conditions(preset("linear"), id, 0.0, 1.0).verdict == Verdict::no_violation_found);
  CHECK(check_local_conditions(preset("linear"), scaled_modulus(id, 0.5), 0.0, 1.0).verdict ==
        Verdict::violated);
}

TEST_CASE("report JSON carries the documented fields") {
  const AssumptionReport r = run_profile(preset("example_31"), *designated_profile("example_31", AssumptionId::A25));
  const nlohmann::json j = to_json(r);
  for (const char* k : {"assumption_id", "verdict", "worst_witness", "grid_spec", "conditions"}) CHECK(j.contains(k));
  CHECK(j["verdict"] == "no_violation_found");
  CHECK(j["assumption_id"] == "A25");
}

TEST_CASE("assumption names parse") {
  CHECK(parse_assumption("A24") == AssumptionId::A24);
  CHECK_THROWS_AS(parse_assumption("A99"), CatalogError);
}
