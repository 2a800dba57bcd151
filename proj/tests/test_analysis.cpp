#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "jsde/analysis.hpp"
#include "jsde/error.hpp"

using namespace jsde;

TEST_CASE("stretched log coordinate is a monotone bijection") {
  double prev = -INFINITY;
  for (double u = -1e6; u < 50.0; u = u < -2.0 ? u / 1.7 : u + 0.37) {
    const double z = stretch_log(u);
    CHECK(z > prev);
    prev = z;
    CHECK(unstretch_log(z) == doctest::Approx(u).epsilon(1e-12));
  }
}

TEST_CASE("Omega of the identity modulus is a logarithm") {
  const OmegaTransform om(builtin_modulus("identity"), 1.0);
  for (double t : {1e-100, 1e-5, 0.3, 1.0, 7.0, 1e20}) CHECK(om.forward(t) == doctest::Approx(std::log(t)));
  CHECK(om.inverse(2.0) == doctest::Approx(std::exp(2.0)));
  CHECK_THROWS_AS(om.inverse(1e6), RangeError);
}

TEST_CASE("Omega inverse round-trips for every catalog modulus and base point") {
  for (const std::string& key : modulus_catalog()) {
    CAPTURE(key);
    const Modulus m = builtin_modulus(key);
    for (double base : {0.01, std::min(1.0, m.domain_upper)}) {
      const OmegaTransform om(m, base);
      for (double t : {1e-200, 1e-30, 1e-4, 0.02, 0.5, 3.0, 100.0}) {
        const double y = om.forward(t);
        CHECK(om.inverse(y) == doctest::Approx(t).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("Bihari bound does not depend on the base point") {
  for (const std::string& key : modulus_catalog()) {
    CAPTURE(key);
    const Modulus m = builtin_modulus(key);
    auto f = [](double) { return 0.01; };
    auto g = [](double s) { return 1.0 + s; };
    const double a = bihari_bound(OmegaTransform(m, 0.01), f, g, 0.5).bound;
    const double b = bihari_bound(OmegaTransform(m, std::min(1.0, m.domain_upper)), f, g, 0.5).bound;
    CHECK(a == doctest::Approx(b).epsilon(1e-8));
    CHECK(a >= 0.01);
  }
}

TEST_CASE("Bihari bound is monotone in f and g") {
  const OmegaTransform om(builtin_modulus("neg_x_log_x"), 0.1);
  double prev = 0.0;
  for (double k : {1e-6, 1e-4, 1e-3, 1e-2}) {
    const double b = bihari_bound(om, [k](double) { return k; }, [](double) { return 1.0; }, 1.0).bound;
    CHECK(b > prev);
    prev = b;
  }
  const double g1 = bihari_bound(om, [](double) { return 1e-3; }, [](double) { return 1.0; }, 1.0).bound;
  const double g2 = bihari_bound(om, [](double) { return 1e-3; }, [](double) { return 2.0; }, 1.0).bound;
  CHECK(g2 > g1);
}

TEST_CASE("Bihari bound rejects non-positive f and negative g") {
  const OmegaTransform om(builtin_modulus("identity"), 1.0);
  CHECK_THROWS_AS(bihari_bound(om, [](double) { return -1.0; }, [](double) { return 1.0; }, 1.0), DomainError);
  CHECK_THROWS_AS(bihari_bound(om, [](double) { return 1.0; }, [](double) { return -1.0; }, 1.0), DomainError);
  CHECK(bihari_bound(om, zero_forcing, [](double) { return 5.0; }, 3.0).bound == 0.0);
}

TEST_CASE("bound record fields") {
  const OmegaTransform om(builtin_modulus("identity"), 1.0);
  const BihariBound r = bihari_bound(om, [](double) { return 2.0; }, [](double) { return 1.0; }, 1.0);
  const nlohmann::json j = bound_record(om, {{"t", 1.0}}, r);
  for (const char* k : {"modulus", "base_point", "inputs", "bound", "quadrature_error_estimate"}) CHECK(j.contains(k));
  CHECK(j["bound"].get<double>() == doctest::Approx(2.0 * std::numbers::e));
}

TEST_CASE("a-sequence: decreasing and each step carries mass n") {
  for (const std::string& key : modulus_catalog()) {
    CAPTURE(key);
    const Modulus m = builtin_modulus(key);
    const ASequence a = a_sequence(m, 8);
    CHECK(a.log_values[0] == 0.0);
    for (int n = 1; n <= 8; ++n) {
      CHECK(a.log_values[n] < a.log_values[n - 1]);
      CHECK(integrate_reciprocal_modulus(m, a.log_values[n], a.log_values[n - 1]).value ==
            doctest::Approx(n).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(a_sequence(power_modulus(0.5), 5), DomainError);
}

TEST_CASE("psi family: slope, support and second-derivative bounds") {
  const Modulus m = builtin_modulus("identity");
  for (int n : {1, 3, 10}) {
    const PsiFamily p(m, n);
    CHECK(p.psi(0.0) == 0.0);
    CHECK(p.psi(std::exp(p.log_a_n()) * 0.5) == 0.0);
    // Symmetric in r, slope one beyond a_{n-1}.
    CHECK(p.psi(-0.7) == doctest::Approx(p.psi(0.7)));
    CHECK(p.psi_prime(2.0) == doctest::Approx(1.0));
    CHECK(p.psi(3.0) - p.psi(2.0) == doctest::Approx(1.0));
    // 0 <= psi(r) <= |r|
    for (double r : {1e-3, 0.01, 0.2, 0.9, 5.0}) {
      CHECK(p.psi(r) >= 0.0);
      CHECK(p.psi(r) <= r * (1.0 + 1e-15));
    }
    // Second derivative integrates to one across (a_n, a_{n-1}).
    const double lo = std::exp(p.log_a_n()), hi = std::exp(p.log_a_prev());
    const double total = integrate([&](double r) { return p.psi_second(r); }, lo, hi, {1e-12, 1e-10, 4000}).value;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("phi and moment bound") {
  const PhiFunction one(builtin_growth("one"));
  CHECK(one(3.0) == doctest::Approx(4.0));
  CHECK(one.inverse(4.0) == doctest::Approx(3.0));
  for (const std::string& key : growth_catalog()) {
    const PhiFunction phi(builtin_growth(key));
    CHECK(phi(0.0) == doctest::Approx(1.0));
    CHECK(phi.inverse(phi(17.0)) == doctest::Approx(17.0).epsilon(1e-8));
    CHECK(phi(10.0) > phi(1.0));
  }
  CHECK(moment_bound(builtin_growth("one"), 1.0, 0.0, 1.0, 1.0) == doctest::Approx(2.0 * std::numbers::e));
  CHECK(moment_bound(builtin_growth("one"), 0.5, 1.0, 2.0, 2.0) == doctest::Approx(3.0 * std::exp(2.0)));
  CHECK(implied_second_moment_bound(builtin_growth("one"), 5.0) == doctest::Approx(4.0));
}

TEST_CASE("non-confluence constants") {
  CHECK(p_alpha(0.0) == 2.0);
  CHECK(p_alpha(1.0) == 8.0);
  CHECK(p_alpha(2.0) == 19.0);
  const NonconfluenceConstants c = nonconfluence_constants(1.0, 1.0, 1.0);
  CHECK(c.K == 3.0);
  CHECK(c.K_prime == 2.0);
  CHECK(c.K1 == 5.0);
  CHECK(c.K2 == 7.0);
  const Modulus r0 = rho0_modulus(builtin_modulus("identity"), c);
  CHECK(r0.rho(0.5) == doctest::Approx(6.0));
}

TEST_CASE("R-inequality holds on random admissible pairs and rejects inadmissible ones") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (double alpha : {0.5, 1.0, 1.5, 3.0}) {
    std::vector<RPair> pairs;
    while (pairs.size() < 5000) {
      const double x = u(rng), y = u(rng);
      if (x != 0.0 && std::abs(x + y) >= 0.3 * std::abs(x)) pairs.push_back({x, y});
    }
    CHECK(r_inequality_check(alpha, 0.3, pairs).worst_slack <= 1e-12);
  }
  const RPair bad[] = {{1.0, -1.0}};
  CHECK_THROWS_AS(r_inequality_check(1.0, 0.5, bad), DomainError);
}
