#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "jsde/error.hpp"
#include "jsde/model.hpp"
#include "jsde/noise.hpp"

using namespace jsde;

TEST_CASE("counter RNG is a pure function of (seed, stream, counter)") {
  const CounterRng a(7, 0), b(7, 0), c(7, 1), d(8, 0);
  for (std::uint64_t i = 0; i < 100; ++i) {
    CHECK(a.bits(i) == b.bits(i));
    CHECK(a.bits(i) != c.bits(i));
    CHECK(a.bits(i) != d.bits(i));
    const double u = a.uniform(i);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal draws have unit variance") {
  const CounterRng r(2024, 0);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal(i);
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 5.0 / std::sqrt(n));
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("path seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_path_seed(42, i));
  CHECK(seen.size() == 10000);
}

TEST_CASE("same seed gives the same realization") {
  const CoefficientSet m = preset("example_41");
  const NoiseRealization a = sample_noise(m, 1.0, 1.0 / 64.0, 99);
  const NoiseRealization b = sample_noise(m, 1.0, 1.0 / 64.0, 99);
  const NoiseRealization c = sample_noise(m, 1.0, 1.0 / 64.0, 100);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.brownian_increments.size() == 64);
}

TEST_CASE("jump events are sorted inside the horizon") {
  const CoefficientSet m = preset("example_41");
  for (std::uint64_t s = 0; s < 50; ++s) {
    const NoiseRealization n = sample_noise(m, 2.0, 1.0 / 32.0, s);
    for (std::size_t i = 0; i < n.jump_events.size(); ++i) {
      CHECK(n.jump_events[i].time > 0.0);
      CHECK(n.jump_events[i].time <= 2.0);
      if (i) CHECK(n.jump_events[i - 1].time <= n.jump_events[i].time);
    }
  }
}

TEST_CASE("coarsening keeps the Brownian path and every jump") {
  const CoefficientSet m = preset("example_41");
  const NoiseRealization fine = sample_noise(m, 1.0, 1.0 / 256.0, 5);
  const NoiseRealization coarse = coarsen(fine, 4);
  CHECK(coarse.brownian_increments.size() == 64);
  CHECK(coarse.jump_events == fine.jump_events);
  const std::vector<double> wf = fine.brownian_path(), wc = coarse.brownian_path();
  for (std::size_t k = 0; k < wc.size(); ++k) CHECK(wc[k] == doctest::Approx(wf[4 * k]).epsilon(1e-12));
}

TEST_CASE("small-jump truncation of an infinite measure") {
  const MarkMeasure inf = MarkMeasure::from_density({{-1.0, 1.0, true, true}},
                                                    [](double u) { return 1.0 / (u * u); }, "stable");
  CHECK_FALSE(inf.has_finite_mass());
  const TruncatedMeasure t = truncate_small_jumps(inf, 0.1);
  CHECK(t.measure.total_mass() == doctest::Approx(2.0 * (10.0 - 1.0)).epsilon(1e-6));
  CHECK_THROWS_AS(truncate_small_jumps(inf, 0.0), DomainError);
}

TEST_CASE("large-jump split by U3") {
  const CoefficientSet m = preset("example_41");
  const NoiseRealization n = sample_noise(m, 5.0, 1.0 / 16.0, 3);
  const LargeJumpSplit all = split_large_jumps(n, SubSupport::everything());
  const LargeJumpSplit none = split_large_jumps(n, SubSupport::nothing());
  CHECK(all.outside.empty());
  CHECK(none.inside.empty());
  CHECK(all.inside.size() == none.outside.size());
}

TEST_CASE("noise dump lists increments and jumps") {
  const NoiseRealization n = sample_noise(preset("example_41"), 1.0, 0.25, 1);
  std::ostringstream s;
  write_noise_csv(s, n);
  CHECK(s.str().rfind("time,kind,value", 0) == 0);
}
