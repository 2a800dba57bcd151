#include "jsde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "jsde/error.hpp"
#include "jsde/format.hpp"

namespace jsde {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_path_seed(std::uint64_t master, std::uint64_t index) {
  return master ^ splitmix64(index ^ 0xD1B54A32D192ED03ULL);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return splitmix64(key_ + counter * 0x9E3779B97F4A7C15ULL);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> NoiseRealization::brownian_path() const {
  std::vector<double> w(brownian_increments.size() + 1, 0.0);
  for (std::size_t i = 0; i < brownian_increments.size(); ++i)
    w[i + 1] = w[i] + brownian_increments[i];
  return w;
}

namespace {

std::vector<double> make_grid(double horizon, double step) {
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  std::vector<double> grid(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) grid[i] = std::min(static_cast<double>(i) * step, horizon);
  grid.back() = horizon;
  return grid;
}

void poisson_events(const MarkMeasure& measure, JumpSource source, double horizon,
                    const CounterRng& rng, std::vector<JumpEvent>& out) {
  const double rate = measure.total_mass();
  if (!(rate > 0.0)) return;
  std::uint64_t counter = 0;
  double t = 0.0;
  while (true) {
    t += -std::log(rng.uniform(counter++)) / rate;
    const double u = rng.uniform(counter++);
    if (!(t < horizon)) break;
    out.push_back({t, measure.sample_mark(u), source});
  }
}

}  // namespace

NoiseRealization sample_noise(const CoefficientSet& model, double horizon, double base_step,
                              std::uint64_t seed) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive");
  if (!(base_step > 0.0) || base_step > horizon * (1.0 + 1e-12))
    throw DomainError("base step must satisfy 0 < h <= T");
  if (!model.nu1.has_finite_mass())
    throw DomainError("nu1 '" + model.nu1.label() +
                      "' has infinite mass; apply truncate_small_jumps before sampling");
  if (!model.nu2.has_finite_mass())
    throw DomainError("nu2 '" + model.nu2.label() + "' must have finite mass to be sampled");

  NoiseRealization noise;
  noise.horizon = horizon;
  noise.seed = seed;
  noise.compensator_rate = model.nu1.total_mass();
  noise.base_grid = make_grid(horizon, base_step);

  const CounterRng brownian(seed, stream::brownian);
  const std::size_t steps = noise.base_grid.size() - 1;
  noise.brownian_increments.resize(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double dt = noise.base_grid[i + 1] - noise.base_grid[i];
    noise.brownian_increments[i] = std::sqrt(dt) * brownian.normal(i);
  }

  poisson_events(model.nu1, JumpSource::small, horizon, CounterRng(seed, stream::small_jumps),
                 noise.jump_events);
  poisson_events(model.nu2, JumpSource::large, horizon, CounterRng(seed, stream::large_jumps),
                 noise.jump_events);
  std::stable_sort(noise.jump_events.begin(), noise.jump_events.end(),
                   [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });

  // Brownian bridge values at the event times, conditioned left to right
  // inside each base step.
  const CounterRng bridge(seed, stream::bridge);
  const std::vector<double> w = noise.brownian_path();
  noise.event_brownian.resize(noise.jump_events.size());
  std::size_t step = 0;
  double known_t = 0.0;
  double known_w = 0.0;
  for (std::size_t k = 0; k < noise.jump_events.size(); ++k) {
    const double tau = noise.jump_events[k].time;
    std::size_t s = step;
    while (s + 1 < noise.base_grid.size() - 1 && noise.base_grid[s + 1] <= tau) ++s;
    if (s != step || k == 0) {
      step = s;
      known_t = noise.base_grid[s];
      known_w = w[s];
    }
    const double right_t = noise.base_grid[s + 1];
    const double right_w = w[s + 1];
    const double span = right_t - known_t;
    double value = known_w;
    if (span > 0.0 && tau > known_t) {
      const double mean = known_w + (tau - known_t) / span * (right_w - known_w);
      const double var = (tau - known_t) * (right_t - tau) / span;
      value = mean + std::sqrt(std::max(var, 0.0)) * bridge.normal(k);
    }
    noise.event_brownian[k] = value;
    known_t = tau;
    known_w = value;
  }
  return noise;
}

NoiseRealization coarsen(const NoiseRealization& fine, int factor) {
  if (factor < 1) throw DomainError("coarsening factor must be >= 1");
  if (factor == 1) return fine;
  if (fine.steps() % static_cast<std::size_t>(factor) != 0)
    throw DomainError("coarsening factor must divide the number of base steps");
  NoiseRealization coarse = fine;
  const std::size_t steps = fine.steps() / factor;
  coarse.base_grid.resize(steps + 1);
  coarse.brownian_increments.assign(steps, 0.0);
  for (std::size_t i = 0; i <= steps; ++i) coarse.base_grid[i] = fine.base_grid[i * factor];
  for (std::size_t i = 0; i < steps; ++i)
    for (int j = 0; j < factor; ++j)
      coarse.brownian_increments[i] += fine.brownian_increments[i * factor + j];
  return coarse;
}

TruncatedMeasure truncate_small_jumps(const MarkMeasure& measure, double epsilon) {
  if (!(epsilon >= 0.0)) throw DomainError("truncation epsilon must be >= 0");
  if (epsilon == 0.0) {
    if (!measure.has_finite_mass())
      throw DomainError("epsilon = 0 leaves measure '" + measure.label() + "' with infinite mass");
    return {measure, measure.total_mass()};
  }
  const SubSupport retained = SubSupport::of(
      {Interval{-INFINITY, -epsilon, false, true}, Interval{epsilon, INFINITY, true, false}});
  MarkMeasure kept = measure.restricted_to(retained);
  if (!kept.has_finite_mass())
    throw DomainError("truncation at epsilon = " + std::to_string(epsilon) +
                      " still leaves infinite mass");
  const double rate = kept.total_mass();
  return {std::move(kept), rate};
}

CoefficientSet with_truncated_small_jumps(CoefficientSet model, double epsilon) {
  model.nu1 = truncate_small_jumps(model.nu1, epsilon).measure;
  return model;
}

LargeJumpSplit split_large_jumps(const NoiseRealization& noise, const SubSupport& u3) {
  LargeJumpSplit split;
  for (const JumpEvent& e : noise.jump_events) {
    if (e.source != JumpSource::large) continue;
    (u3.contains(e.mark) ? split.inside : split.outside).push_back(e);
  }
  return split;
}

void write_noise_csv(std::ostream& out, const NoiseRealization& noise) {
  out << "time,kind,value\n";
  std::size_t k = 0;
  for (std::size_t i = 0; i < noise.steps(); ++i) {
    while (k < noise.jump_events.size() && noise.jump_events[k].time < noise.base_grid[i]) {
      const JumpEvent& e = noise.jump_events[k++];
      out << format_real(e.time) << ','
          << (e.source == JumpSource::small ? "small_jump" : "large_jump") << ','
          << format_real(e.mark) << '\n';
    }
    out << format_real(noise.base_grid[i]) << ",brownian_increment,"
        << format_real(noise.brownian_increments[i]) << '\n';
  }
  for (; k < noise.jump_events.size(); ++k) {
    const JumpEvent& e = noise.jump_events[k];
    out << format_real(e.time) << ','
        << (e.source == JumpSource::small ? "small_jump" : "large_jump") << ','
        << format_real(e.mark) << '\n';
  }
}

}  // namespace jsde
