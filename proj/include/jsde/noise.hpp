#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "jsde/model.hpp"

namespace jsde {

enum class JumpSource { small, large };

struct JumpEvent {
  double time = 0.0;
  double mark = 0.0;
  JumpSource source = JumpSource::small;

  bool operator==(const JumpEvent&) const = default;
};

/// Stateless counter-based generator: draw k of stream s is a pure function
/// of (seed, s, k), so streams never perturb each other and any draw can be
/// regenerated in isolation.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t counter) const;
  /// Standard normal from counters 2k and 2k+1 (Box-Muller, cosine branch).
  double normal(std::uint64_t counter) const;

 private:
  std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Per-path seed: master XOR a hash of the path index.
std::uint64_t derive_path_seed(std::uint64_t master, std::uint64_t index);

namespace stream {
inline constexpr std::uint64_t brownian = 0;
inline constexpr std::uint64_t small_jumps = 1;
inline constexpr std::uint64_t large_jumps = 2;
inline constexpr std::uint64_t bridge = 3;
}  // namespace stream

/// One realization of the driving noise on [0, horizon]. Brownian motion is
/// stored as increments over the base grid plus its value at every jump time
/// (drawn from the Brownian bridge), so a jump-adapted scheme can split steps
/// without further randomness.
struct NoiseRealization {
  double horizon = 0.0;
  std::vector<double> base_grid;
  std::vector<double> brownian_increments;
  std::vector<JumpEvent> jump_events;
  std::vector<double> event_brownian;  // W(time) for each jump event
  double compensator_rate = 0.0;
  std::uint64_t seed = 0;

  std::size_t steps() const { return brownian_increments.size(); }
  double base_step() const { return base_grid.size() > 1 ? base_grid[1] - base_grid[0] : horizon; }
  /// W at every base-grid node (prefix sums, W(0) = 0).
  std::vector<double> brownian_path() const;

  bool operator==(const NoiseRealization&) const = default;
};

/// Draws Brownian increments (variance = step) and Poisson events for nu1
/// and nu2 (rate = total mass, marks by inverse CDF). nu1 must have finite
/// mass; truncate it first otherwise.
NoiseRealization sample_noise(const CoefficientSet& model, double horizon, double base_step,
                              std::uint64_t seed);

/// Aggregates `factor` consecutive base steps into one. Jump events and their
/// Brownian values are shared, so coarse and fine paths see one Brownian motion.
NoiseRealization coarsen(const NoiseRealization& fine, int factor);

struct TruncatedMeasure {
  MarkMeasure measure;
  double compensator_rate = 0.0;
};

/// Restriction of `measure` to |u| >= epsilon. epsilon = 0 is accepted only
/// for a measure that already has finite mass.
TruncatedMeasure truncate_small_jumps(const MarkMeasure& measure, double epsilon);

/// The model with nu1 replaced by its epsilon-truncation.
CoefficientSet with_truncated_small_jumps(CoefficientSet model, double epsilon);

struct LargeJumpSplit {
  std::vector<JumpEvent> inside;
  std::vector<JumpEvent> outside;
};

/// Partitions the large-jump events by mark membership in u3.
LargeJumpSplit split_large_jumps(const NoiseRealization& noise, const SubSupport& u3);

/// CSV dump: time,kind,value with kind in {brownian_increment, small_jump,
/// large_jump}; Brownian rows are stamped with the start of their step.
void write_noise_csv(std::ostream& out, const NoiseRealization& noise);

}  // namespace jsde
