#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "jsde/model.hpp"
#include "jsde/noise.hpp"

namespace jsde {

enum class Taming { off, drift_tamed };

struct SchemeConfig {
  double base_step = 1.0 / 256.0;
  double explosion_radius = 1e6;
  Taming taming = Taming::off;
  // Skip large jumps whose mark lies outside u3 (the reduced equation).
  bool restrict_to_u3 = false;
};

/// Taming on for presets flagged with super-linear drift, off otherwise.
SchemeConfig default_scheme(const CoefficientSet& model, double base_step,
                            double explosion_radius = 1e6);

enum class PointKind { grid, small_jump, large_jump };

/// Simulated trajectory on the jump-adapted grid. At a jump time the stored
/// state is the post-jump value X(s) and `left_limits` holds X(s-); at grid
/// points both coincide.
struct PathResult {
  std::vector<double> times;
  std::vector<double> states;
  std::vector<double> left_limits;
  std::vector<PointKind> kinds;
  std::vector<double> marks;     // NaN at grid points
  std::vector<double> brownian;  // W at each time, read from the realization
  bool exploded = false;
  std::optional<double> exit_time;
  std::uint64_t realization_seed = 0;
  Taming taming = Taming::off;
  // Brownian increments plus jump events read from the realization.
  std::size_t noise_reads = 0;

  double final_state() const { return states.back(); }
};

/// Jump-adapted Euler scheme. Between grid points
///   X += b(X) dt + sigma(X) dW - (int c1(X, u) nu1(du)) dt
/// (b dt replaced by b dt / (1 + |b| dt) when tamed); at an event the
/// continuous part is advanced up to the event time first and the jump
/// c1 or c2 evaluated at that left limit is added. Stops at the first
/// |X| >= explosion_radius.
PathResult simulate(const CoefficientSet& model, const NoiseRealization& noise,
                    const SchemeConfig& scheme, double x0);

/// Earliest grid time with |X| >= radius.
std::optional<double> first_exit_time(const PathResult& path, double radius);

struct ItoFunction {
  RealFn f;
  RealFn df;
  RealFn d2f;
};

/// Integrates the Ito-Levy expansion of Y = f(X) term by term on the path's
/// grid: f'(X) times the scheme's drift increment, f' sigma dW, 1/2 sigma^2
/// f'' dt, the compensated small-jump correction
/// int {f(X + c1) - f(X) - f'(X) c1} nu1(du) dt minus the compensator of the
/// small-jump term, and f(X- + c) - f(X-) at every jump. Used to test path
/// consistency against f applied pointwise.
PathResult ito_levy_apply(const ItoFunction& f, const PathResult& path,
                          const CoefficientSet& model, const NoiseRealization& noise);

/// CSV with a `# label=... seed=... h=... R=...` header line followed by
/// time,state,event_kind rows; the exit point (if any) is tagged `exit`.
void write_path_csv(std::ostream& out, const PathResult& path, std::string_view label,
                    double base_step, double radius);

}  // namespace jsde
