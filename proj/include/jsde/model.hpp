#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jsde/numerics.hpp"

namespace jsde {

using JumpFn = std::function<double(double state, double mark)>;

// Real interval of marks; open/closed ends only matter for atom membership.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = true;

  bool contains(double u) const {
    return (lo_closed ? u >= lo : u > lo) && (hi_closed ? u <= hi : u < hi);
  }
  double length() const { return hi > lo ? hi - lo : 0.0; }
};

// Measurable subset of the mark line: everything, or a finite union of
// intervals. Used for U3 and for truncation regions.
class SubSupport {
 public:
  static SubSupport everything();
  static SubSupport nothing();
  static SubSupport of(std::vector<Interval> pieces);

  bool contains(double u) const;
  bool is_everything() const { return everything_; }
  bool is_empty() const { return !everything_ && pieces_.empty(); }
  const std::vector<Interval>& pieces() const { return pieces_; }
  std::string describe() const;

 private:
  bool everything_ = false;
  std::vector<Interval> pieces_;
};

struct Atom {
  double mark = 0.0;
  double weight = 0.0;
};

// One cell of a mark grid: representative mark and the measure it carries.
struct MarkCell {
  double mark = 0.0;
  double mass = 0.0;
};

/// Characteristic measure of a Poisson random measure on the real mark line,
/// either a finite set of weighted atoms or a density on a union of
/// intervals. A density whose mass quadrature does not converge is flagged
/// as infinite and cannot be sampled until truncated.
class MarkMeasure {
 public:
  enum class Form { atoms, density };

  MarkMeasure();  // the zero measure

  static MarkMeasure from_atoms(std::vector<Atom> atoms, std::string label);
  static MarkMeasure from_density(std::vector<Interval> pieces, RealFn density,
                                  std::string label);
  static MarkMeasure lebesgue(double lo, double hi, std::string label);

  Form form() const { return form_; }
  const std::string& label() const { return label_; }
  double total_mass() const { return total_mass_; }
  bool has_finite_mass() const { return std::isfinite(total_mass_); }
  bool is_zero() const { return total_mass_ == 0.0; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Interval>& pieces() const { return pieces_; }
  const RealFn& density() const { return density_; }

  /// Integral of g against the measure. Density pieces are split at u = 0,
  /// where coefficients built from |u| have a kink. Throws QuadratureError
  /// if adaptive quadrature does not converge.
  double integrate(const RealFn& g, const QuadratureOptions& options = {}) const;
  QuadratureResult integrate_detailed(const RealFn& g,
                                      const QuadratureOptions& options = {}) const;

  MarkMeasure restricted_to(const SubSupport& region) const;
  MarkMeasure excluding(const SubSupport& region) const;

  /// Inverse-CDF draw from the normalized measure; `uniform` in (0, 1).
  double sample_mark(double uniform) const;

  /// `count` equal-width cells across the density support (or every atom)
  /// with the mass each cell carries.
  std::vector<MarkCell> mark_grid(int count) const;

 private:
  struct CdfTable {
    std::vector<double> piece_cumulative;  // mass up to the end of piece i
    std::vector<std::vector<double>> cell_cumulative;
  };

  void build_cdf();

  Form form_ = Form::atoms;
  std::string label_;
  std::vector<Atom> atoms_;
  std::vector<Interval> pieces_;
  RealFn density_;
  double total_mass_ = 0.0;
  std::shared_ptr<const CdfTable> cdf_;
};

/// The coefficient data of one JSDE instance
///   dX = b(X) dt + sigma(X) dB + int c1(X-, u) N1~(dt, du) + int c2(X-, u) N2(dt, du)
/// with N1 compensated over nu1 and N2 uncompensated over nu2.
struct CoefficientSet {
  std::string label;
  RealFn b;
  RealFn sigma;
  JumpFn c1;
  JumpFn c2;
  MarkMeasure nu1;
  MarkMeasure nu2;
  // Large jumps inside u3 enter the reduced equation; nu2 outside u3 must be finite.
  SubSupport u3 = SubSupport::everything();
  // Drift grows faster than linearly; the scheme tames it by default.
  bool superlinear_drift = false;
  // Set when c_i(x, u) = k_i(u) * x; enables the exact separation test.
  std::optional<RealFn> c1_slope;
  std::optional<RealFn> c2_slope;

  /// nu2 restricted to u3.
  MarkMeasure nu3() const { return nu2.restricted_to(u3); }
};

/// Checks the structural invariants of a coefficient set (finite nu2 mass
/// outside u3, callable coefficients). Throws DomainError.
void validate(const CoefficientSet& model);

struct ClosedFormOmega {
  // Omega(t) = int_{base}^{t} ds / rho(s) and its inverse.
  std::function<double(double t, double base)> forward;
  std::function<double(double y, double base)> inverse;
};

/// Concavity modulus rho. `ratio_at_log(u)` returns rho(e^u) / e^u and must
/// stay accurate for u far below the double range of e^u; the analysis
/// module works in log coordinates through it.
struct Modulus {
  std::string label;
  RealFn rho;
  RealFn ratio_at_log;
  double domain_upper = INFINITY;  // closed form valid on (0, domain_upper]
  bool concave = true;
  std::optional<ClosedFormOmega> closed_form_omega;

  double operator()(double x) const { return rho(x); }
  double ratio_at(double log_x) const;
};

struct GrowthFunction {
  std::string label;
  RealFn upsilon;
  RealFn upsilon_prime;
  // Points where the left extension meets the closed form (derivative jumps).
  std::vector<double> kinks;

  double operator()(double x) const { return upsilon(x); }
};

/// identity | neg_x_log_x | x_log_log | one_minus_x_pow_x
Modulus builtin_modulus(std::string_view key);
std::vector<std::string> modulus_catalog();

/// one | log | log_loglog
GrowthFunction builtin_growth(std::string_view key);
std::vector<std::string> growth_catalog();

/// factor * rho; keeps the closed-form Omega when there is one.
Modulus scaled_modulus(const Modulus& base, double factor);

/// rho(x) = x^p. Not a catalog entry: divergent only for p >= 1.
Modulus power_modulus(double exponent);

/// gamma with gamma^2 * int u^2 nu1(du) = 1.
double calibrate_jump_scale(const MarkMeasure& nu1);

CoefficientSet preset_example_31();
CoefficientSet preset_example_41();
CoefficientSet zero_model();

/// Named presets: example_31, example_41, zero, plus jump-free control
/// models (constant_drift, contraction, ou_toy, linear, linear_dissipative).
CoefficientSet preset(std::string_view name);
std::vector<std::string> preset_catalog();

// Catalog lookup failure message listing the valid keys.
std::string catalog_message(std::string_view what, std::string_view key,
                            const std::vector<std::string>& valid);

}  // namespace jsde
