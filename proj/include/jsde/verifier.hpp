#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jsde/model.hpp"
#include "json.hpp"

namespace jsde {

// Grid-based checkers for the standing assumptions on a coefficient set.
// Universally quantified conditions are sampled, so a checker can only
// falsify: `no_violation_found` means nothing failed on the documented grid.
//
//   A22  concavity modulus: positive, non-decreasing, concave, int_0+ 1/rho = inf
//   A23  growth: 2xb + sigma^2 + int c1^2 nu1 + 2 int_U3 c2^2 nu2 <= mu (x^2 Y(x^2) + 1)
//   A24  local non-Lipschitz conditions with exponent alpha on 0 < |x-y| <= delta0
//   A25  the alpha = 1 corollary conditions with moduli rho1, rho2
//   A26  global non-confluence conditions and the jump separation condition

enum class AssumptionId { A22, A23, A24, A25, A26 };
enum class Verdict { no_violation_found, violated };

std::string to_string(AssumptionId id);
std::string to_string(Verdict verdict);
AssumptionId parse_assumption(std::string_view text);

/// One sampled instance of `lhs <= rhs`; slack = lhs - rhs. The instance
/// violates the condition when slack > threshold = abs_tol + rel_tol * |rhs|.
struct Witness {
  std::string condition;
  nlohmann::json inputs;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double threshold = 0.0;

  double excess() const { return slack - threshold; }
};

struct ConditionResult {
  std::string name;
  Verdict verdict = Verdict::no_violation_found;
  std::optional<Witness> worst;
  std::size_t samples = 0;
  // Advisory results are reported but do not enter the overall verdict.
  bool advisory = false;
  std::string note;
};

struct AssumptionReport {
  AssumptionId assumption_id = AssumptionId::A22;
  Verdict verdict = Verdict::no_violation_found;
  std::optional<Witness> worst_witness;
  std::string grid_spec;
  double abs_tolerance = 1e-9;
  double rel_tolerance = 1e-9;
  std::vector<ConditionResult> conditions;
};

nlohmann::json to_json(const Witness& witness);
nlohmann::json to_json(const AssumptionReport& report);

/// Sampling grid. Pairs are (x, x + g) and (x, x - g) for every anchor x and
/// gap g, plus a few corner pairs around 0.
struct GridSpec {
  double x_lo = -10.0;
  double x_hi = 10.0;
  int anchors = 101;
  int gaps = 401;
  double gap_lo = 1e-6;
  double gap_hi = NAN;  // NaN: delta0 for local checks, 10 for global ones
  int marks = 101;
  // Extra far-field anchors for the growth check.
  std::vector<double> tail = {-1e3, -1e2, 1e2, 1e3};
  // Keep only pairs with both points in [x_lo, x_hi].
  bool pairs_within_range = false;
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;

  std::string describe() const;
};

struct ModulusGrid {
  double lo = 1e-12;
  double hi = NAN;  // NaN: min(domain_upper, 10)
  int points = 401;
  // Decades probed by the divergence certificate below the base point.
  int decades = 12;
};

AssumptionReport check_modulus(const Modulus& modulus, const ModulusGrid& grid = {});

AssumptionReport check_growth(const CoefficientSet& model, const GrowthFunction& upsilon,
                              double mu, const GridSpec& grid = {});

/// Left side of the growth condition at x.
double growth_lhs(const CoefficientSet& model, double x);
/// sup over the growth grid of lhs / (x^2 Y(x^2) + 1): the smallest mu that passes.
double growth_ratio_supremum(const CoefficientSet& model, const GrowthFunction& upsilon,
                             const GridSpec& grid = {});

/// alpha = 0 is checked in Lipschitz form with rho as modulus of |x - y|:
/// max{(x-y)(b(x)-b(y)), |sigma(x)-sigma(y)|^2} <= |x-y| rho(|x-y|) and
/// int |c_i(x,u) - c_i(y,u)|^2 <= |x-y| rho(|x-y|).
AssumptionReport check_local_conditions(const CoefficientSet& model, const Modulus& modulus,
                                        double alpha, double delta0, const GridSpec& grid = {});

AssumptionReport check_corollary_conditions(const CoefficientSet& model, const Modulus& rho1,
                                            const Modulus& rho2, double delta0,
                                            const GridSpec& grid = {});

AssumptionReport check_nonconfluence_conditions(const CoefficientSet& model,
                                                const Modulus& modulus, double alpha,
                                                double delta, const GridSpec& grid = {});

/// The checker configuration under which a preset is claimed to satisfy an
/// assumption (modulus choices, constants, grid).
struct VerificationProfile {
  AssumptionId assumption = AssumptionId::A22;
  std::string modulus = "identity";
  double modulus_scale = 1.0;
  std::string modulus2 = "identity";
  double modulus2_scale = 1.0;
  std::string growth = "one";
  std::optional<double> mu;  // unset: grid supremum
  double alpha = 1.0;
  double delta = 1.0;  // delta0 for A24/A25, delta for A26
  GridSpec grid;
};

/// Designated assumption profiles of a preset (empty for presets without claims).
std::vector<VerificationProfile> designated_profiles(std::string_view preset_name);
std::optional<VerificationProfile> designated_profile(std::string_view preset_name,
                                                      AssumptionId id);

/// Runs the checker selected by profile.assumption on the model.
AssumptionReport run_profile(const CoefficientSet& model, const VerificationProfile& profile);

}  // namespace jsde
