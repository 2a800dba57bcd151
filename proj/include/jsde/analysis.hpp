#pragma once

#include <span>
#include <vector>

#include "jsde/model.hpp"
#include "json.hpp"

namespace jsde {

// Most quantities below are computed in the logarithm u = ln x of their
// argument. For the logarithmic moduli the interesting points (a_n for
// n >= 4, say) lie far below the smallest positive double, while ln x is
// still an ordinary number. Integrals over u use the stretched coordinate
//   zeta(u) = u              for u >= -1
//   zeta(u) = -1 - ln(-u)    for u <  -1
// which is monotone, C^1, and turns decades of decades into a bounded range.

double stretch_log(double log_x);
double unstretch_log(double zeta);

/// int_{e^log_lo}^{e^log_hi} ds / rho(s), signed.
QuadratureResult integrate_reciprocal_modulus(const Modulus& modulus, double log_lo,
                                              double log_hi);

/// Omega(t) = int_{base}^{t} ds / rho(s) with a fixed base point; the lower
/// limit 0 is replaced by `base` because the integral diverges there for
/// every admissible modulus. Bounds built from Omega are base-independent.
class OmegaTransform {
 public:
  static constexpr double kDefaultLogMin = -700.0;
  static constexpr double kDefaultLogMax = 60.0;

  OmegaTransform(Modulus modulus, double base_point, double log_min = kDefaultLogMin,
                 double log_max = kDefaultLogMax);

  const Modulus& modulus() const { return modulus_; }
  double base_point() const { return base_point_; }

  double forward(double t) const;
  double forward_at_log(double log_t) const;
  /// Throws RangeError when y lies outside the tabulated range.
  double inverse(double y) const;
  double inverse_log(double y) const;

  double range_low() const { return table_.front(); }
  double range_high() const { return table_.back(); }
  double table_error() const { return table_error_; }

 private:
  double table_value(double zeta) const;

  Modulus modulus_;
  double base_point_;
  double log_base_;
  std::vector<double> nodes_;  // zeta
  std::vector<double> table_;  // Omega at the nodes
  double table_error_ = 0.0;
};

struct BihariBound {
  double bound = 0.0;
  double omega_of_f = 0.0;
  double integral_of_g = 0.0;
  double quadrature_error = 0.0;
};

struct zero_forcing_t {
  explicit zero_forcing_t() = default;
};
inline constexpr zero_forcing_t zero_forcing{};

/// u(t) <= f(t) + int_0^t g(s) rho(u(s)) ds  implies
/// u(t) <= Omega^{-1}(Omega(f(t)) + int_0^t g(s) ds).
/// `g_breakpoints` marks discontinuities of g for the quadrature.
BihariBound bihari_bound(const OmegaTransform& omega, const RealFn& f, const RealFn& g,
                         double t, std::span<const double> g_breakpoints = {});

/// The f = 0 case: the inequality forces u(t) = 0.
BihariBound bihari_bound(const OmegaTransform& omega, zero_forcing_t, const RealFn& g,
                         double t, std::span<const double> g_breakpoints = {});

/// {modulus, base_point, inputs, bound, quadrature_error_estimate}
nlohmann::json bound_record(const OmegaTransform& omega, const nlohmann::json& inputs,
                            const BihariBound& result);

/// phi(x) = exp(int_0^x ds / (s Upsilon(s) + 1)).
class PhiFunction {
 public:
  explicit PhiFunction(GrowthFunction upsilon);

  double operator()(double x) const;
  double log_value(double x) const;
  double inverse(double y) const;
  const GrowthFunction& growth() const { return upsilon_; }

 private:
  GrowthFunction upsilon_;
};

double phi_growth(const GrowthFunction& upsilon, double x);

/// phi(E|X0|^2) * exp(mu (M + 1) t): bound on E[phi(X^2(t ^ tau_R))], where
/// M bounds nu2(U3).
double moment_bound(const GrowthFunction& upsilon, double mu, double M, double second_moment_x0,
                    double t);

/// phi^{-1}(bound): the bound expressed on the X^2 scale.
double implied_second_moment_bound(const GrowthFunction& upsilon, double bound);

/// a_0 = 1 > a_1 > ... with int_{a_n}^{a_{n-1}} dr / rho(r) = n, stored as ln a_n.
struct ASequence {
  std::vector<double> log_values;

  double value(std::size_t n) const;
  std::size_t size() const { return log_values.size(); }
};

ASequence a_sequence(const Modulus& modulus, int n_max);

/// The smooth approximations psi_n of |r| used for pathwise uniqueness.
///
/// rho_n is built in the mass coordinate m(r) = (1/n) int_{a_n}^{r} ds / rho(s),
/// which runs from 0 at a_n to 1 at a_{n-1}:
///   rho_n(r) dr = kappa * s(m) dm,   i.e.   rho_n(r) = kappa * s(m(r)) / (n rho(r)),
/// with s a C^1 cutoff that is 1 in the middle and ramps to 0 over a fraction
/// eta of [0, 1] at each end, and kappa = 1 / (1 - eta) normalizing the mass.
/// Then 0 <= rho_n <= kappa / (n rho) <= 2 / (n rho), int rho_n = 1, and
/// psi_n'(r) = int_0^r rho_n has the closed form kappa * S(m(r)).
class PsiFamily {
 public:
  static constexpr double kRampFraction = 0.1;

  PsiFamily(const Modulus& modulus, int n);
  PsiFamily(const Modulus& modulus, const ASequence& sequence, int n);

  int index() const { return n_; }
  const Modulus& modulus() const { return modulus_; }
  double log_a_n() const { return log_lo_; }
  double log_a_prev() const { return log_hi_; }

  /// Mass coordinate in [0, 1] at r = e^log_r.
  double mass_at_log(double log_r) const;

  double psi(double r) const;
  double psi_at_log(double log_r) const;
  double psi_prime(double r) const;
  double psi_prime_at_log(double log_r) const;
  /// psi_n''(r) = rho_n(|r|); may overflow for r below the double range.
  double psi_second(double r) const;
  /// psi_n''(r) * rho(r) = kappa s(m) / n, finite at any log r.
  double psi_second_times_rho_at_log(double log_r) const;
  double rho_n(double r) const { return psi_second(r); }

 private:
  void build();
  double cutoff(double m) const;
  double cutoff_integral(double m) const;  // kappa * int_0^m s
  double zeta_mass(double zeta) const;
  double zeta_psi(double zeta) const;

  Modulus modulus_;
  int n_;
  double log_lo_;
  double log_hi_;
  std::vector<double> nodes_;
  std::vector<double> mass_table_;
  double mass_total_ = 1.0;
  std::vector<double> psi_table_;
};

/// p(alpha) = |alpha(alpha - 1)| / 2 + |alpha| + alpha (2^alpha + 3) + 2.
double p_alpha(double alpha);

struct NonconfluenceConstants {
  double K = 0.0;
  double K_prime = 0.0;
  double K1 = 0.0;
  double K2 = 0.0;
};

NonconfluenceConstants nonconfluence_constants(double alpha, double delta, double M);

/// rho_0(x) = K1 x + K2 rho(x).
Modulus rho0_modulus(const Modulus& rho, const NonconfluenceConstants& constants);

struct RPair {
  double x = 0.0;
  double y = 0.0;
};

struct RInequalityResult {
  // max over samples of (LHS - RHS) / max(1, |RHS|)
  double worst_slack = -INFINITY;
  std::size_t worst_index = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// For R(x) = |x|^-alpha checks
///   R(x+y) - R(x) - R'(x) y <= K (|x|^alpha + |x|^(alpha-1) |y|) / |x|^(2 alpha)
/// with K = (1 + 2 alpha) / delta^alpha on pairs with x != 0, |x+y| >= delta |x|.
RInequalityResult r_inequality_check(double alpha, double delta, std::span<const RPair> samples);

}  // namespace jsde
