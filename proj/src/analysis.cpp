#include "jsde/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "jsde/error.hpp"
#include "jsde/format.hpp"

namespace jsde {
namespace {

constexpr QuadratureOptions kTight{1e-14, 1e-13, 4000};
constexpr int kOmegaPanels = 512;
constexpr int kPsiPanels = 256;
// ln of the smallest argument the a-sequence may reach before the modulus is
// declared non-divergent.
constexpr double kLogFloor = -1e300;

// du/dzeta
double log_speed(double zeta) { return zeta >= -1.0 ? 1.0 : std::exp(-1.0 - zeta); }

// d/dzeta of int ds / rho(s), i.e. u'(zeta) / (rho(e^u) / e^u).
double reciprocal_density(const Modulus& modulus, double zeta) {
  const double u = unstretch_log(zeta);
  const double h = modulus.ratio_at(u);
  if (!(h > 0.0) || !std::isfinite(h))
    throw DomainError("modulus '" + modulus.label + "' is not positive at x = exp(" +
                      format_real(u) + ")");
  return log_speed(zeta) / h;
}

std::vector<double> zeta_breakpoints(const Modulus& modulus) {
  std::vector<double> points{-1.0};
  if (std::isfinite(modulus.domain_upper) && modulus.domain_upper > 0.0)
    points.push_back(stretch_log(std::log(modulus.domain_upper)));
  std::sort(points.begin(), points.end());
  return points;
}

QuadratureResult integrate_zeta(const Modulus& modulus, double z_lo, double z_hi) {
  const std::vector<double> breaks = zeta_breakpoints(modulus);
  return integrate([&](double z) { return reciprocal_density(modulus, z); }, z_lo, z_hi, breaks,
                   kTight);
}

std::vector<double> uniform_nodes(double lo, double hi, int panels) {
  std::vector<double> nodes(panels + 1);
  for (int j = 0; j <= panels; ++j) nodes[j] = lo + (hi - lo) * j / panels;
  nodes.back() = hi;
  return nodes;
}

std::size_t panel_of(const std::vector<double>& nodes, double z) {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), z);
  std::size_t j = it == nodes.begin() ? 0 : static_cast<std::size_t>(it - nodes.begin()) - 1;
  return std::min(j, nodes.size() - 2);
}

}  // namespace

double stretch_log(double log_x) { return log_x >= -1.0 ? log_x : -1.0 - std::log(-log_x); }

double unstretch_log(double zeta) { return zeta >= -1.0 ? zeta : -std::exp(-1.0 - zeta); }

QuadratureResult integrate_reciprocal_modulus(const Modulus& modulus, double log_lo,
                                              double log_hi) {
  return integrate_zeta(modulus, stretch_log(log_lo), stretch_log(log_hi));
}

// ---------------------------------------------------------------------------

OmegaTransform::OmegaTransform(Modulus modulus, double base_point, double log_min, double log_max)
    : modulus_(std::move(modulus)), base_point_(base_point) {
  if (!(base_point > 0.0) || !std::isfinite(base_point))
    throw DomainError("Omega base point must be positive and finite");
  if (!(log_min < log_max)) throw DomainError("Omega table range is empty");
  if (!modulus_.ratio_at_log && !modulus_.rho)
    throw DomainError("modulus '" + modulus_.label + "' has no evaluator");
  log_base_ = std::log(base_point);
  if (log_base_ < log_min || log_base_ > log_max)
    throw DomainError("Omega base point lies outside the tabulated range");

  nodes_ = uniform_nodes(stretch_log(log_min), stretch_log(log_max), kOmegaPanels);
  for (double z : nodes_) {
    const double h = modulus_.ratio_at(unstretch_log(z));
    if (!(h > 0.0) || !std::isfinite(h))
      throw DomainError("Omega undefined: modulus '" + modulus_.label +
                        "' vanishes or is not finite at x = exp(" +
                        format_real(unstretch_log(z)) + ")");
  }
  table_.assign(nodes_.size(), 0.0);
  for (std::size_t j = 1; j < nodes_.size(); ++j) {
    const QuadratureResult q = integrate_zeta(modulus_, nodes_[j - 1], nodes_[j]);
    if (!q.converged)
      throw QuadratureError("Omega table quadrature did not converge for '" + modulus_.label + "'");
    table_[j] = table_[j - 1] + q.value;
    table_error_ += q.error;
  }
  const double offset = table_value(stretch_log(log_base_));
  for (double& v : table_) v -= offset;
}

double OmegaTransform::table_value(double zeta) const {
  const std::size_t j = panel_of(nodes_, zeta);
  return table_[j] + integrate_zeta(modulus_, nodes_[j], zeta).value;
}

double OmegaTransform::forward_at_log(double log_t) const {
  if (std::isnan(log_t)) throw DomainError("Omega argument is NaN");
  const double t = std::exp(log_t);
  if (modulus_.closed_form_omega && t > 0.0 && std::isfinite(t) && t <= modulus_.domain_upper &&
      base_point_ <= modulus_.domain_upper)
    return modulus_.closed_form_omega->forward(t, base_point_);
  const double z = stretch_log(log_t);
  if (z >= nodes_.front() && z <= nodes_.back()) return table_value(z);
  return integrate_zeta(modulus_, stretch_log(log_base_), z).value;
}

double OmegaTransform::forward(double t) const {
  if (!(t > 0.0)) throw DomainError("Omega is defined for t > 0 only, got " + format_real(t));
  return forward_at_log(std::log(t));
}

double OmegaTransform::inverse_log(double y) const {
  if (std::isnan(y)) throw DomainError("Omega inverse argument is NaN");
  if (modulus_.closed_form_omega && base_point_ <= modulus_.domain_upper) {
    const double t = modulus_.closed_form_omega->inverse(y, base_point_);
    if (t > 0.0 && std::isfinite(t) && t <= modulus_.domain_upper) return std::log(t);
  }
  if (y < table_.front() || y > table_.back())
    throw RangeError("Omega inverse argument " + format_real(y) + " outside tabulated range [" +
                     format_real(table_.front()) + ", " + format_real(table_.back()) +
                     "] for modulus '" + modulus_.label + "'; widen the table");
  auto it = std::upper_bound(table_.begin(), table_.end(), y);
  std::size_t j = it == table_.begin() ? 0 : static_cast<std::size_t>(it - table_.begin()) - 1;
  j = std::min(j, table_.size() - 2);
  const double z0 = nodes_[j];
  const double base = table_[j];
  const double z = bisect(
      [&](double zz) { return base + integrate_zeta(modulus_, z0, zz).value - y; }, z0,
      nodes_[j + 1], 4e-15 * std::max(1.0, std::abs(z0)), 0.0, 200);
  return unstretch_log(z);
}

double OmegaTransform::inverse(double y) const { return std::exp(inverse_log(y)); }

// ---------------------------------------------------------------------------

namespace {

QuadratureResult integrate_g(const RealFn& g, double t, std::span<const double> breaks) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("Bihari horizon t must be >= 0");
  if (!g) throw DomainError("Bihari bound needs g");
  if (t == 0.0) return {};
  const QuadratureResult q = integrate(
      [&](double s) {
        const double v = g(s);
        if (!(v >= 0.0) || !std::isfinite(v))
          throw DomainError("g must be non-negative and finite, g(" + format_real(s) +
                            ") = " + format_real(v));
        return v;
      },
      0.0, t, breaks, QuadratureOptions{1e-13, 1e-12, 4000});
  if (!q.converged) throw QuadratureError("integral of g over [0, t] did not converge");
  return q;
}

}  // namespace

BihariBound bihari_bound(const OmegaTransform& omega, const RealFn& f, const RealFn& g, double t,
                         std::span<const double> g_breakpoints) {
  if (!f) throw DomainError("Bihari bound needs f");
  const double ft = f(t);
  if (!(ft > 0.0) || !std::isfinite(ft))
    throw DomainError("f(t) must be positive and finite (got " + format_real(ft) +
                      "); use the zero-forcing form for f = 0");
  const QuadratureResult gi = integrate_g(g, t, g_breakpoints);
  BihariBound out;
  out.omega_of_f = omega.forward(ft);
  out.integral_of_g = gi.value;
  out.bound = omega.inverse(out.omega_of_f + gi.value);
  out.quadrature_error = gi.error + omega.table_error();
  return out;
}

BihariBound bihari_bound(const OmegaTransform& omega, zero_forcing_t, const RealFn& g, double t,
                         std::span<const double> g_breakpoints) {
  (void)omega;
  const QuadratureResult gi = integrate_g(g, t, g_breakpoints);
  BihariBound out;
  out.omega_of_f = -INFINITY;
  out.integral_of_g = gi.value;
  out.bound = 0.0;
  out.quadrature_error = gi.error;
  return out;
}

nlohmann::json bound_record(const OmegaTransform& omega, const nlohmann::json& inputs,
                            const BihariBound& result) {
  return nlohmann::json{{"modulus", omega.modulus().label},
                        {"base_point", omega.base_point()},
                        {"inputs", inputs},
                        {"bound", result.bound},
                        {"quadrature_error_estimate", result.quadrature_error}};
}

// ---------------------------------------------------------------------------

PhiFunction::PhiFunction(GrowthFunction upsilon) : upsilon_(std::move(upsilon)) {
  if (!upsilon_.upsilon) throw DomainError("growth function has no evaluator");
}

double PhiFunction::log_value(double x) const {
  if (!(x >= 0.0)) throw DomainError("phi is defined for x >= 0, got " + format_real(x));
  if (x == 0.0) return 0.0;
  auto density = [&](double s) {
    const double v = upsilon_.upsilon(s);
    if (!(v >= 0.0) || !std::isfinite(v))
      throw DomainError("growth function '" + upsilon_.label + "' invalid at " + format_real(s));
    return 1.0 / (s * v + 1.0);
  };
  std::vector<double> low_breaks, high_breaks;
  for (double k : upsilon_.kinks) {
    if (k > 0.0 && k < 1.0) low_breaks.push_back(k);
    if (k > 1.0) high_breaks.push_back(std::log(k));
  }
  std::sort(low_breaks.begin(), low_breaks.end());
  std::sort(high_breaks.begin(), high_breaks.end());
  QuadratureResult q = integrate(density, 0.0, std::min(x, 1.0), low_breaks, kTight);
  double total = q.value;
  bool ok = q.converged;
  if (x > 1.0) {
    q = integrate(
        [&](double v) {
          const double s = std::exp(v);
          return s * density(s);
        },
        0.0, std::log(x), high_breaks, kTight);
    total += q.value;
    ok = ok && q.converged;
  }
  if (!ok) throw QuadratureError("phi quadrature did not converge at x = " + format_real(x));
  return total;
}

double PhiFunction::operator()(double x) const { return std::exp(log_value(x)); }

double PhiFunction::inverse(double y) const {
  if (!(y >= 1.0) || !std::isfinite(y))
    throw DomainError("phi inverse needs a finite argument >= 1, got " + format_real(y));
  const double target = std::log(y);
  if (target == 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (log_value(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw RangeError("phi inverse exceeds the double range");
  }
  return bisect([&](double x) { return log_value(x) - target; }, lo, hi, 1e-14 * hi, 0.0, 200);
}

double phi_growth(const GrowthFunction& upsilon, double x) { return PhiFunction(upsilon)(x); }

double moment_bound(const GrowthFunction& upsilon, double mu, double M, double second_moment_x0,
                    double t) {
  if (!(mu >= 0.0) || !(M >= 0.0) || !(second_moment_x0 >= 0.0) || !(t >= 0.0))
    throw DomainError("moment bound needs mu, M, E|X0|^2 and t all >= 0");
  return phi_growth(upsilon, second_moment_x0) * std::exp(mu * (M + 1.0) * t);
}

double implied_second_moment_bound(const GrowthFunction& upsilon, double bound) {
  return PhiFunction(upsilon).inverse(bound);
}

// ---------------------------------------------------------------------------

double ASequence::value(std::size_t n) const {
  if (n >= log_values.size()) throw RangeError("a-sequence index out of range");
  return std::exp(log_values[n]);
}

ASequence a_sequence(const Modulus& modulus, int n_max) {
  if (n_max < 0) throw DomainError("a-sequence length must be >= 0");
  const double z_floor = stretch_log(kLogFloor);
  ASequence seq;
  seq.log_values.push_back(0.0);
  for (int n = 1; n <= n_max; ++n) {
    const double target = n;
    const double z_prev = stretch_log(seq.log_values.back());
    double hi = z_prev;
    double acc = 0.0;
    double step = 0.5;
    double lo = hi;
    while (true) {
      lo = hi - step;
      if (lo < z_floor)
        throw DomainError("modulus '" + modulus.label +
                          "' is not divergent at 0 (int_0+ ds / rho(s) is finite); a_" +
                          std::to_string(n) + " does not exist");
      const double seg = integrate_zeta(modulus, lo, hi).value;
      if (acc + seg >= target) break;
      acc += seg;
      hi = lo;
      step *= 2.0;
    }
    const double top = hi;
    const double base = acc;
    const double z = bisect(
        [&](double zz) { return base + integrate_zeta(modulus, zz, top).value - target; }, lo, top,
        1e-14 * std::max(1.0, std::abs(lo)), 0.0, 200);
    seq.log_values.push_back(unstretch_log(z));
  }
  return seq;
}

// ---------------------------------------------------------------------------

PsiFamily::PsiFamily(const Modulus& modulus, int n)
    : PsiFamily(modulus, a_sequence(modulus, n), n) {}

PsiFamily::PsiFamily(const Modulus& modulus, const ASequence& sequence, int n)
    : modulus_(modulus), n_(n) {
  if (n < 1) throw DomainError("psi family index must be >= 1");
  if (sequence.size() <= static_cast<std::size_t>(n))
    throw DomainError("a-sequence too short for psi_" + std::to_string(n));
  log_lo_ = sequence.log_values[n];
  log_hi_ = sequence.log_values[n - 1];
  build();
}

void PsiFamily::build() {
  nodes_ = uniform_nodes(stretch_log(log_lo_), stretch_log(log_hi_), kPsiPanels);
  mass_table_.assign(nodes_.size(), 0.0);
  for (std::size_t j = 1; j < nodes_.size(); ++j)
    mass_table_[j] = mass_table_[j - 1] + integrate_zeta(modulus_, nodes_[j - 1], nodes_[j]).value;
  // Normalize so the mass coordinate reaches exactly 1 at a_{n-1}.
  mass_total_ = mass_table_.back();
  for (double& m : mass_table_) m /= mass_total_;

  psi_table_.assign(nodes_.size(), 0.0);
  auto integrand = [&](double z) {
    const double u = unstretch_log(z);
    return cutoff_integral(zeta_mass(z)) * std::exp(u) * log_speed(z);
  };
  for (std::size_t j = 1; j < nodes_.size(); ++j)
    psi_table_[j] = psi_table_[j - 1] + integrate(integrand, nodes_[j - 1], nodes_[j], kTight).value;
}

double PsiFamily::cutoff(double m) const {
  constexpr double eta = kRampFraction;
  if (m <= 0.0 || m >= 1.0) return 0.0;
  const double q = m < eta ? m / eta : (m > 1.0 - eta ? (1.0 - m) / eta : 1.0);
  return q * q * (3.0 - 2.0 * q);
}

double PsiFamily::cutoff_integral(double m) const {
  constexpr double eta = kRampFraction;
  constexpr double kappa = 1.0 / (1.0 - eta);
  m = std::clamp(m, 0.0, 1.0);
  // int_0^q (3t^2 - 2t^3) dt = q^3 - q^4 / 2
  auto ramp = [](double q) { return q * q * q - 0.5 * q * q * q * q; };
  double v;
  if (m <= eta)
    v = eta * ramp(m / eta);
  else if (m < 1.0 - eta)
    v = 0.5 * eta + (m - eta);
  else
    v = (1.0 - eta) - eta * ramp((1.0 - m) / eta);
  return std::min(1.0, kappa * v);
}

double PsiFamily::zeta_mass(double zeta) const {
  if (zeta <= nodes_.front()) return 0.0;
  if (zeta >= nodes_.back()) return 1.0;
  const std::size_t j = panel_of(nodes_, zeta);
  return std::clamp(mass_table_[j] + integrate_zeta(modulus_, nodes_[j], zeta).value / mass_total_,
                    0.0, 1.0);
}

double PsiFamily::zeta_psi(double zeta) const {
  if (zeta <= nodes_.front()) return 0.0;
  const std::size_t j = panel_of(nodes_, zeta);
  auto integrand = [&](double z) {
    const double u = unstretch_log(z);
    return cutoff_integral(zeta_mass(z)) * std::exp(u) * log_speed(z);
  };
  return psi_table_[j] + integrate(integrand, nodes_[j], zeta, kTight).value;
}

double PsiFamily::mass_at_log(double log_r) const { return zeta_mass(stretch_log(log_r)); }

double PsiFamily::psi_at_log(double log_r) const {
  if (log_r <= log_lo_) return 0.0;
  if (log_r >= log_hi_) return psi_table_.back() + (std::exp(log_r) - std::exp(log_hi_));
  return zeta_psi(stretch_log(log_r));
}

double PsiFamily::psi(double r) const {
  r = std::abs(r);
  if (r == 0.0) return 0.0;
  return psi_at_log(std::log(r));
}

double PsiFamily::psi_prime_at_log(double log_r) const {
  if (log_r <= log_lo_) return 0.0;
  if (log_r >= log_hi_) return 1.0;
  return cutoff_integral(mass_at_log(log_r));
}

double PsiFamily::psi_prime(double r) const {
  if (r == 0.0) return 0.0;
  const double v = psi_prime_at_log(std::log(std::abs(r)));
  return r > 0.0 ? v : -v;
}

double PsiFamily::psi_second_times_rho_at_log(double log_r) const {
  if (log_r <= log_lo_ || log_r >= log_hi_) return 0.0;
  return cutoff(mass_at_log(log_r)) / ((1.0 - kRampFraction) * n_);
}

double PsiFamily::psi_second(double r) const {
  r = std::abs(r);
  if (r == 0.0) return 0.0;
  const double u = std::log(r);
  const double scaled = psi_second_times_rho_at_log(u);
  if (scaled == 0.0) return 0.0;
  return scaled / (r * modulus_.ratio_at(u));
}

// ---------------------------------------------------------------------------

double p_alpha(double alpha) {
  return 0.5 * std::abs(alpha * (alpha - 1.0)) + std::abs(alpha) +
         alpha * (std::pow(2.0, alpha) + 3.0) + 2.0;
}

NonconfluenceConstants nonconfluence_constants(double alpha, double delta, double M) {
  if (!(alpha >= 0.0)) throw DomainError("alpha must be >= 0");
  if (!(delta > 0.0)) throw DomainError("delta must be > 0");
  if (!(M >= 0.0)) throw DomainError("M must be >= 0");
  NonconfluenceConstants c;
  const double d = std::pow(delta, alpha);
  c.K = (1.0 + 2.0 * alpha) / d;
  c.K_prime = (1.0 + alpha) / d;
  c.K1 = M * (c.K + c.K_prime);
  c.K2 = alpha + 0.5 * alpha * (alpha + 1.0) + c.K + c.K_prime;
  return c;
}

Modulus rho0_modulus(const Modulus& rho, const NonconfluenceConstants& constants) {
  Modulus m;
  m.label = "rho0[" + rho.label + "]";
  const double k1 = constants.K1;
  const double k2 = constants.K2;
  const Modulus base = rho;
  m.rho = [=](double x) { return k1 * x + k2 * base.rho(x); };
  m.ratio_at_log = [=](double u) { return k1 + k2 * base.ratio_at(u); };
  m.domain_upper = rho.domain_upper;
  m.concave = rho.concave;
  return m;
}

RInequalityResult r_inequality_check(double alpha, double delta, std::span<const RPair> samples) {
  const NonconfluenceConstants c = nonconfluence_constants(alpha, delta, 0.0);
  RInequalityResult result;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double x = samples[i].x;
    const double y = samples[i].y;
    if (x == 0.0 || !(std::abs(x + y) >= delta * std::abs(x)))
      throw DomainError("inadmissible pair (x, y) = (" + format_real(x) + ", " + format_real(y) +
                        "): need x != 0 and |x + y| >= delta |x|");
    const double ax = std::abs(x);
    const double r_xy = std::pow(std::abs(x + y), -alpha);
    const double r_x = std::pow(ax, -alpha);
    const double dr_x = -alpha * std::copysign(1.0, x) * std::pow(ax, -alpha - 1.0);
    const double lhs = r_xy - r_x - dr_x * y;
    const double rhs =
        c.K * (std::pow(ax, alpha) + std::pow(ax, alpha - 1.0) * std::abs(y)) / std::pow(ax, 2 * alpha);
    const double slack = (lhs - rhs) / std::max(1.0, std::abs(rhs));
    if (slack > result.worst_slack) {
      result.worst_slack = slack;
      result.worst_index = i;
      result.lhs = lhs;
      result.rhs = rhs;
    }
  }
  return result;
}

}  // namespace jsde
