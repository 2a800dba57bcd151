#include "jsde/model.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

#include "jsde/error.hpp"

namespace jsde {
namespace {

constexpr double kE = std::numbers::e;
constexpr int kCdfCells = 256;

std::vector<Interval> intersect(const std::vector<Interval>& pieces,
                                const SubSupport& region) {
  if (region.is_everything()) return pieces;
  std::vector<Interval> out;
  for (const Interval& p : pieces) {
    for (const Interval& r : region.pieces()) {
      Interval cut;
      cut.lo = std::max(p.lo, r.lo);
      cut.hi = std::min(p.hi, r.hi);
      cut.lo_closed = cut.lo == p.lo ? p.lo_closed && (cut.lo != r.lo || r.lo_closed)
                                     : r.lo_closed;
      cut.hi_closed = cut.hi == p.hi ? p.hi_closed && (cut.hi != r.hi || r.hi_closed)
                                     : r.hi_closed;
      if (cut.hi > cut.lo) out.push_back(cut);
    }
  }
  return out;
}

std::vector<Interval> subtract(const std::vector<Interval>& pieces,
                               const SubSupport& region) {
  if (region.is_everything()) return {};
  std::vector<Interval> current = pieces;
  for (const Interval& r : region.pieces()) {
    std::vector<Interval> next;
    for (const Interval& p : current) {
      if (r.hi <= p.lo || r.lo >= p.hi) {
        next.push_back(p);
        continue;
      }
      if (r.lo > p.lo) next.push_back({p.lo, r.lo, p.lo_closed, !r.lo_closed});
      if (r.hi < p.hi) next.push_back({r.hi, p.hi, !r.hi_closed, p.hi_closed});
    }
    current = std::move(next);
  }
  return current;
}

// Density quadrature helper: each piece split at 0.
QuadratureResult integrate_pieces(const std::vector<Interval>& pieces, const RealFn& g,
                                  const QuadratureOptions& options) {
  static constexpr double kZero[] = {0.0};
  QuadratureResult total;
  for (const Interval& p : pieces) {
    QuadratureResult r = integrate(g, p.lo, p.hi, kZero, options);
    total.value += r.value;
    total.error += r.error;
    total.evaluations += r.evaluations;
    total.converged = total.converged && r.converged;
  }
  return total;
}

std::string fmt_interval(const Interval& i) {
  std::ostringstream os;
  os << (i.lo_closed ? '[' : '(') << i.lo << ", " << i.hi << (i.hi_closed ? ']' : ')');
  return os.str();
}

}  // namespace

std::string catalog_message(std::string_view what, std::string_view key,
                            const std::vector<std::string>& valid) {
  std::string msg = "unknown " + std::string(what) + " '" + std::string(key) + "'; valid keys:";
  for (const auto& v : valid) msg += " " + v;
  return msg;
}

// ---------------------------------------------------------------- SubSupport

SubSupport SubSupport::everything() {
  SubSupport s;
  s.everything_ = true;
  return s;
}

SubSupport SubSupport::nothing() { return SubSupport{}; }

SubSupport SubSupport::of(std::vector<Interval> pieces) {
  SubSupport s;
  for (const Interval& p : pieces)
    if (p.hi > p.lo || (p.hi == p.lo && p.lo_closed && p.hi_closed)) s.pieces_.push_back(p);
  return s;
}

bool SubSupport::contains(double u) const {
  if (everything_) return true;
  return std::any_of(pieces_.begin(), pieces_.end(),
                     [u](const Interval& p) { return p.contains(u); });
}

std::string SubSupport::describe() const {
  if (everything_) return "full";
  if (pieces_.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (i) out += " U ";
    out += fmt_interval(pieces_[i]);
  }
  return out;
}

// --------------------------------------------------------------- MarkMeasure

MarkMeasure::MarkMeasure() : label_("zero") {}

MarkMeasure MarkMeasure::from_atoms(std::vector<Atom> atoms, std::string label) {
  MarkMeasure m;
  m.form_ = Form::atoms;
  m.label_ = std::move(label);
  for (const Atom& a : atoms) {
    if (!(a.weight > 0.0) || !std::isfinite(a.weight) || !std::isfinite(a.mark))
      throw DomainError("atom weights must be positive and finite");
    m.total_mass_ += a.weight;
  }
  m.atoms_ = std::move(atoms);
  return m;
}

MarkMeasure MarkMeasure::from_density(std::vector<Interval> pieces, RealFn density,
                                      std::string label) {
  MarkMeasure m;
  m.form_ = Form::density;
  m.label_ = std::move(label);
  m.density_ = std::move(density);
  for (const Interval& p : pieces) {
    if (!(p.hi >= p.lo)) throw DomainError("density piece with hi < lo");
    if (p.hi > p.lo) m.pieces_.push_back(p);
  }
  std::sort(m.pieces_.begin(), m.pieces_.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const Interval& p : m.pieces_) {
    for (int k = 0; k <= 16; ++k) {
      const double u = p.lo + (p.hi - p.lo) * (k + 0.5) / 17.0;
      if (m.density_(u) < 0.0) throw DomainError("density negative at u = " + std::to_string(u));
    }
  }
  QuadratureOptions opts;
  opts.max_intervals = 400;
  const QuadratureResult mass = integrate_pieces(m.pieces_, m.density_, opts);
  m.total_mass_ = (mass.converged && std::isfinite(mass.value)) ? mass.value : INFINITY;
  if (m.has_finite_mass() && m.total_mass_ > 0.0) m.build_cdf();
  return m;
}

MarkMeasure MarkMeasure::lebesgue(double lo, double hi, std::string label) {
  return from_density({Interval{lo, hi}}, [](double) { return 1.0; }, std::move(label));
}

void MarkMeasure::build_cdf() {
  auto table = std::make_shared<CdfTable>();
  double running = 0.0;
  for (const Interval& p : pieces_) {
    std::vector<double> cells(kCdfCells + 1, 0.0);
    const double width = (p.hi - p.lo) / kCdfCells;
    for (int j = 0; j < kCdfCells; ++j) {
      const double a = p.lo + j * width;
      const double cell = kronrod_panel(density_, a, a + width).value;
      cells[j + 1] = cells[j] + std::max(cell, 0.0);
    }
    running += cells.back();
    table->piece_cumulative.push_back(running);
    table->cell_cumulative.push_back(std::move(cells));
  }
  cdf_ = std::move(table);
}

QuadratureResult MarkMeasure::integrate_detailed(const RealFn& g,
                                                 const QuadratureOptions& options) const {
  if (form_ == Form::atoms) {
    QuadratureResult r;
    for (const Atom& a : atoms_) r.value += a.weight * g(a.mark);
    r.evaluations = static_cast<int>(atoms_.size());
    return r;
  }
  // Infinite-mass densities are still integrated: g may vanish fast enough.
  return integrate_pieces(pieces_, [&](double u) { return g(u) * density_(u); }, options);
}

double MarkMeasure::integrate(const RealFn& g, const QuadratureOptions& options) const {
  const QuadratureResult r = integrate_detailed(g, options);
  if (!r.converged)
    throw QuadratureError("quadrature over measure '" + label_ + "' did not converge");
  return r.value;
}

MarkMeasure MarkMeasure::restricted_to(const SubSupport& region) const {
  if (region.is_everything()) return *this;
  if (form_ == Form::atoms) {
    std::vector<Atom> kept;
    for (const Atom& a : atoms_)
      if (region.contains(a.mark)) kept.push_back(a);
    return from_atoms(std::move(kept), label_ + "|" + region.describe());
  }
  return from_density(intersect(pieces_, region), density_, label_ + "|" + region.describe());
}

MarkMeasure MarkMeasure::excluding(const SubSupport& region) const {
  if (form_ == Form::atoms) {
    std::vector<Atom> kept;
    for (const Atom& a : atoms_)
      if (!region.contains(a.mark)) kept.push_back(a);
    return from_atoms(std::move(kept), label_ + "\\" + region.describe());
  }
  return from_density(subtract(pieces_, region), density_, label_ + "\\" + region.describe());
}

double MarkMeasure::sample_mark(double uniform) const {
  if (!(total_mass_ > 0.0) || !has_finite_mass())
    throw DomainError("cannot sample marks from measure '" + label_ + "' (zero or infinite mass)");
  if (form_ == Form::atoms) {
    const double target = uniform * total_mass_;
    double running = 0.0;
    for (const Atom& a : atoms_) {
      running += a.weight;
      if (target < running) return a.mark;
    }
    return atoms_.back().mark;
  }
  const CdfTable& t = *cdf_;
  const double target = uniform * t.piece_cumulative.back();
  std::size_t piece = static_cast<std::size_t>(
      std::upper_bound(t.piece_cumulative.begin(), t.piece_cumulative.end(), target) -
      t.piece_cumulative.begin());
  piece = std::min(piece, pieces_.size() - 1);
  const double before = piece == 0 ? 0.0 : t.piece_cumulative[piece - 1];
  const std::vector<double>& cells = t.cell_cumulative[piece];
  const double local = std::clamp(target - before, 0.0, cells.back());
  std::size_t j = static_cast<std::size_t>(
      std::upper_bound(cells.begin(), cells.end(), local) - cells.begin());
  j = std::clamp<std::size_t>(j, 1, kCdfCells) - 1;
  const Interval& p = pieces_[piece];
  const double width = (p.hi - p.lo) / kCdfCells;
  const double cell_mass = cells[j + 1] - cells[j];
  const double frac = cell_mass > 0.0 ? (local - cells[j]) / cell_mass : 0.5;
  return p.lo + (j + std::clamp(frac, 0.0, 1.0)) * width;
}

std::vector<MarkCell> MarkMeasure::mark_grid(int count) const {
  std::vector<MarkCell> out;
  if (form_ == Form::atoms) {
    for (const Atom& a : atoms_) out.push_back({a.mark, a.weight});
    return out;
  }
  double total_length = 0.0;
  for (const Interval& p : pieces_) total_length += p.length();
  if (total_length <= 0.0 || count <= 0) return out;
  for (const Interval& p : pieces_) {
    const int cells = std::max(1, static_cast<int>(std::lround(count * p.length() / total_length)));
    const double width = p.length() / cells;
    for (int j = 0; j < cells; ++j) {
      const double a = p.lo + j * width;
      out.push_back({a + 0.5 * width, kronrod_panel(density_, a, a + width).value});
    }
  }
  return out;
}

// ----------------------------------------------------------- CoefficientSet

void validate(const CoefficientSet& model) {
  if (!model.b || !model.sigma || !model.c1 || !model.c2)
    throw DomainError("coefficient set '" + model.label + "' has an empty coefficient");
  if (!model.nu2.excluding(model.u3).has_finite_mass())
    throw DomainError("nu2 outside u3 must have finite mass (model '" + model.label + "')");
}

// ------------------------------------------------------------------ Modulus

double Modulus::ratio_at(double log_x) const {
  if (ratio_at_log) return ratio_at_log(log_x);
  const double x = std::exp(log_x);
  if (!(x > 0.0) || !std::isfinite(x))
    throw RangeError("modulus '" + label + "' has no log-scale evaluator at log x = " +
                     std::to_string(log_x));
  return rho(x) / x;
}

std::vector<std::string> modulus_catalog() {
  return {"identity", "neg_x_log_x", "x_log_log", "one_minus_x_pow_x"};
}

Modulus builtin_modulus(std::string_view key) {
  Modulus m;
  m.label = std::string(key);
  m.concave = true;
  if (key == "identity") {
    m.rho = [](double x) { return x > 0.0 ? x : 0.0; };
    m.ratio_at_log = [](double) { return 1.0; };
    m.closed_form_omega = ClosedFormOmega{
        [](double t, double base) { return std::log(t / base); },
        [](double y, double base) { return base * std::exp(y); }};
    return m;
  }
  if (key == "neg_x_log_x") {
    const double upper = 1.0 / kE;
    m.domain_upper = upper;
    m.rho = [upper](double x) {
      if (x <= 0.0) return 0.0;
      return x < upper ? -x * std::log(x) : upper;
    };
    m.ratio_at_log = [](double u) { return u < -1.0 ? -u : std::exp(-1.0 - u); };
    return m;
  }
  if (key == "x_log_log") {
    // x ln(-ln x) peaks near x = 0.17 and vanishes at 1/e, so the closed form
    // is only used up to e^-e, where ln(-ln x) = 1.
    const double upper = std::exp(-kE);
    m.domain_upper = upper;
    m.rho = [upper](double x) {
      if (x <= 0.0) return 0.0;
      return x < upper ? x * std::log(-std::log(x)) : upper;
    };
    m.ratio_at_log = [](double u) { return u < -kE ? std::log(-u) : std::exp(-kE - u); };
    return m;
  }
  if (key == "one_minus_x_pow_x") {
    const double upper = 1.0 / kE;
    const double cap = -std::expm1(-upper);
    m.domain_upper = upper;
    m.rho = [upper, cap](double x) {
      if (x <= 0.0) return 0.0;
      return x < upper ? -std::expm1(x * std::log(x)) : cap;
    };
    m.ratio_at_log = [cap](double u) {
      if (u >= -1.0) return cap * std::exp(-u);
      // (1 - e^y) / x with y = x ln x = u e^u; written as -u * expm1(y)/y.
      const double y = u * std::exp(u);
      return -u * (y != 0.0 ? std::expm1(y) / y : 1.0);
    };
    return m;
  }
  throw CatalogError(catalog_message("modulus", key, modulus_catalog()));
}

Modulus scaled_modulus(const Modulus& base, double factor) {
  if (!(factor > 0.0)) throw DomainError("modulus scale factor must be positive");
  if (factor == 1.0) return base;
  Modulus m = base;
  std::ostringstream label;
  label << factor << "*" << base.label;
  m.label = label.str();
  m.rho = [r = base.rho, factor](double x) { return factor * r(x); };
  if (base.ratio_at_log)
    m.ratio_at_log = [r = base.ratio_at_log, factor](double u) { return factor * r(u); };
  if (base.closed_form_omega) {
    const ClosedFormOmega cf = *base.closed_form_omega;
    m.closed_form_omega = ClosedFormOmega{
        [cf, factor](double t, double b) { return cf.forward(t, b) / factor; },
        [cf, factor](double y, double b) { return cf.inverse(y * factor, b); }};
  }
  return m;
}

Modulus power_modulus(double exponent) {
  if (!(exponent > 0.0)) throw DomainError("power modulus needs a positive exponent");
  Modulus m;
  std::ostringstream label;
  label << "x^" << exponent;
  m.label = label.str();
  m.concave = exponent <= 1.0;
  m.rho = [exponent](double x) { return x > 0.0 ? std::pow(x, exponent) : 0.0; };
  m.ratio_at_log = [exponent](double u) { return std::exp((exponent - 1.0) * u); };
  return m;
}

// ----------------------------------------------------------- GrowthFunction

std::vector<std::string> growth_catalog() { return {"one", "log", "log_loglog"}; }

GrowthFunction builtin_growth(std::string_view key) {
  GrowthFunction g;
  g.label = std::string(key);
  if (key == "one") {
    g.upsilon = [](double) { return 1.0; };
    g.upsilon_prime = [](double) { return 0.0; };
    return g;
  }
  if (key == "log") {
    g.upsilon = [](double x) { return x < kE ? 1.0 : std::log(x); };
    g.upsilon_prime = [](double x) { return x < kE ? 0.0 : 1.0 / x; };
    g.kinks = {kE};
    return g;
  }
  if (key == "log_loglog") {
    const double edge = kE * kE;
    const double floor_value = 2.0 * std::log(2.0);
    g.upsilon = [edge, floor_value](double x) {
      return x < edge ? floor_value : std::log(x) * std::log(std::log(x));
    };
    g.upsilon_prime = [edge](double x) {
      return x < edge ? 0.0 : (std::log(std::log(x)) + 1.0) / x;
    };
    g.kinks = {edge};
    return g;
  }
  throw CatalogError(catalog_message("growth function", key, growth_catalog()));
}

// ------------------------------------------------------------------ Presets

double calibrate_jump_scale(const MarkMeasure& nu1) {
  const double second_moment = nu1.integrate([](double u) { return u * u; });
  if (!(second_moment > 0.0)) throw DomainError("nu1 has no second moment to calibrate against");
  return 1.0 / std::sqrt(second_moment);
}

namespace {

MarkMeasure small_mark_measure() { return MarkMeasure::lebesgue(-1.0, 1.0, "lebesgue[-1,1]"); }

MarkMeasure large_mark_measure() {
  return MarkMeasure::from_density({Interval{1.0, 2.0, false, true}},
                                   [](double) { return 1.0; }, "lebesgue(1,2]");
}

CoefficientSet jump_free(std::string label, RealFn b, RealFn sigma) {
  CoefficientSet m;
  m.label = std::move(label);
  m.b = std::move(b);
  m.sigma = std::move(sigma);
  m.c1 = [](double, double) { return 0.0; };
  m.c2 = [](double, double) { return 0.0; };
  m.c1_slope = [](double) { return 0.0; };
  m.c2_slope = [](double) { return 0.0; };
  return m;
}

}  // namespace

CoefficientSet preset_example_31() {
  CoefficientSet m;
  m.label = "example_31";
  m.nu1 = small_mark_measure();
  m.nu2 = large_mark_measure();
  const double gamma = calibrate_jump_scale(m.nu1);
  m.b = [](double x) {
    const double a = std::abs(x);
    return a > 0.0 ? -a * std::log(a) : 0.0;
  };
  m.sigma = [](double x) { return std::sqrt(std::abs(x)); };
  m.c1 = [](double x, double) { return std::sqrt(std::abs(x)); };
  m.c2 = [gamma](double x, double u) { return gamma * std::abs(u) * x; };
  m.c2_slope = [gamma](double u) { return gamma * std::abs(u); };
  // All large jumps are interlaced (finite nu2), so the reduced equation has
  // no U3 term.
  m.u3 = SubSupport::nothing();
  return m;
}

CoefficientSet preset_example_41() {
  CoefficientSet m;
  m.label = "example_41";
  m.nu1 = small_mark_measure();
  m.nu2 = large_mark_measure();
  const double gamma = calibrate_jump_scale(m.nu1);
  m.b = [](double x) { return -(x * x * x + std::cbrt(x)); };
  m.sigma = [](double x) { return 2.0 * x; };
  m.c1 = [gamma](double x, double u) { return gamma * std::abs(u) * x; };
  m.c2 = [gamma](double x, double u) { return gamma * std::abs(u) * x; };
  m.c1_slope = [gamma](double u) { return gamma * std::abs(u); };
  m.c2_slope = [gamma](double u) { return gamma * std::abs(u); };
  m.superlinear_drift = true;
  return m;
}

CoefficientSet zero_model() {
  return jump_free("zero", [](double) { return 0.0; }, [](double) { return 0.0; });
}

std::vector<std::string> preset_catalog() {
  return {"example_31", "example_41", "zero", "constant_drift", "contraction",
          "ou_toy", "linear", "linear_dissipative"};
}

CoefficientSet preset(std::string_view name) {
  if (name == "example_31") return preset_example_31();
  if (name == "example_41") return preset_example_41();
  if (name == "zero") return zero_model();
  if (name == "constant_drift")
    return jump_free("constant_drift", [](double) { return 1.0; }, [](double) { return 0.0; });
  if (name == "contraction")
    return jump_free("contraction", [](double x) { return -x; }, [](double) { return 0.0; });
  if (name == "ou_toy")
    return jump_free("ou_toy", [](double x) { return -x; }, [](double) { return 1.0; });
  if (name == "linear")
    return jump_free("linear", [](double x) { return x; }, [](double x) { return x; });
  if (name == "linear_dissipative")
    return jump_free("linear_dissipative", [](double x) { return -x; }, [](double x) { return x; });
  throw CatalogError(catalog_message("preset", name, preset_catalog()));
}

}  // namespace jsde
