#include "jsde/verifier.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>

#include "jsde/analysis.hpp"
#include "jsde/error.hpp"
#include "jsde/format.hpp"

namespace jsde {
namespace {

// Plateau test for int_0+ (or int^inf): the per-decade increments of a
// convergent integral decay geometrically; those of a divergent one do not.
constexpr double kPlateauFactor = 0.85;

struct Tolerance {
  double abs_tol;
  double rel_tol;
};

class Condition {
 public:
  Condition(std::string name, Tolerance tol) : tol_(tol) { result_.name = std::move(name); }

  // Records lhs <= rhs (or lhs < rhs when strict). `make_inputs` builds the
  // witness inputs and only runs for a new worst sample.
  template <class MakeInputs>
  void record_with(MakeInputs&& make_inputs, double lhs, double rhs, bool strict = false) {
    ++result_.samples;
    const double slack = lhs - rhs;
    const double threshold = strict ? -DBL_MIN : tol_.abs_tol + tol_.rel_tol * std::abs(rhs);
    const double excess = std::isnan(slack) ? INFINITY : slack - threshold;
    if (result_.worst && !(excess > result_.worst->excess())) return;
    Witness w;
    w.condition = result_.name;
    w.inputs = make_inputs();
    w.lhs = lhs;
    w.rhs = rhs;
    w.slack = std::isnan(slack) ? INFINITY : slack;
    w.threshold = threshold;
    result_.worst = std::move(w);
  }

  void record(const nlohmann::json& inputs, double lhs, double rhs, bool strict = false) {
    record_with([&] { return inputs; }, lhs, rhs, strict);
  }

  Condition& advisory(std::string note) {
    result_.advisory = true;
    result_.note = std::move(note);
    return *this;
  }
  Condition& note(std::string text) {
    result_.note = std::move(text);
    return *this;
  }

  ConditionResult finish() {
    if (result_.worst && result_.worst->excess() > 0.0) result_.verdict = Verdict::violated;
    return std::move(result_);
  }

 private:
  Tolerance tol_;
  ConditionResult result_;
};

AssumptionReport assemble(AssumptionId id, std::string grid_spec, Tolerance tol,
                          std::vector<ConditionResult> conditions) {
  AssumptionReport report;
  report.assumption_id = id;
  report.grid_spec = std::move(grid_spec);
  report.abs_tolerance = tol.abs_tol;
  report.rel_tolerance = tol.rel_tol;
  const Witness* worst = nullptr;
  bool violated = false;
  for (const ConditionResult& c : conditions) {
    if (c.advisory || !c.worst) continue;
    const bool v = c.verdict == Verdict::violated;
    if ((v && !violated) || ((v == violated) && (!worst || c.worst->excess() > worst->excess()))) {
      worst = &*c.worst;
      violated = violated || v;
    }
  }
  report.verdict = violated ? Verdict::violated : Verdict::no_violation_found;
  if (worst) report.worst_witness = *worst;
  report.conditions = std::move(conditions);
  return report;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  if (n <= 0) return v;
  if (n == 1) return {lo};
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  v.back() = hi;
  return v;
}

std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> v;
  if (n <= 0) return v;
  if (n == 1) return {lo};
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) v.push_back(std::exp(a + (b - a) * i / (n - 1)));
  v.front() = lo;
  v.back() = hi;
  return v;
}

struct Pair {
  double x;
  double y;
};

double effective_gap_hi(const GridSpec& grid, double fallback) {
  return std::isnan(grid.gap_hi) ? fallback : grid.gap_hi;
}

std::vector<Pair> sample_pairs(const GridSpec& grid, double gap_hi) {
  if (!(grid.gap_lo > 0.0) || !(gap_hi >= grid.gap_lo))
    throw DomainError("inadmissible pair grid: need 0 < gap_lo <= gap_hi, got [" +
                      format_real(grid.gap_lo) + ", " + format_real(gap_hi) + "]");
  if (!(grid.x_lo <= grid.x_hi)) throw DomainError("pair grid anchor range is empty");
  const std::vector<double> anchors = linspace(grid.x_lo, grid.x_hi, grid.anchors);
  const std::vector<double> gaps = logspace(grid.gap_lo, gap_hi, grid.gaps);
  std::vector<Pair> pairs;
  pairs.reserve(anchors.size() * gaps.size() * 2 + 8);
  auto keep = [&](double x, double y) {
    if (x == y) return;
    if (grid.pairs_within_range && (y < grid.x_lo || y > grid.x_hi || x < grid.x_lo || x > grid.x_hi))
      return;
    pairs.push_back({x, y});
  };
  for (double x : anchors)
    for (double g : gaps) {
      keep(x, x + g);
      keep(x, x - g);
    }
  // Corners: pairs straddling or touching the origin.
  for (double g : {grid.gap_lo, gap_hi}) {
    keep(0.0, g);
    keep(0.0, -g);
    keep(-0.5 * g, 0.5 * g);
  }
  return pairs;
}

nlohmann::json pair_inputs(const Pair& p) { return {{"x", p.x}, {"y", p.y}}; }

double integrate_on(const MarkMeasure& measure, const RealFn& g, const char* what, const Pair& p) {
  if (measure.is_zero()) return 0.0;
  try {
    return measure.integrate(g);
  } catch (const QuadratureError& e) {
    throw QuadratureError(std::string(what) + ": quadrature failed at (x, y) = (" +
                          format_real(p.x) + ", " + format_real(p.y) + "): " + e.what());
  }
}

Tolerance tolerance_of(const GridSpec& grid) { return {grid.abs_tol, grid.rel_tol}; }

// Decade increments of int ds / rho(s) going down from the base point.
ConditionResult divergence_certificate(const Modulus& modulus, int decades, Tolerance tol,
                                       const std::string& name) {
  Condition c(name, tol);
  const double t_b = std::min(1.0, modulus.domain_upper);
  const double log_b = std::log(t_b);
  std::vector<double> omega{0.0};
  std::vector<double> inc;
  for (int k = 1; k <= decades; ++k) {
    const double d =
        integrate_reciprocal_modulus(modulus, log_b - k * std::log(10.0), log_b - (k - 1) * std::log(10.0))
            .value;
    inc.push_back(d);
    omega.push_back(omega.back() - d);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < inc.size(); ++i) decreasing = decreasing && inc[i] < inc[i - 1];
  const std::size_t n = inc.size();
  const double factor =
      n >= 4 && inc[n - 4] > 0.0 ? std::pow(inc[n - 1] / inc[n - 4], 1.0 / 3.0) : 1.0;
  nlohmann::json inputs{{"base_point", t_b},
                        {"decades", decades},
                        {"omega_at_decades", omega},
                        {"decay_factor", factor},
                        {"strictly_decreasing", decreasing}};
  // Violation: factor < 0.85 with decreasing increments, i.e. Omega plateaus
  // toward 0 and the integral converges.
  c.record(inputs, kPlateauFactor, decreasing ? factor : std::max(factor, kPlateauFactor));
  c.note("plateau test on Omega(t_b 10^-k), k <= " + std::to_string(decades));
  return c.finish();
}

std::vector<ConditionResult> modulus_conditions(const Modulus& modulus, const ModulusGrid& grid,
                                                Tolerance tol, const std::string& prefix,
                                                bool need_concave) {
  const double hi = std::isnan(grid.hi) ? std::min(modulus.domain_upper, 10.0) : grid.hi;
  if (!(grid.lo > 0.0) || !(hi > grid.lo)) throw DomainError("modulus grid is empty");
  const std::vector<double> xs = logspace(grid.lo, hi, grid.points);
  std::vector<double> rho(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) rho[i] = modulus.rho(xs[i]);

  std::vector<ConditionResult> out;
  Condition positive(prefix + "positive", tol);
  for (std::size_t i = 0; i < xs.size(); ++i)
    positive.record({{"x", xs[i]}}, 0.0, rho[i], /*strict=*/true);
  out.push_back(positive.finish());

  Condition monotone(prefix + "non_decreasing", tol);
  for (std::size_t i = 1; i < xs.size(); ++i)
    monotone.record({{"x", xs[i - 1]}, {"y", xs[i]}}, rho[i - 1], rho[i]);
  out.push_back(monotone.finish());

  if (need_concave) {
    Condition concave(prefix + "midpoint_concave", tol);
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t k = 1; i + k < xs.size(); k *= 2) {
        const double x = xs[i];
        const double y = xs[i + k];
        concave.record({{"x", x}, {"y", y}}, 0.5 * (rho[i] + rho[i + k]), modulus.rho(0.5 * (x + y)));
      }
    out.push_back(concave.finish());
  }

  try {
    out.push_back(divergence_certificate(modulus, grid.decades, tol, prefix + "divergent_at_0"));
  } catch (const Error& e) {
    Condition d(prefix + "divergent_at_0", tol);
    d.record({{"error", e.what()}}, 1.0, 0.0);
    out.push_back(d.note("divergence certificate could not be evaluated").finish());
  }
  return out;
}

std::string modulus_grid_text(const Modulus& modulus, const ModulusGrid& grid) {
  const double hi = std::isnan(grid.hi) ? std::min(modulus.domain_upper, 10.0) : grid.hi;
  std::ostringstream s;
  s << grid.points << " log-spaced x in [" << format_real(grid.lo) << ", " << format_real(hi)
    << "], midpoint pairs at index distance 2^k, divergence over " << grid.decades
    << " decades below min(1, domain_upper)";
  return s.str();
}

Modulus resolve_modulus(const std::string& key, double scale) {
  Modulus m = builtin_modulus(key);
  return scale == 1.0 ? m : scaled_modulus(m, scale);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(AssumptionId id) {
  switch (id) {
    case AssumptionId::A22: return "A22";
    case AssumptionId::A23: return "A23";
    case AssumptionId::A24: return "A24";
    case AssumptionId::A25: return "A25";
    case AssumptionId::A26: return "A26";
  }
  return "?";
}

std::string to_string(Verdict verdict) {
  return verdict == Verdict::violated ? "violated" : "no_violation_found";
}

AssumptionId parse_assumption(std::string_view text) {
  for (AssumptionId id : {AssumptionId::A22, AssumptionId::A23, AssumptionId::A24,
                          AssumptionId::A25, AssumptionId::A26})
    if (text == to_string(id)) return id;
  throw CatalogError(catalog_message("assumption", text, {"A22", "A23", "A24", "A25", "A26"}));
}

nlohmann::json to_json(const Witness& w) {
  return {{"condition", w.condition}, {"inputs", w.inputs},  {"lhs", w.lhs},
          {"rhs", w.rhs},             {"slack", w.slack},    {"threshold", w.threshold}};
}

nlohmann::json to_json(const AssumptionReport& r) {
  nlohmann::json conditions = nlohmann::json::array();
  for (const ConditionResult& c : r.conditions) {
    nlohmann::json j{{"name", c.name},
                     {"verdict", to_string(c.verdict)},
                     {"samples", c.samples},
                     {"advisory", c.advisory}};
    j["worst_witness"] = c.worst ? to_json(*c.worst) : nlohmann::json(nullptr);
    if (!c.note.empty()) j["note"] = c.note;
    conditions.push_back(std::move(j));
  }
  return {{"assumption_id", to_string(r.assumption_id)},
          {"verdict", to_string(r.verdict)},
          {"worst_witness", r.worst_witness ? to_json(*r.worst_witness) : nlohmann::json(nullptr)},
          {"grid_spec", r.grid_spec},
          {"tolerance", {{"absolute", r.abs_tolerance}, {"relative", r.rel_tolerance}}},
          {"conditions", conditions}};
}

std::string GridSpec::describe() const {
  std::ostringstream s;
  s << anchors << " anchors x in [" << format_real(x_lo) << ", " << format_real(x_hi) << "] x "
    << gaps << " log-spaced gaps in [" << format_real(gap_lo) << ", "
    << (std::isnan(gap_hi) ? std::string("default") : format_real(gap_hi)) << "], both signs"
    << (pairs_within_range ? ", pairs kept inside the anchor range" : "") << "; " << marks
    << " marks per measure";
  return s.str();
}

// ---------------------------------------------------------------------------

AssumptionReport check_modulus(const Modulus& modulus, const ModulusGrid& grid) {
  const Tolerance tol{1e-9, 1e-9};
  return assemble(AssumptionId::A22, modulus_grid_text(modulus, grid), tol,
                  modulus_conditions(modulus, grid, tol, "", true));
}

double growth_lhs(const CoefficientSet& model, double x) {
  const MarkMeasure nu3 = model.nu3();
  const Pair p{x, x};
  const double bx = model.b(x);
  const double sx = model.sigma(x);
  const double j1 =
      integrate_on(model.nu1, [&](double u) { const double c = model.c1(x, u); return c * c; },
                   "growth condition", p);
  const double j2 =
      integrate_on(nu3, [&](double u) { const double c = model.c2(x, u); return c * c; },
                   "growth condition", p);
  return 2.0 * x * bx + sx * sx + j1 + 2.0 * j2;
}

namespace {

std::vector<double> growth_points(const GridSpec& grid) {
  std::vector<double> xs = linspace(grid.x_lo, grid.x_hi, grid.anchors);
  xs.insert(xs.end(), grid.tail.begin(), grid.tail.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

double growth_rhs_unit(const GrowthFunction& upsilon, double x) {
  const double x2 = x * x;
  return x2 * upsilon.upsilon(x2) + 1.0;
}

}  // namespace

double growth_ratio_supremum(const CoefficientSet& model, const GrowthFunction& upsilon,
                             const GridSpec& grid) {
  double sup = 0.0;
  for (double x : growth_points(grid))
    sup = std::max(sup, growth_lhs(model, x) / growth_rhs_unit(upsilon, x));
  return sup;
}

AssumptionReport check_growth(const CoefficientSet& model, const GrowthFunction& upsilon,
                              double mu, const GridSpec& grid) {
  if (!(mu >= 0.0)) throw DomainError("mu must be >= 0");
  const Tolerance tol = tolerance_of(grid);
  std::vector<ConditionResult> out;

  Condition growth("growth", tol);
  for (double x : growth_points(grid))
    growth.record({{"x", x}, {"mu", mu}}, growth_lhs(model, x), mu * growth_rhs_unit(upsilon, x));
  out.push_back(growth.finish());

  // Y maps [0, inf) into [1, inf) and is non-decreasing.
  const std::vector<double> ss = logspace(1e-6, 1e12, 181);
  Condition range("upsilon_at_least_one", tol);
  Condition monotone("upsilon_non_decreasing", tol);
  range.record({{"s", 0.0}}, 1.0, upsilon.upsilon(0.0));
  for (std::size_t i = 0; i < ss.size(); ++i) {
    range.record({{"s", ss[i]}}, 1.0, upsilon.upsilon(ss[i]));
    if (i > 0)
      monotone.record({{"s", ss[i - 1]}, {"t", ss[i]}}, upsilon.upsilon(ss[i - 1]),
                      upsilon.upsilon(ss[i]));
  }
  out.push_back(range.finish());
  out.push_back(monotone.finish());

  // Y -> infinity: sampled as strict growth between 1e6 and 1e12. Advisory,
  // because the constant Y = 1 is an admissible catalog choice.
  Condition unbounded("upsilon_unbounded", tol);
  unbounded.record({{"s", 1e6}, {"t", 1e12}}, upsilon.upsilon(1e6), upsilon.upsilon(1e12), true);
  unbounded.advisory("sampled heuristic; Upsilon = 1 fails it yet is an admissible catalog entry");
  out.push_back(unbounded.finish());

  // int_0^inf ds / (s Y(s) + 1) = inf via decade increments of log phi.
  Condition divergent("phi_integral_divergent", tol);
  const PhiFunction phi(upsilon);
  std::vector<double> partial;
  std::vector<double> inc;
  double prev = phi.log_value(1.0);
  partial.push_back(prev);
  for (int k = 1; k <= 12; ++k) {
    const double v = phi.log_value(std::pow(10.0, k));
    inc.push_back(v - prev);
    partial.push_back(v);
    prev = v;
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < inc.size(); ++i) decreasing = decreasing && inc[i] < inc[i - 1];
  const double factor = std::pow(inc[11] / inc[8], 1.0 / 3.0);
  divergent.record({{"partial_integrals_at_decades", partial},
                    {"decay_factor", factor},
                    {"strictly_decreasing", decreasing}},
                   kPlateauFactor, decreasing ? factor : std::max(factor, kPlateauFactor));
  out.push_back(divergent.finish());

  std::ostringstream spec;
  spec << grid.anchors << " anchors x in [" << format_real(grid.x_lo) << ", "
       << format_real(grid.x_hi) << "] plus " << grid.tail.size()
       << " tail points; Upsilon sampled at 181 log-spaced s in [1e-6, 1e12]";
  return assemble(AssumptionId::A23, spec.str(), tol, std::move(out));
}

AssumptionReport check_local_conditions(const CoefficientSet& model, const Modulus& modulus,
                                        double alpha, double delta0, const GridSpec& grid) {
  if (!(alpha >= 0.0)) throw DomainError("alpha must be >= 0");
  if (!(delta0 > 0.0)) throw DomainError("delta0 must be > 0");
  const double gap_hi = effective_gap_hi(grid, delta0);
  if (gap_hi > delta0)
    throw DomainError("inadmissible pair grid: gaps up to " + format_real(gap_hi) +
                      " exceed delta0 = " + format_real(delta0));
  const Tolerance tol = tolerance_of(grid);
  const std::vector<Pair> pairs = sample_pairs(grid, gap_hi);
  const MarkMeasure nu3 = model.nu3();
  const bool lipschitz = alpha == 0.0;

  Condition cond_i("drift_diffusion", tol);
  Condition cond_ii("small_jumps", tol);
  Condition cond_iii("large_jumps_u3", tol);
  for (const Pair& p : pairs) {
    const double d = std::abs(p.x - p.y);
    const double db = (p.x - p.y) * (model.b(p.x) - model.b(p.y));
    const double ds = model.sigma(p.x) - model.sigma(p.y);
    const auto in = [&] { return pair_inputs(p); };
    if (lipschitz) {
      const double rhs = d * modulus.rho(d);
      cond_i.record_with(in, std::max(db, ds * ds), rhs);
      auto sq = [&](const JumpFn& c) {
        return [&](double u) { const double v = c(p.x, u) - c(p.y, u); return v * v; };
      };
      cond_ii.record_with(in, integrate_on(model.nu1, sq(model.c1), "small-jump condition", p), rhs);
      cond_iii.record_with(in, integrate_on(nu3, sq(model.c2), "large-jump condition", p), rhs);
    } else {
      const double r = modulus.rho(std::pow(d, alpha));
      cond_i.record_with(in, std::max(db, ds * ds), std::pow(d, 2.0 - alpha) * r);
      auto form = [&](const JumpFn& c) {
        return [&](double u) {
          const double v = std::abs(c(p.x, u) - c(p.y, u));
          return std::max(std::pow(v, alpha), std::pow(d, alpha - 1.0) * v);
        };
      };
      cond_ii.record_with(in, integrate_on(model.nu1, form(model.c1), "small-jump condition", p), r);
      cond_iii.record_with(in, integrate_on(nu3, form(model.c2), "large-jump condition", p), r);
    }
  }
  if (lipschitz) {
    const std::string note = "alpha = 0: Lipschitz form with rho as modulus of |x - y|";
    cond_i.note(note);
    cond_ii.note(note);
    cond_iii.note(note);
  }
  std::vector<ConditionResult> out{cond_i.finish(), cond_ii.finish(), cond_iii.finish()};
  GridSpec shown = grid;
  shown.gap_hi = gap_hi;
  return assemble(AssumptionId::A24, shown.describe(), tol, std::move(out));
}

AssumptionReport check_corollary_conditions(const CoefficientSet& model, const Modulus& rho1,
                                            const Modulus& rho2, double delta0,
                                            const GridSpec& grid) {
  if (!(delta0 > 0.0)) throw DomainError("delta0 must be > 0");
  const double gap_hi = effective_gap_hi(grid, delta0);
  if (gap_hi > delta0)
    throw DomainError("inadmissible pair grid: gaps up to " + format_real(gap_hi) +
                      " exceed delta0 = " + format_real(delta0));
  const Tolerance tol = tolerance_of(grid);
  std::vector<ConditionResult> out = modulus_conditions(rho1, {}, tol, "rho1.", true);
  for (ConditionResult& c : modulus_conditions(rho2, {}, tol, "rho2.", false))
    out.push_back(std::move(c));

  const std::vector<Pair> pairs = sample_pairs(grid, gap_hi);
  const MarkMeasure nu3 = model.nu3();
  Condition cond_i("drift_large_jumps", tol);
  Condition cond_ii("diffusion_small_jumps", tol);
  for (const Pair& p : pairs) {
    const double d = std::abs(p.x - p.y);
    const auto in = [&] { return pair_inputs(p); };
    const double db = (p.x - p.y) * (model.b(p.x) - model.b(p.y));
    const double j2 = integrate_on(
        nu3, [&](double u) { return std::abs(model.c2(p.x, u) - model.c2(p.y, u)); },
        "large-jump condition", p);
    cond_i.record_with(in, db + j2, d * rho1.rho(d));
    const double ds = model.sigma(p.x) - model.sigma(p.y);
    const double j1 = integrate_on(
        model.nu1,
        [&](double u) { const double v = model.c1(p.x, u) - model.c1(p.y, u); return v * v; },
        "small-jump condition", p);
    cond_ii.record_with(in, ds * ds + j1, rho2.rho(d));
  }
  out.push_back(cond_i.finish());
  out.push_back(cond_ii.finish());

  Condition monotone("c1_non_decreasing", tol);
  if (!model.nu1.is_zero()) {
    for (const MarkCell& cell : model.nu1.mark_grid(grid.marks))
      for (const Pair& p : pairs) {
        const double lo = std::min(p.x, p.y);
        const double hi = std::max(p.x, p.y);
        monotone.record_with([&] { return nlohmann::json{{"x", lo}, {"y", hi}, {"u", cell.mark}}; },
                             model.c1(lo, cell.mark),
                        model.c1(hi, cell.mark));
      }
  }
  out.push_back(monotone.note("c1(x, u) <= c1(y, u) for x < y at sampled marks of nu1").finish());

  GridSpec shown = grid;
  shown.gap_hi = gap_hi;
  return assemble(AssumptionId::A25, shown.describe(), tol, std::move(out));
}

AssumptionReport check_nonconfluence_conditions(const CoefficientSet& model,
                                                const Modulus& modulus, double alpha,
                                                double delta, const GridSpec& grid) {
  if (!(alpha >= 0.0)) throw DomainError("alpha must be >= 0");
  if (!(delta > 0.0)) throw DomainError("delta must be > 0");
  const double gap_hi = effective_gap_hi(grid, 10.0);
  const Tolerance tol = tolerance_of(grid);
  const std::vector<Pair> pairs = sample_pairs(grid, gap_hi);

  Condition cond_i("drift", tol);
  Condition cond_ii("diffusion", tol);
  Condition cond_iii_1("small_jumps", tol);
  Condition cond_iii_2("large_jumps", tol);
  for (const Pair& p : pairs) {
    const double d = std::abs(p.x - p.y);
    const double r = modulus.rho(std::pow(d, -alpha));
    const auto in = [&] { return pair_inputs(p); };
    cond_i.record_with(in, (p.x - p.y) * (model.b(p.x) - model.b(p.y)), std::pow(d, 2.0 + alpha) * r);
    const double ds = model.sigma(p.x) - model.sigma(p.y);
    cond_ii.record_with(in, ds * ds, std::pow(d, 2.0 + alpha) * r);
    auto abs_diff = [&](const JumpFn& c) {
      return [&](double u) { return std::abs(c(p.x, u) - c(p.y, u)); };
    };
    const double rhs3 = std::pow(d, 1.0 + alpha) * r;
    cond_iii_1.record_with(in, integrate_on(model.nu1, abs_diff(model.c1), "small-jump condition", p),
                      rhs3);
    cond_iii_2.record_with(in, integrate_on(model.nu2, abs_diff(model.c2), "large-jump condition", p),
                      rhs3);
  }
  std::vector<ConditionResult> out{cond_i.finish(), cond_ii.finish(), cond_iii_1.finish(),
                                   cond_iii_2.finish()};

  // Separation: |x - y + c(x,u) - c(y,u)| > delta |x - y| for nu-a.e. u.
  struct Source {
    const char* name;
    const MarkMeasure* measure;
    const JumpFn* c;
    const std::optional<RealFn>* slope;
  };
  for (const Source& s : {Source{"nu1", &model.nu1, &model.c1, &model.c1_slope},
                          Source{"nu2", &model.nu2, &model.c2, &model.c2_slope}}) {
    if (s.measure->is_zero()) continue;
    const std::vector<MarkCell> cells = s.measure->mark_grid(grid.marks);
    Condition sampled(std::string("separation_") + s.name, tol);
    for (const MarkCell& cell : cells)
      for (const Pair& p : pairs) {
        const double d = p.x - p.y;
        const double moved = std::abs(d + (*s.c)(p.x, cell.mark) - (*s.c)(p.y, cell.mark));
        sampled.record_with(
            [&] {
              return nlohmann::json{{"x", p.x}, {"y", p.y}, {"u", cell.mark}, {"mark_mass", cell.mass}};
            },
                       delta * std::abs(d), moved, true);
      }
    out.push_back(sampled
                      .note("falsification only: sampled marks and pairs; a violating mark is "
                            "reported with the nu-mass of its cell")
                      .finish());
    if (s.slope->has_value()) {
      // Affine jump map c(x, u) = k(u) x: holds for all pairs iff |1 + k(u)| > delta.
      Condition affine(std::string("separation_affine_") + s.name, tol);
      for (const MarkCell& cell : cells)
        affine.record({{"u", cell.mark}, {"mark_mass", cell.mass}}, delta,
                      std::abs(1.0 + (**s.slope)(cell.mark)), true);
      out.push_back(affine.note("structural test for affine jump maps c(x, u) = k(u) x").finish());
    }
  }

  GridSpec shown = grid;
  shown.gap_hi = gap_hi;
  return assemble(AssumptionId::A26, shown.describe(), tol, std::move(out));
}

// ---------------------------------------------------------------------------

std::vector<VerificationProfile> designated_profiles(std::string_view preset_name) {
  std::vector<VerificationProfile> out;
  if (preset_name == "example_31") {
    VerificationProfile growth;
    growth.assumption = AssumptionId::A23;
    growth.growth = "one";
    out.push_back(growth);

    // b-estimate |b(x) - b(y)| <= -r ln r (r = |x - y|) on (0, 1/e); the
    // sigma and c1 terms give 3 (sqrt x - sqrt y)^2 <= 3 |x - y|.
    VerificationProfile corollary;
    corollary.assumption = AssumptionId::A25;
    corollary.modulus = "neg_x_log_x";
    corollary.modulus2 = "identity";
    corollary.modulus2_scale = 3.0;
    corollary.delta = std::exp(-1.0);
    corollary.grid.x_lo = 1e-6;
    corollary.grid.x_hi = std::exp(-1.0) - 1e-9;
    corollary.grid.gap_lo = 1e-7;
    corollary.grid.pairs_within_range = true;
    out.push_back(corollary);
  } else if (preset_name == "example_41") {
    // 2xb + 4x^2 + x^2 + 7x^2 = -2x^4 - 2x^(4/3) + 12 x^2 <= 12 (x^2 + 1).
    VerificationProfile growth;
    growth.assumption = AssumptionId::A23;
    growth.growth = "one";
    growth.mu = 12.0;
    out.push_back(growth);

    // sigma = 2x forces rho(r) >= 4r in the Lipschitz (alpha = 0) form.
    VerificationProfile local;
    local.assumption = AssumptionId::A24;
    local.modulus = "identity";
    local.modulus_scale = 4.0;
    local.alpha = 0.0;
    local.delta = 1.0;
    out.push_back(local);

    VerificationProfile confluence;
    confluence.assumption = AssumptionId::A26;
    confluence.modulus = "identity";
    confluence.modulus_scale = 4.0;
    confluence.alpha = 0.0;
    confluence.delta = 0.5;
    confluence.grid.x_lo = -5.0;
    confluence.grid.x_hi = 5.0;
    out.push_back(confluence);
  }
  return out;
}

std::optional<VerificationProfile> designated_profile(std::string_view preset_name,
                                                      AssumptionId id) {
  for (const VerificationProfile& p : designated_profiles(preset_name))
    if (p.assumption == id) return p;
  return std::nullopt;
}

AssumptionReport run_profile(const CoefficientSet& model, const VerificationProfile& profile) {
  switch (profile.assumption) {
    case AssumptionId::A22:
      return check_modulus(resolve_modulus(profile.modulus, profile.modulus_scale));
    case AssumptionId::A23: {
      const GrowthFunction upsilon = builtin_growth(profile.growth);
      const double mu =
          profile.mu ? *profile.mu : growth_ratio_supremum(model, upsilon, profile.grid);
      return check_growth(model, upsilon, mu, profile.grid);
    }
    case AssumptionId::A24:
      return check_local_conditions(model, resolve_modulus(profile.modulus, profile.modulus_scale),
                                    profile.alpha, profile.delta, profile.grid);
    case AssumptionId::A25:
      return check_corollary_conditions(
          model, resolve_modulus(profile.modulus, profile.modulus_scale),
          resolve_modulus(profile.modulus2, profile.modulus2_scale), profile.delta, profile.grid);
    case AssumptionId::A26:
      return check_nonconfluence_conditions(
          model, resolve_modulus(profile.modulus, profile.modulus_scale), profile.alpha,
          profile.delta, profile.grid);
  }
  throw DomainError("unknown assumption");
}

}  // namespace jsde
