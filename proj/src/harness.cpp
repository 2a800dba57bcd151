#include "jsde/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "jsde/error.hpp"
#include "jsde/format.hpp"
#include "jsde/noise.hpp"
#include "jsde/verifier.hpp"

namespace jsde {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::explosion: return "explosion";
    case ExperimentKind::uniqueness: return "uniqueness";
    case ExperimentKind::nonconfluence: return "nonconfluence";
    case ExperimentKind::convergence: return "convergence";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  for (ExperimentKind k : {ExperimentKind::explosion, ExperimentKind::uniqueness,
                           ExperimentKind::nonconfluence, ExperimentKind::convergence})
    if (text == to_string(k)) return k;
  throw CatalogError(catalog_message("experiment", text,
                                     {"explosion", "uniqueness", "nonconfluence", "convergence"}));
}

CoefficientSet ExperimentConfig::resolved_model() const {
  CoefficientSet m = model ? *model : preset(model_name);
  if (!m.nu1.has_finite_mass()) {
    if (!(truncation_epsilon > 0.0))
      throw DomainError("nu1 of '" + m.label +
                        "' has infinite mass; set noise.truncation_epsilon > 0");
    m = with_truncated_small_jumps(std::move(m), truncation_epsilon);
  }
  validate(m);
  return m;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j{{"kind", to_string(c.kind)},
                   {"model", c.model ? "inline:" + c.model->label : c.model_name},
                   {"horizon", c.horizon},
                   {"steps", c.steps},
                   {"paths", c.paths},
                   {"master_seed", c.master_seed},
                   {"radii", c.radii},
                   {"alpha", c.alpha},
                   {"x0", c.x0},
                   {"y0", c.y0},
                   {"explosion_radius", c.explosion_radius},
                   {"truncation_epsilon", c.truncation_epsilon},
                   {"growth", c.growth},
                   {"epsilons", c.epsilons},
                   {"delta", c.delta},
                   {"modulus", c.modulus},
                   {"modulus_scale", c.modulus_scale},
                   {"skip_checks", c.skip_checks},
                   {"budget", c.budget}};
  j["taming"] = c.taming ? (*c.taming == Taming::drift_tamed ? "tamed" : "off") : "default";
  j["mu"] = c.mu ? nlohmann::json(*c.mu) : nlohmann::json(nullptr);
  return j;
}

MeanStat mean_stat(const std::vector<double>& values) {
  MeanStat s;
  s.n = values.size();
  if (s.n == 0) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.standard_error = std::sqrt(ss / (s.n - 1) / s.n);
  }
  return s;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

std::size_t step_count(double horizon, double h) {
  return static_cast<std::size_t>(std::ceil(horizon / h - 1e-9));
}

void check_common(const ExperimentConfig& c) {
  if (c.paths < 1) throw DomainError("experiment needs at least one path");
  if (!(c.horizon > 0.0)) throw DomainError("horizon must be positive");
  if (c.steps.empty()) throw DomainError("step ladder is empty");
  for (double h : c.steps)
    if (!(h > 0.0) || h > c.horizon) throw DomainError("ladder steps must satisfy 0 < h <= T");
}

void check_budget(const ExperimentConfig& c, double steps_per_path) {
  const double work = static_cast<double>(c.paths) * steps_per_path;
  if (work > c.budget)
    throw ResourceError("experiment needs " + format_real(work) + " path steps, over the budget of " +
                        format_real(c.budget) + " (experiment.budget)");
}

SchemeConfig scheme_for(const ExperimentConfig& c, const CoefficientSet& model, double h,
                        double radius) {
  SchemeConfig s = default_scheme(model, h, radius);
  if (c.taming) s.taming = *c.taming;
  return s;
}

int coarsening_factor(double h, double reference) {
  const double ratio = h / reference;
  const long long f = std::llround(ratio);
  if (f < 1 || std::abs(ratio - static_cast<double>(f)) > 1e-9 * ratio)
    throw DomainError("ladder step " + format_real(h) + " is not an integer multiple of the reference step " +
                      format_real(reference));
  return static_cast<int>(f);
}

std::vector<double> descending(std::vector<double> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

// Least-squares slope of log y against log x over points with y > 0.
std::optional<double> log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 2) return std::nullopt;
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

std::size_t events_read(const PathResult& path, const NoiseRealization& noise) {
  return path.noise_reads - std::min(path.noise_reads, noise.steps());
}

ExperimentSummary start(const ExperimentConfig& c) {
  ExperimentSummary s;
  s.kind = c.kind;
  s.config = to_json(c);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentSummary run_explosion(const ExperimentConfig& c) {
  check_common(c);
  if (c.radii.empty()) throw DomainError("radius ladder is empty");
  std::vector<double> radii = c.radii;
  std::sort(radii.begin(), radii.end());
  if (!(radii.front() > 0.0)) throw DomainError("radii must be positive");
  const CoefficientSet model = c.resolved_model();
  const double h = *std::min_element(c.steps.begin(), c.steps.end());
  check_budget(c, static_cast<double>(step_count(c.horizon, h)));

  const GrowthFunction upsilon = builtin_growth(c.growth);
  const double mu = c.mu ? *c.mu : growth_ratio_supremum(model, upsilon);
  if (!c.skip_checks) {
    const AssumptionReport report = check_growth(model, upsilon, mu);
    if (report.verdict == Verdict::violated)
      throw DomainError("model '" + model.label + "' fails the growth check with Upsilon = " +
                        c.growth + ", mu = " + format_real(mu) +
                        "; set experiment.skip_checks = true to run anyway");
  }
  const PhiFunction phi(upsilon);
  const double r_max = radii.back();
  const SchemeConfig scheme = scheme_for(c, model, h, r_max);

  const std::size_t nr = radii.size();
  std::vector<std::vector<double>> exits(c.paths, std::vector<double>(nr, NAN));
  std::vector<double> finals(c.paths), phis(c.paths);
  std::vector<std::uint64_t> seeds(c.paths);
  parallel_for(c.paths, c.threads, [&](std::size_t i) {
    seeds[i] = derive_path_seed(c.master_seed, i);
    const NoiseRealization noise = sample_noise(model, c.horizon, h, seeds[i]);
    const PathResult path = simulate(model, noise, scheme, c.x0);
    for (std::size_t r = 0; r < nr; ++r)
      if (auto t = first_exit_time(path, radii[r])) exits[i][r] = *t;
    finals[i] = path.final_state();
    phis[i] = phi(finals[i] * finals[i]);
  });

  ExperimentSummary s = start(c);
  for (std::size_t r = 0; r < nr; ++r) {
    RadiusRow row;
    row.radius = radii[r];
    for (std::size_t i = 0; i < c.paths; ++i) row.exits += std::isnan(exits[i][r]) ? 0 : 1;
    row.frequency = static_cast<double>(row.exits) / c.paths;
    row.standard_error = std::sqrt(row.frequency * (1.0 - row.frequency) / c.paths);
    s.radii.push_back(row);
  }
  MomentRow m;
  m.growth = c.growth;
  m.mu = mu;
  m.M = model.nu3().total_mass();
  m.radius = r_max;
  m.phi_mean = mean_stat(phis);
  m.bound = moment_bound(upsilon, mu, m.M, c.x0 * c.x0, c.horizon);
  m.implied_second_moment = std::isfinite(m.bound) ? phi.inverse(m.bound) : INFINITY;
  m.within_3se = m.phi_mean.mean <= m.bound + 3.0 * m.phi_mean.standard_error;
  s.moment = m;

  for (double r : radii) s.columns.push_back("exit_time_R" + format_real(r));
  s.columns.push_back("final_state");
  s.columns.push_back("phi_final");
  for (std::size_t i = 0; i < c.paths; ++i) {
    DataRow row{i, seeds[i], exits[i]};
    row.values.push_back(finals[i]);
    row.values.push_back(phis[i]);
    s.rows.push_back(std::move(row));
  }
  return s;
}

namespace {

// Shared body of the uniqueness and convergence ladders: per path, one noise
// realization at the reference step, coarsened to every level.
struct LadderRun {
  std::vector<std::vector<double>> errors;  // [path][level]
  std::vector<std::vector<char>> exploded;
  std::vector<double> reference_final;
  std::vector<std::uint64_t> seeds;
  bool coupled = true;
};

LadderRun run_ladder(const ExperimentConfig& c, const CoefficientSet& model,
                     const std::vector<double>& levels, double reference, double power) {
  std::vector<int> factors;
  double work = static_cast<double>(step_count(c.horizon, reference));
  for (double h : levels) {
    factors.push_back(coarsening_factor(h, reference));
    work += static_cast<double>(step_count(c.horizon, h));
  }
  check_budget(c, work);
  if (step_count(c.horizon, reference) % static_cast<std::size_t>(factors.front()) != 0)
    throw DomainError("horizon must be a whole number of coarsest steps");

  LadderRun run;
  run.errors.assign(c.paths, std::vector<double>(levels.size(), 0.0));
  run.exploded.assign(c.paths, std::vector<char>(levels.size(), 0));
  run.reference_final.assign(c.paths, 0.0);
  run.seeds.assign(c.paths, 0);
  std::vector<char> coupled(c.paths, 1);
  parallel_for(c.paths, c.threads, [&](std::size_t i) {
    run.seeds[i] = derive_path_seed(c.master_seed, i);
    const NoiseRealization fine = sample_noise(model, c.horizon, reference, run.seeds[i]);
    const PathResult ref =
        simulate(model, fine, scheme_for(c, model, reference, c.explosion_radius), c.x0);
    run.reference_final[i] = ref.final_state();
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const NoiseRealization coarse = coarsen(fine, factors[l]);
      const PathResult p =
          simulate(model, coarse, scheme_for(c, model, levels[l], c.explosion_radius), c.x0);
      run.errors[i][l] = std::pow(std::abs(p.final_state() - ref.final_state()), power);
      run.exploded[i][l] = p.exploded || ref.exploded;
      if (!p.exploded && !ref.exploded && events_read(p, coarse) != events_read(ref, fine))
        coupled[i] = 0;
    }
  });
  run.coupled = std::all_of(coupled.begin(), coupled.end(), [](char v) { return v != 0; });
  return run;
}

void fill_levels(ExperimentSummary& s, const LadderRun& run, const std::vector<double>& levels) {
  for (std::size_t l = 0; l < levels.size(); ++l) {
    std::vector<double> column;
    LevelRow row;
    row.step = levels[l];
    for (std::size_t i = 0; i < run.errors.size(); ++i) {
      column.push_back(run.errors[i][l]);
      row.exploded += run.exploded[i][l] ? 1 : 0;
    }
    row.statistic = mean_stat(column);
    s.levels.push_back(row);
  }
  s.strictly_decreasing = true;
  for (std::size_t l = 1; l < s.levels.size(); ++l)
    s.strictly_decreasing =
        s.strictly_decreasing && s.levels[l].statistic.mean < s.levels[l - 1].statistic.mean;
  std::vector<double> hs, means;
  for (const LevelRow& r : s.levels) {
    hs.push_back(r.step);
    means.push_back(r.statistic.mean);
  }
  s.slope = log_log_slope(hs, means);
  s.coupling_verified = run.coupled;
  for (double h : levels) s.columns.push_back("level_h" + format_real(h));
  s.columns.push_back("reference_final_state");
  for (std::size_t i = 0; i < run.errors.size(); ++i) {
    DataRow row{i, run.seeds[i], run.errors[i]};
    row.values.push_back(run.reference_final[i]);
    s.rows.push_back(std::move(row));
  }
}

}  // namespace

ExperimentSummary run_uniqueness(const ExperimentConfig& c) {
  check_common(c);
  if (!(c.alpha > 0.0)) throw DomainError("uniqueness experiment needs alpha > 0");
  const std::vector<double> ladder = descending(c.steps);
  if (ladder.size() < 3) throw DomainError("uniqueness ladder needs at least 3 levels");
  const CoefficientSet model = c.resolved_model();
  const double reference = ladder.back();
  const std::vector<double> levels(ladder.begin(), ladder.end() - 1);
  const LadderRun run = run_ladder(c, model, levels, reference, c.alpha);
  ExperimentSummary s = start(c);
  s.reference_step = reference;
  fill_levels(s, run, levels);
  return s;
}

ExperimentSummary run_convergence(const ExperimentConfig& c) {
  check_common(c);
  const std::vector<double> levels = descending(c.steps);
  if (levels.size() < 4) throw DomainError("convergence ladder needs at least 4 levels");
  const CoefficientSet model = c.resolved_model();
  const double reference = levels.back() / 4.0;
  const LadderRun run = run_ladder(c, model, levels, reference, 1.0);
  ExperimentSummary s = start(c);
  s.reference_step = reference;
  fill_levels(s, run, levels);

  double worst = 0.0;
  for (std::size_t i = 0; i < run.errors.size(); ++i)
    for (double e : run.errors[i])
      worst = std::max(worst, e / std::max(1.0, std::abs(run.reference_final[i])));
  s.exact = worst <= 1e-12;
  if (s.exact) {
    s.slope.reset();
    return s;
  }
  // Confidence interval from batch means: order fitted on each of B
  // contiguous batches of paths, t-interval over the batch estimates.
  const std::size_t batches = std::min<std::size_t>(10, c.paths);
  std::vector<double> orders;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t lo = b * c.paths / batches;
    const std::size_t hi = (b + 1) * c.paths / batches;
    std::vector<double> means(levels.size(), 0.0);
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t l = 0; l < levels.size(); ++l) means[l] += run.errors[i][l] / (hi - lo);
    if (auto o = log_log_slope(levels, means)) orders.push_back(*o);
  }
  if (orders.size() >= 2) {
    const MeanStat o = mean_stat(orders);
    const boost::math::students_t dist(static_cast<double>(orders.size() - 1));
    const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    s.order_ci_low = o.mean - t * o.standard_error;
    s.order_ci_high = o.mean + t * o.standard_error;
  }
  return s;
}

ExperimentSummary run_nonconfluence(const ExperimentConfig& c) {
  check_common(c);
  if (c.x0 == c.y0) throw DomainError("nonconfluence needs x0 != y0");
  if (!(c.delta > 0.0)) throw DomainError("delta must be > 0");
  const CoefficientSet model = c.resolved_model();
  const double h = *std::min_element(c.steps.begin(), c.steps.end());
  check_budget(c, 2.0 * static_cast<double>(step_count(c.horizon, h)));

  std::string modulus_key = c.modulus.empty() ? "identity" : c.modulus;
  double scale = c.modulus_scale;
  if (c.modulus.empty() && !c.model)
    if (auto p = designated_profile(c.model_name, AssumptionId::A26)) {
      modulus_key = p->modulus;
      scale = p->modulus_scale;
    }
  Modulus modulus = builtin_modulus(modulus_key);
  if (scale != 1.0) modulus = scaled_modulus(modulus, scale);
  if (!c.skip_checks) {
    const AssumptionReport report = check_nonconfluence_conditions(model, modulus, c.alpha, c.delta);
    if (report.verdict == Verdict::violated)
      throw DomainError("model '" + model.label + "' fails the non-confluence conditions with modulus " +
                        modulus.label + "; set experiment.skip_checks = true to run anyway");
  }

  std::vector<double> eps = c.epsilons;
  if (eps.empty())
    for (int k = 0; k <= 8; ++k) eps.push_back(1e-6 * std::pow(5.0, k));
  std::sort(eps.begin(), eps.end());

  const SchemeConfig scheme = scheme_for(c, model, h, c.explosion_radius);
  std::vector<double> mins(c.paths), finals(c.paths);
  std::vector<std::uint64_t> seeds(c.paths);
  std::vector<char> coupled(c.paths, 1);
  parallel_for(c.paths, c.threads, [&](std::size_t i) {
    seeds[i] = derive_path_seed(c.master_seed, i);
    const NoiseRealization noise = sample_noise(model, c.horizon, h, seeds[i]);
    const PathResult x = simulate(model, noise, scheme, c.x0);
    const PathResult y = simulate(model, noise, scheme, c.y0);
    const std::size_t n = std::min(x.times.size(), y.times.size());
    double m = INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      if (x.times[j] != y.times[j]) coupled[i] = 0;
      m = std::min({m, std::abs(x.states[j] - y.states[j]),
                    std::abs(x.left_limits[j] - y.left_limits[j])});
    }
    if (!x.exploded && !y.exploded && x.noise_reads != y.noise_reads) coupled[i] = 0;
    mins[i] = m;
    finals[i] = std::abs(x.final_state() - y.final_state());
  });

  ExperimentSummary s = start(c);
  for (double e : eps) {
    EpsilonRow row;
    row.epsilon = e;
    for (double m : mins) row.below += m < e ? 1 : 0;
    row.fraction = static_cast<double>(row.below) / c.paths;
    s.epsilons.push_back(row);
  }
  s.min_distance = mean_stat(mins);
  s.smallest_distance = *std::min_element(mins.begin(), mins.end());
  s.constants = nonconfluence_constants(c.alpha, c.delta, model.nu2.total_mass());
  s.coupling_verified = std::all_of(coupled.begin(), coupled.end(), [](char v) { return v != 0; });
  s.columns = {"min_distance", "final_distance"};
  for (std::size_t i = 0; i < c.paths; ++i) s.rows.push_back({i, seeds[i], {mins[i], finals[i]}});
  return s;
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::explosion: return run_explosion(config);
    case ExperimentKind::uniqueness: return run_uniqueness(config);
    case ExperimentKind::nonconfluence: return run_nonconfluence(config);
    case ExperimentKind::convergence: return run_convergence(config);
  }
  throw DomainError("unknown experiment kind");
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json to_json(const MeanStat& m) {
  return {{"mean", m.mean}, {"standard_error", m.standard_error}, {"n", m.n}};
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const ExperimentSummary& s) {
  nlohmann::json stats;
  nlohmann::json bounds = nlohmann::json::object();
  switch (s.kind) {
    case ExperimentKind::explosion: {
      nlohmann::json rows = nlohmann::json::array();
      for (const RadiusRow& r : s.radii)
        rows.push_back({{"radius", r.radius},
                        {"exits", r.exits},
                        {"exceedance_frequency", r.frequency},
                        {"standard_error", r.standard_error},
                        {"n", s.rows.size()}});
      stats["radii"] = rows;
      if (s.moment) {
        const MomentRow& m = *s.moment;
        bounds["moment"] = {{"growth", m.growth},
                            {"mu", m.mu},
                            {"M", m.M},
                            {"radius", m.radius},
                            {"mc_phi_mean", to_json(m.phi_mean)},
                            {"moment_bound", m.bound},
                            {"implied_second_moment_bound", m.implied_second_moment},
                            {"within_3se", m.within_3se}};
      }
      break;
    }
    case ExperimentKind::uniqueness:
    case ExperimentKind::convergence: {
      nlohmann::json rows = nlohmann::json::array();
      for (const LevelRow& r : s.levels)
        rows.push_back({{"step", r.step}, {"statistic", to_json(r.statistic)}, {"exploded", r.exploded}});
      stats["levels"] = rows;
      stats["reference_step"] = s.reference_step;
      stats["slope"] = optional_number(s.slope);
      stats["strictly_decreasing"] = s.strictly_decreasing;
      stats["coupling_verified"] = s.coupling_verified;
      if (s.kind == ExperimentKind::convergence) {
        stats["order"] = s.exact ? nlohmann::json("exact") : optional_number(s.slope);
        stats["order_ci"] = {optional_number(s.order_ci_low), optional_number(s.order_ci_high)};
      }
      break;
    }
    case ExperimentKind::nonconfluence: {
      nlohmann::json rows = nlohmann::json::array();
      for (const EpsilonRow& r : s.epsilons)
        rows.push_back({{"epsilon", r.epsilon},
                        {"paths_below", r.below},
                        {"fraction", r.fraction},
                        {"n", s.rows.size()}});
      stats["epsilons"] = rows;
      stats["min_distance"] = to_json(s.min_distance);
      stats["smallest_min_distance"] = s.smallest_distance;
      stats["coupling_verified"] = s.coupling_verified;
      if (s.constants)
        bounds["constants"] = {{"K", s.constants->K},
                               {"K_prime", s.constants->K_prime},
                               {"K1", s.constants->K1},
                               {"K2", s.constants->K2}};
      break;
    }
  }
  return {{"experiment", to_string(s.kind)},
          {"config", s.config},
          {"statistics", stats},
          {"bounds", bounds},
          {"seeds", {{"master_seed", s.config.value("master_seed", 0ULL)},
                     {"derivation", "path i uses master_seed ^ splitmix64(i ^ 0xD1B54A32D192ED03)"}}}};
}

void write_data_csv(std::ostream& out, const ExperimentSummary& s) {
  out << "path_index,seed";
  for (const std::string& c : s.columns) out << ',' << c;
  out << '\n';
  for (const DataRow& r : s.rows) {
    out << r.path_index << ',' << r.seed;
    for (double v : r.values) out << ',' << format_real(v);
    out << '\n';
  }
}

void write_outputs(const ExperimentSummary& summary, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "summary.json");
    if (!out) throw Error("cannot write " + (dir / "summary.json").string());
    out << to_json(summary).dump(2) << '\n';
  }
  std::ofstream out(dir / "data.csv");
  if (!out) throw Error("cannot write " + (dir / "data.csv").string());
  write_data_csv(out, summary);
}

}  // namespace jsde
