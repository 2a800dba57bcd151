// jsde_lab: simulate, verify, bound and experiment front end.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jsde/analysis.hpp"
#include "jsde/config.hpp"
#include "jsde/error.hpp"
#include "jsde/expression.hpp"
#include "jsde/format.hpp"
#include "jsde/harness.hpp"
#include "jsde/integrator.hpp"
#include "jsde/model.hpp"
#include "jsde/noise.hpp"
#include "jsde/verifier.hpp"

namespace {

using namespace jsde;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kUsage = 1, kViolated = 2, kNumerical = 3 };

struct Globals {
  std::string config_path;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::vector<std::string> overrides;
};

std::string key_reference() {
  std::ostringstream s;
  s << "\nConfiguration keys (file sections [model] [noise] [scheme] [experiment] [analysis],\n"
       "or --set section.key=value):\n";
  for (const KeyInfo& k : config_keys())
    s << "  " << k.name << " (" << k.type << ", default " << (k.default_value.empty() ? "\"\"" : k.default_value)
      << ")\n      " << k.description << "\n";
  s << "\nExit codes: 0 ok, 1 usage/config error, 2 verification found a violation,\n"
       "3 numerical error (range, quadrature, numerical domain).\n";
  return s.str();
}

// Seed precedence: JSDE_LAB_SEED < config file < --set < --seed.
RunConfig resolve(const Globals& g) {
  RunConfig config = g.config_path.empty() ? RunConfig{} : parse_config_file(g.config_path);
  if (!config.is_set("noise.seed")) {
    if (const char* env = std::getenv("JSDE_LAB_SEED")) {
      try {
        apply_override(config, std::string("noise.seed=") + env);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("JSDE_LAB_SEED: ") + e.what());
      }
      config.explicit_keys.erase("noise.seed");
    }
  }
  for (const std::string& o : g.overrides) apply_override(config, o);
  if (g.seed) config.noise.seed = *g.seed;
  return config;
}

fs::path output_dir(const Globals& g) {
  fs::path dir = g.output_dir.empty() ? fs::path(".") : fs::path(g.output_dir);
  fs::create_directories(dir);
  return dir;
}

int cmd_simulate(const Globals& g, const std::optional<std::string>& preset_name, bool dump_noise) {
  RunConfig config = resolve(g);
  if (preset_name) apply_override(config, "model.name=" + *preset_name);
  const ExperimentConfig ec = config.experiment_config();
  const CoefficientSet model = ec.resolved_model();
  SchemeConfig scheme = default_scheme(model, config.noise.step, config.scheme.explosion_radius);
  if (const auto t = config.taming()) scheme.taming = *t;
  const std::uint64_t seed = derive_path_seed(config.noise.seed, 0);
  const NoiseRealization noise = sample_noise(model, config.noise.horizon, config.noise.step, seed);
  const PathResult path = simulate(model, noise, scheme, config.scheme.x0);

  const fs::path dir = output_dir(g);
  {
    std::ofstream out(dir / "path.csv");
    if (!out) throw Error("cannot write " + (dir / "path.csv").string());
    write_path_csv(out, path, model.label, config.noise.step, config.scheme.explosion_radius);
  }
  if (dump_noise || config.scheme.dump_noise) {
    std::ofstream out(dir / "noise.csv");
    if (!out) throw Error("cannot write " + (dir / "noise.csv").string());
    write_noise_csv(out, noise);
  }
  std::cout << "model = " << model.label << "\nseed = " << seed << "\npoints = " << path.times.size()
            << "\nexploded = " << (path.exploded ? "true" : "false")
            << "\nfinal_state = " << format_real(path.states.back()) << "\n";
  return kOk;
}

VerificationProfile analysis_profile(const RunConfig& config, AssumptionId id) {
  VerificationProfile p;
  p.assumption = id;
  p.modulus = config.analysis.modulus;
  p.modulus_scale = config.analysis.modulus_scale;
  p.modulus2 = config.analysis.modulus;
  p.modulus2_scale = config.analysis.modulus_scale;
  p.growth = config.analysis.growth;
  p.mu = config.analysis.mu;
  p.alpha = config.analysis.alpha;
  p.delta = config.analysis.delta;
  return p;
}

void print_table(const AssumptionReport& r, std::ostream& out) {
  out << to_string(r.assumption_id) << ": " << to_string(r.verdict) << "\n";
  for (const ConditionResult& c : r.conditions) {
    out << "  " << c.name << (c.advisory ? " [advisory]" : "") << ": " << to_string(c.verdict) << " ("
        << c.samples << " samples";
    if (c.worst) out << ", worst slack " << format_real(c.worst->slack);
    out << ")\n";
  }
}

int cmd_verify(const Globals& g, const std::optional<std::string>& preset_name,
               const std::optional<std::string>& assumption, bool table) {
  RunConfig config = resolve(g);
  if (preset_name) apply_override(config, "model.name=" + *preset_name);
  if (assumption) apply_override(config, "analysis.assumption=" + *assumption);
  AssumptionId id;
  try {
    id = parse_assumption(config.analysis.assumption);
  } catch (const CatalogError& e) {
    throw ConfigError(std::string("analysis.assumption: ") + e.what());
  }
  const CoefficientSet model = config.build_model();

  // A preset's own profile applies unless the analysis keys were chosen explicitly.
  bool custom = config.model.name == "inline";
  for (const char* k : {"analysis.modulus", "analysis.modulus_scale", "analysis.growth", "analysis.mu",
                        "analysis.alpha", "analysis.delta"})
    custom = custom || config.is_set(k);
  std::optional<VerificationProfile> profile;
  if (!custom) profile = designated_profile(config.model.name, id);
  if (!profile) profile = analysis_profile(config, id);

  const AssumptionReport report = run_profile(model, *profile);
  nlohmann::json j = to_json(report);
  j["model"] = model.label;
  if (table)
    print_table(report, std::cout);
  else
    std::cout << j.dump(2) << "\n";
  if (!g.output_dir.empty()) {
    std::ofstream out(output_dir(g) / "report.json");
    out << j.dump(2) << "\n";
  }
  return report.verdict == Verdict::violated ? kViolated : kOk;
}

RealFn compile_t(const std::string& text, const char* key) {
  Expression e;
  try {
    e = Expression::parse(text);
  } catch (const ExpressionError& err) {
    throw ConfigError(std::string(key) + ": " + err.what());
  }
  if (e.uses('x') || e.uses('u')) throw ConfigError(std::string(key) + " may only use t");
  return [e](double t) { return e(0.0, 0.0, t); };
}

int cmd_bound(const Globals& g, const std::vector<std::string>& sets) {
  RunConfig config = resolve(g);
  for (const std::string& s : sets) apply_override(config, s);
  const AnalysisSection& a = config.analysis;
  const Modulus modulus = scaled_modulus(builtin_modulus(a.modulus), a.modulus_scale);
  const OmegaTransform omega(modulus, a.base_point);
  const RealFn g_fn = compile_t(a.g, "analysis.g");

  bool zero_f = false;
  try {
    zero_f = evaluate_constant(a.f) == 0.0;
  } catch (const ExpressionError&) {
  }
  const BihariBound result = zero_f ? bihari_bound(omega, zero_forcing, g_fn, a.t)
                                    : bihari_bound(omega, compile_t(a.f, "analysis.f"), g_fn, a.t);
  std::cout << "bound = " << format_real(result.bound) << "\n";
  if (!g.output_dir.empty()) {
    const nlohmann::json inputs = {{"f", a.f}, {"g", a.g}, {"t", a.t}};
    std::ofstream out(output_dir(g) / "bound.json");
    out << bound_record(omega, inputs, result).dump(2) << "\n";
  }
  return kOk;
}

int cmd_experiment(const Globals& g, const std::optional<std::string>& kind,
                   const std::optional<std::string>& preset_name) {
  RunConfig config = resolve(g);
  if (kind) apply_override(config, "experiment.kind=" + *kind);
  if (preset_name) apply_override(config, "model.name=" + *preset_name);
  ExperimentConfig ec = config.experiment_config();
  ec.threads = g.threads;
  const ExperimentSummary summary = run_experiment(ec);
  const fs::path dir = output_dir(g);
  write_outputs(summary, dir);
  std::cout << "wrote " << (dir / "summary.json").string() << " and " << (dir / "data.csv").string() << "\n";
  return kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Jump-SDE laboratory: simulate paths, verify coefficient assumptions, evaluate "
               "Bihari bounds and run Monte Carlo experiments."};
  app.require_subcommand(1);
  app.footer(key_reference());

  Globals g;
  auto add_globals = [&](CLI::App* a) {
    a->add_option("--config", g.config_path, "Configuration file")->check(CLI::ExistingFile);
    a->add_option("--output-dir", g.output_dir, "Directory for output files");
    a->add_option("--seed", g.seed, "Master seed (highest precedence)");
    a->add_option("--threads", g.threads, "Worker threads (0: all cores)");
    a->add_option("--set", g.overrides, "Override a key: section.key=value (repeatable)");
  };

  std::optional<std::string> preset_name, assumption, kind;
  bool dump_noise = false, table = false;
  std::vector<std::string> bound_sets;
  std::string f_text, g_text, modulus;
  std::optional<double> t_value, base_point, modulus_scale;

  auto* sim = app.add_subcommand("simulate", "Simulate one path; writes path.csv (and noise.csv)");
  add_globals(sim);
  sim->add_option("--preset", preset_name, "Preset model (overrides model.name)");
  sim->add_flag("--dump-noise", dump_noise, "Also write noise.csv");

  auto* ver = app.add_subcommand("verify", "Check a model's assumption conditions; prints a JSON report");
  add_globals(ver);
  ver->add_option("--preset", preset_name, "Preset model (overrides model.name)");
  ver->add_option("--assumption", assumption, "A22 | A23 | A24 | A25 | A26");
  ver->add_flag("--table", table, "Print a condition table instead of JSON");

  auto* bnd = app.add_subcommand("bound", "Evaluate the Bihari bound Omega^-1(Omega(f(t)) + int_0^t g)");
  add_globals(bnd);
  bnd->add_option("--modulus", modulus, "Modulus name");
  bnd->add_option("--modulus-scale", modulus_scale, "Factor applied to the modulus");
  bnd->add_option("--f", f_text, "f(t) expression");
  bnd->add_option("--g", g_text, "g(t) expression");
  bnd->add_option("--t", t_value, "Evaluation time");
  bnd->add_option("--base-point", base_point, "Omega base point");

  auto* exp = app.add_subcommand("experiment", "Run a Monte Carlo experiment; writes summary.json and data.csv");
  add_globals(exp);
  exp->add_option("--kind", kind, "explosion | uniqueness | nonconfluence | convergence");
  exp->add_option("--preset", preset_name, "Preset model (overrides model.name)");

  add_globals(&app);
  for (auto* sub : {sim, ver, bnd, exp}) sub->footer(key_reference());

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*sim) return cmd_simulate(g, preset_name, dump_noise);
    if (*ver) return cmd_verify(g, preset_name, assumption, table);
    if (*bnd) {
      if (!modulus.empty()) bound_sets.push_back("analysis.modulus=" + modulus);
      if (modulus_scale) bound_sets.push_back("analysis.modulus_scale=" + format_real(*modulus_scale));
      if (!f_text.empty()) bound_sets.push_back("analysis.f=" + f_text);
      if (!g_text.empty()) bound_sets.push_back("analysis.g=" + g_text);
      if (t_value) bound_sets.push_back("analysis.t=" + format_real(*t_value));
      if (base_point) bound_sets.push_back("analysis.base_point=" + format_real(*base_point));
      return cmd_bound(g, bound_sets);
    }
    return cmd_experiment(g, kind, preset_name);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const CatalogError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalDomainError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const RangeError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const QuadratureError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
