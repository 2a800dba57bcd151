#include "jsde/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "jsde/error.hpp"
#include "jsde/expression.hpp"

namespace jsde {
namespace {

// Bad value; `offset` is relative to the start of the value text.
struct ValueError {
  std::string what;
  std::size_t offset = 0;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string as_string(std::string_view v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\'')))
    v = v.substr(1, v.size() - 2);
  return std::string(v);
}

bool as_bool(std::string_view v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ValueError{"expects a boolean (true/false), got '" + std::string(v) + "'"};
}

std::uint64_t as_uint(std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw ValueError{"expects a non-negative integer, got '" + std::string(v) + "'",
                     static_cast<std::size_t>(ptr - v.data())};
  return out;
}

double as_real(std::string_view v, std::size_t base = 0) {
  try {
    return evaluate_constant(v);
  } catch (const ExpressionError& e) {
    throw ValueError{std::string("expects a real number: ") + e.what(), base + e.position()};
  }
}

std::vector<double> as_real_list(std::string_view v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const std::size_t comma = v.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? v.size() : comma;
    const std::string_view item = v.substr(start, end - start);
    const std::size_t lead = item.find_first_not_of(" \t");
    out.push_back(as_real(trim(item), start + (lead == std::string_view::npos ? 0 : lead)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> as_optional_real(std::string_view v) {
  if (v.empty() || v == "auto") return std::nullopt;
  return as_real(v);
}

void check_expression(std::string_view v, std::string_view allowed) {
  try {
    const Expression e = Expression::parse(v);
    for (char var : {'x', 'u', 't'})
      if (e.uses(var) && allowed.find(var) == std::string_view::npos)
        throw ValueError{"variable '" + std::string(1, var) + "' is not allowed here (allowed: " +
                         std::string(allowed.empty() ? "none" : allowed) + ")"};
  } catch (const ExpressionError& e) {
    throw ValueError{std::string("bad expression: ") + e.what(), e.position()};
  }
}

struct KeyEntry {
  KeyInfo info;
  std::function<void(RunConfig&, std::string_view)> set;
};

std::string real_text(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::vector<KeyEntry> build_table() {
  std::vector<KeyEntry> t;
  auto str = [&](std::string name, std::string def, std::string desc,
                 std::function<std::string&(RunConfig&)> field) {
    t.push_back({{std::move(name), "string", std::move(def), std::move(desc)},
                 [field](RunConfig& c, std::string_view v) { field(c) = as_string(v); }});
  };
  auto expr = [&](std::string name, std::string def, std::string vars, std::string desc,
                  std::function<std::string&(RunConfig&)> field) {
    t.push_back({{std::move(name), "expression(" + vars + ")", std::move(def), std::move(desc)},
                 [field, vars](RunConfig& c, std::string_view v) {
                   const std::string s = as_string(v);
                   check_expression(s, vars);
                   field(c) = s;
                 }});
  };
  auto real = [&](std::string name, double def, std::string desc,
                  std::function<double&(RunConfig&)> field) {
    t.push_back({{std::move(name), "real", real_text(def), std::move(desc)},
                 [field](RunConfig& c, std::string_view v) { field(c) = as_real(v); }});
  };
  auto opt_real = [&](std::string name, std::string desc,
                      std::function<std::optional<double>&(RunConfig&)> field) {
    t.push_back({{std::move(name), "real or auto", "auto", std::move(desc)},
                 [field](RunConfig& c, std::string_view v) { field(c) = as_optional_real(v); }});
  };
  auto list = [&](std::string name, std::string def, std::string desc,
                  std::function<std::vector<double>&(RunConfig&)> field) {
    t.push_back({{std::move(name), "real list", std::move(def), std::move(desc)},
                 [field](RunConfig& c, std::string_view v) { field(c) = as_real_list(v); }});
  };
  auto boolean = [&](std::string name, bool def, std::string desc,
                     std::function<bool&(RunConfig&)> field) {
    t.push_back({{std::move(name), "bool", def ? "true" : "false", std::move(desc)},
                 [field](RunConfig& c, std::string_view v) { field(c) = as_bool(v); }});
  };
  auto uint = [&](std::string name, std::uint64_t def, std::string desc,
                  std::function<std::uint64_t&(RunConfig&)> field) {
    t.push_back({{std::move(name), "integer", std::to_string(def), std::move(desc)},
                 [field](RunConfig& c, std::string_view v) { field(c) = as_uint(v); }});
  };

  str("model.name", "example_31", "preset name, or 'inline' to use the expression keys",
      [](RunConfig& c) -> std::string& { return c.model.name; });
  str("model.label", "inline", "label of an inline model",
      [](RunConfig& c) -> std::string& { return c.model.label; });
  expr("model.b", "0", "x", "inline drift b(x)", [](RunConfig& c) -> std::string& { return c.model.b; });
  expr("model.sigma", "0", "x", "inline diffusion sigma(x)",
       [](RunConfig& c) -> std::string& { return c.model.sigma; });
  expr("model.c1", "0", "xu", "inline small-jump map c1(x, u)",
       [](RunConfig& c) -> std::string& { return c.model.c1; });
  expr("model.c2", "0", "xu", "inline large-jump map c2(x, u)",
       [](RunConfig& c) -> std::string& { return c.model.c2; });
  str("model.nu1", "none", "small-jump measure: none | lebesgue(a,b) | density(a,b,EXPR) | atoms(u:w;...)",
      [](RunConfig& c) -> std::string& { return c.model.nu1; });
  str("model.nu2", "none", "large-jump measure (same forms as model.nu1)",
      [](RunConfig& c) -> std::string& { return c.model.nu2; });
  str("model.u3", "everything", "large-jump marks kept in the reduced equation: everything | nothing | lo:hi;...",
      [](RunConfig& c) -> std::string& { return c.model.u3; });
  boolean("model.superlinear_drift", false, "inline drift grows super-linearly (taming on by default)",
          [](RunConfig& c) -> bool& { return c.model.superlinear_drift; });

  uint("noise.seed", 0, "master seed (env JSDE_LAB_SEED < config < --set < --seed)",
       [](RunConfig& c) -> std::uint64_t& { return c.noise.seed; });
  real("noise.horizon", 1.0, "time horizon T", [](RunConfig& c) -> double& { return c.noise.horizon; });
  real("noise.step", 1.0 / 256.0, "base step h", [](RunConfig& c) -> double& { return c.noise.step; });
  real("noise.truncation_epsilon", 0.0, "small-jump cutoff for infinite nu1",
       [](RunConfig& c) -> double& { return c.noise.truncation_epsilon; });

  str("scheme.taming", "default", "default | off | tamed",
      [](RunConfig& c) -> std::string& { return c.scheme.taming; });
  real("scheme.explosion_radius", 1e6, "stop a path at the first |X| >= R",
       [](RunConfig& c) -> double& { return c.scheme.explosion_radius; });
  real("scheme.x0", 1.0, "initial state for simulate", [](RunConfig& c) -> double& { return c.scheme.x0; });
  boolean("scheme.dump_noise", false, "simulate also writes noise.csv",
          [](RunConfig& c) -> bool& { return c.scheme.dump_noise; });

  str("experiment.kind", "explosion", "explosion | uniqueness | nonconfluence | convergence",
      [](RunConfig& c) -> std::string& { return c.experiment.kind; });
  uint("experiment.paths", 1000, "Monte Carlo paths N",
       [](RunConfig& c) -> std::uint64_t& { return c.experiment.paths; });
  list("experiment.steps", "noise.step", "step ladder",
       [](RunConfig& c) -> std::vector<double>& { return c.experiment.steps; });
  list("experiment.radii", "10, 50, 250", "explosion radius ladder",
       [](RunConfig& c) -> std::vector<double>& { return c.experiment.radii; });
  real("experiment.alpha", 1.0, "exponent alpha", [](RunConfig& c) -> double& { return c.experiment.alpha; });
  real("experiment.x0", 1.0, "initial point", [](RunConfig& c) -> double& { return c.experiment.x0; });
  real("experiment.y0", 2.0, "second initial point (nonconfluence)",
       [](RunConfig& c) -> double& { return c.experiment.y0; });
  list("experiment.epsilons", "1e-6 * 5^k, k = 0..8", "distance thresholds (nonconfluence)",
       [](RunConfig& c) -> std::vector<double>& { return c.experiment.epsilons; });
  real("experiment.delta", 0.5, "separation constant delta (nonconfluence)",
       [](RunConfig& c) -> double& { return c.experiment.delta; });
  str("experiment.modulus", "", "modulus for the nonconfluence check (empty: preset default)",
      [](RunConfig& c) -> std::string& { return c.experiment.modulus; });
  real("experiment.modulus_scale", 1.0, "factor applied to experiment.modulus",
       [](RunConfig& c) -> double& { return c.experiment.modulus_scale; });
  str("experiment.growth", "one", "growth function for the moment bound: one | log | log_loglog",
      [](RunConfig& c) -> std::string& { return c.experiment.growth; });
  opt_real("experiment.mu", "growth constant mu (auto: grid supremum)",
           [](RunConfig& c) -> std::optional<double>& { return c.experiment.mu; });
  boolean("experiment.skip_checks", false, "run even if the model fails the experiment's assumption check",
          [](RunConfig& c) -> bool& { return c.experiment.skip_checks; });
  real("experiment.budget", 2e9, "cap on paths x steps", [](RunConfig& c) -> double& { return c.experiment.budget; });

  str("analysis.modulus", "identity", "modulus for bound/verify",
      [](RunConfig& c) -> std::string& { return c.analysis.modulus; });
  real("analysis.modulus_scale", 1.0, "factor applied to analysis.modulus",
       [](RunConfig& c) -> double& { return c.analysis.modulus_scale; });
  real("analysis.base_point", 1.0, "Omega base point", [](RunConfig& c) -> double& { return c.analysis.base_point; });
  expr("analysis.f", "1", "t", "Bihari f(t)", [](RunConfig& c) -> std::string& { return c.analysis.f; });
  expr("analysis.g", "1", "t", "Bihari g(t)", [](RunConfig& c) -> std::string& { return c.analysis.g; });
  real("analysis.t", 1.0, "Bihari evaluation time", [](RunConfig& c) -> double& { return c.analysis.t; });
  str("analysis.assumption", "A25", "assumption for verify: A22..A26",
      [](RunConfig& c) -> std::string& { return c.analysis.assumption; });
  str("analysis.growth", "one", "growth function for verify A23",
      [](RunConfig& c) -> std::string& { return c.analysis.growth; });
  opt_real("analysis.mu", "growth constant for verify A23 (auto: grid supremum)",
           [](RunConfig& c) -> std::optional<double>& { return c.analysis.mu; });
  real("analysis.alpha", 1.0, "alpha for verify A24/A26", [](RunConfig& c) -> double& { return c.analysis.alpha; });
  real("analysis.delta", 1.0, "delta0 (A24/A25) or delta (A26) for verify",
       [](RunConfig& c) -> double& { return c.analysis.delta; });
  return t;
}

const std::vector<KeyEntry>& table() {
  static const std::vector<KeyEntry> t = build_table();
  return t;
}

const std::vector<std::string> kSections = {"model", "noise", "scheme", "experiment", "analysis"};

std::string nearest(std::string_view name, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const std::string& c : candidates) {
    const std::size_t d = edit_distance(name, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<std::string> key_names() {
  std::vector<std::string> names;
  for (const KeyEntry& e : table()) names.push_back(e.info.name);
  return names;
}

std::string unknown_key_message(std::string_view key) {
  const std::vector<std::string> names = key_names();
  std::string msg = "unknown key '" + std::string(key) + "'; did you mean '" + nearest(key, names) +
                    "'? valid keys:";
  for (const std::string& n : names) msg += " " + n;
  return msg;
}

const KeyEntry* find_key(std::string_view name) {
  for (const KeyEntry& e : table())
    if (e.info.name == name) return &e;
  return nullptr;
}

// Assigns key = value; errors carry (line, column of the value) when known.
void assign(RunConfig& config, std::string_view key, std::string_view value, int line,
            int key_column, int value_column) {
  const KeyEntry* entry = find_key(key);
  if (!entry) throw ConfigError(unknown_key_message(key), line, key_column);
  try {
    entry->set(config, value);
  } catch (const ValueError& e) {
    throw ConfigError(std::string(key) + " " + e.what, line,
                      line > 0 ? value_column + static_cast<int>(e.offset) : 0);
  } catch (const Error& e) {
    throw ConfigError(std::string(key) + ": " + e.what(), line, value_column);
  }
  config.explicit_keys.insert(std::string(key));
}

std::vector<std::string> split_top_level(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == sep && depth == 0) {
      out.emplace_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.emplace_back(trim(s.substr(start)));
  return out;
}

RealFn compile_x(const std::string& text, const std::string& key) {
  try {
    const Expression e = Expression::parse(text);
    return [e](double x) { return e(x); };
  } catch (const ExpressionError& err) {
    throw ConfigError(key + ": " + err.what());
  }
}

JumpFn compile_xu(const std::string& text, const std::string& key) {
  try {
    const Expression e = Expression::parse(text);
    return [e](double x, double u) { return e(x, u); };
  } catch (const ExpressionError& err) {
    throw ConfigError(key + ": " + err.what());
  }
}

}  // namespace

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> keys = [] {
    std::vector<KeyInfo> out;
    for (const KeyEntry& e : table()) out.push_back(e.info);
    return out;
  }();
  return keys;
}

RunConfig parse_config_text(std::string_view text) {
  RunConfig config;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const int indent = static_cast<int>(line.find_first_not_of(" \t")) + 1;

    if (body.front() == '[') {
      if (body.back() != ']')
        throw ConfigError("section header is missing ']'", line_no, indent + static_cast<int>(body.size()));
      const std::string name(trim(body.substr(1, body.size() - 2)));
      if (std::find(kSections.begin(), kSections.end(), name) == kSections.end())
        throw ConfigError("unknown section '" + name + "'; did you mean '" + nearest(name, kSections) +
                              "'? sections: model, noise, scheme, experiment, analysis",
                          line_no, indent + 1);
      section = name;
      continue;
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("expected 'key = value'", line_no, indent + static_cast<int>(body.size()));
    const std::string_view key = trim(body.substr(0, eq));
    if (key.empty()) throw ConfigError("missing key before '='", line_no, indent);
    const std::string_view raw_value = body.substr(eq + 1);
    const std::size_t lead = raw_value.find_first_not_of(" \t");
    const std::string_view value = trim(raw_value);
    const int value_column =
        indent + static_cast<int>(eq) + 1 + static_cast<int>(lead == std::string_view::npos ? 0 : lead);
    std::string full;
    if (key.find('.') != std::string_view::npos)
      full = std::string(key);
    else if (section.empty())
      throw ConfigError("key '" + std::string(key) + "' appears before any [section]", line_no, indent);
    else
      full = section + "." + std::string(key);
    assign(config, full, value, line_no, indent, value_column);
  }
  return config;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("override '" + std::string(assignment) + "' must look like section.key=value");
  assign(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), 0, 0, 0);
}

MarkMeasure parse_measure(std::string_view text, std::string label) {
  text = trim(text);
  if (text.empty() || text == "none" || text == "zero") return MarkMeasure();
  const std::size_t open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')')
    throw ConfigError("measure '" + std::string(text) +
                      "' must be none | lebesgue(a,b) | density(a,b,EXPR) | atoms(u:w;...)");
  const std::string_view kind = trim(text.substr(0, open));
  const std::string_view inner = text.substr(open + 1, text.size() - open - 2);
  auto constant = [&](const std::string& s) {
    try {
      return evaluate_constant(s);
    } catch (const ExpressionError& e) {
      throw ConfigError("measure '" + std::string(text) + "': " + e.what());
    }
  };
  if (kind == "lebesgue") {
    const auto args = split_top_level(inner, ',');
    if (args.size() != 2) throw ConfigError("lebesgue(a, b) takes two arguments");
    return MarkMeasure::lebesgue(constant(args[0]), constant(args[1]), std::move(label));
  }
  if (kind == "density") {
    const auto args = split_top_level(inner, ',');
    if (args.size() != 3) throw ConfigError("density(a, b, EXPR) takes three arguments");
    Expression e;
    try {
      e = Expression::parse(args[2]);
    } catch (const ExpressionError& err) {
      throw ConfigError("density expression: " + std::string(err.what()));
    }
    if (e.uses('x') || e.uses('t')) throw ConfigError("density expression may only use u");
    return MarkMeasure::from_density({Interval{constant(args[0]), constant(args[1]), true, true}},
                                     [e](double u) { return e(0.0, u); }, std::move(label));
  }
  if (kind == "atoms") {
    std::vector<Atom> atoms;
    for (const std::string& item : split_top_level(inner, ';')) {
      if (item.empty()) continue;
      const std::size_t colon = item.find(':');
      if (colon == std::string::npos) throw ConfigError("atom '" + item + "' must look like mark:weight");
      atoms.push_back({constant(item.substr(0, colon)), constant(item.substr(colon + 1))});
    }
    return MarkMeasure::from_atoms(std::move(atoms), std::move(label));
  }
  throw ConfigError("unknown measure kind '" + std::string(kind) + "' (none, lebesgue, density, atoms)");
}

SubSupport parse_support(std::string_view text) {
  text = trim(text);
  if (text == "everything" || text == "all") return SubSupport::everything();
  if (text == "nothing" || text == "none" || text.empty()) return SubSupport::nothing();
  std::vector<Interval> pieces;
  for (const std::string& item : split_top_level(text, ';')) {
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("support piece '" + item + "' must look like lo:hi");
    try {
      pieces.push_back({evaluate_constant(item.substr(0, colon)), evaluate_constant(item.substr(colon + 1)),
                        true, true});
    } catch (const ExpressionError& e) {
      throw ConfigError("support piece '" + item + "': " + e.what());
    }
  }
  return SubSupport::of(std::move(pieces));
}

CoefficientSet RunConfig::build_model() const {
  if (model.name != "inline") {
    for (const char* k : {"model.b", "model.sigma", "model.c1", "model.c2", "model.nu1", "model.nu2",
                          "model.u3", "model.superlinear_drift", "model.label"})
      if (is_set(k))
        throw ConfigError(std::string(k) + " only applies when model.name = inline (got '" + model.name + "')");
    return preset(model.name);
  }
  CoefficientSet m;
  m.label = model.label;
  m.b = compile_x(model.b, "model.b");
  m.sigma = compile_x(model.sigma, "model.sigma");
  m.c1 = compile_xu(model.c1, "model.c1");
  m.c2 = compile_xu(model.c2, "model.c2");
  m.nu1 = parse_measure(model.nu1, "nu1");
  m.nu2 = parse_measure(model.nu2, "nu2");
  m.u3 = parse_support(model.u3);
  m.superlinear_drift = model.superlinear_drift;
  return m;
}

std::optional<Taming> RunConfig::taming() const {
  if (scheme.taming == "default") return std::nullopt;
  if (scheme.taming == "off") return Taming::off;
  if (scheme.taming == "tamed") return Taming::drift_tamed;
  throw ConfigError("scheme.taming must be default, off or tamed (got '" + scheme.taming + "')");
}

ExperimentConfig RunConfig::experiment_config() const {
  ExperimentConfig c;
  try {
    c.kind = parse_experiment_kind(experiment.kind);
  } catch (const CatalogError& e) {
    throw ConfigError(std::string("experiment.kind: ") + e.what());
  }
  if (model.name == "inline")
    c.model = build_model();
  else
    c.model_name = model.name;
  c.horizon = noise.horizon;
  c.steps = experiment.steps.empty() ? std::vector<double>{noise.step} : experiment.steps;
  c.paths = experiment.paths;
  c.master_seed = noise.seed;
  c.radii = experiment.radii;
  c.alpha = experiment.alpha;
  c.x0 = experiment.x0;
  c.y0 = experiment.y0;
  c.taming = taming();
  c.explosion_radius = scheme.explosion_radius;
  c.truncation_epsilon = noise.truncation_epsilon;
  c.growth = experiment.growth;
  c.mu = experiment.mu;
  c.epsilons = experiment.epsilons;
  c.delta = experiment.delta;
  c.modulus = experiment.modulus;
  c.modulus_scale = experiment.modulus_scale;
  c.skip_checks = experiment.skip_checks;
  c.budget = experiment.budget;
  return c;
}

}  // namespace jsde
