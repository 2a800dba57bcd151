#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "jsde/harness.hpp"
#include "jsde/model.hpp"

namespace jsde {

// Run configuration. The file format is sectioned key-value text:
//
//   # comment
//   [model]
//   name = example_31
//   [noise]
//   seed = 42
//
// Sections: model, noise, scheme, experiment, analysis. Values are strings,
// booleans (true/false), integers, reals (any constant expression, e.g.
// 2^-8) or comma-separated real lists. Every key can also be set with
// `section.key=value` overrides.

struct ModelSection {
  std::string name = "example_31";  // preset name, or "inline"
  std::string label = "inline";
  std::string b = "0";       // expressions in x (drift, diffusion)
  std::string sigma = "0";
  std::string c1 = "0";      // expressions in x and u (jump maps)
  std::string c2 = "0";
  std::string nu1 = "none";  // measure strings
  std::string nu2 = "none";
  std::string u3 = "everything";
  bool superlinear_drift = false;
};

struct NoiseSection {
  std::uint64_t seed = 0;
  double horizon = 1.0;
  double step = 1.0 / 256.0;
  double truncation_epsilon = 0.0;
};

struct SchemeSection {
  std::string taming = "default";  // default | off | tamed
  double explosion_radius = 1e6;
  double x0 = 1.0;
  bool dump_noise = false;
};

struct ExperimentSection {
  std::string kind = "explosion";
  std::uint64_t paths = 1000;
  std::vector<double> steps;  // empty: {noise.step}
  std::vector<double> radii = {10.0, 50.0, 250.0};
  double alpha = 1.0;
  double x0 = 1.0;
  double y0 = 2.0;
  std::vector<double> epsilons;
  double delta = 0.5;
  std::string modulus;
  double modulus_scale = 1.0;
  std::string growth = "one";
  std::optional<double> mu;
  bool skip_checks = false;
  double budget = 2e9;
};

struct AnalysisSection {
  std::string modulus = "identity";
  double modulus_scale = 1.0;
  double base_point = 1.0;
  std::string f = "1";  // expressions in t
  std::string g = "1";
  double t = 1.0;
  std::string assumption = "A25";
  std::string growth = "one";
  std::optional<double> mu;
  double alpha = 1.0;
  double delta = 1.0;
};

struct RunConfig {
  ModelSection model;
  NoiseSection noise;
  SchemeSection scheme;
  ExperimentSection experiment;
  AnalysisSection analysis;
  // Keys assigned by the file or an override (not left at their default).
  std::set<std::string> explicit_keys;

  bool is_set(const std::string& key) const { return explicit_keys.count(key) != 0; }

  CoefficientSet build_model() const;
  ExperimentConfig experiment_config() const;
  std::optional<Taming> taming() const;
};

struct KeyInfo {
  std::string name;  // section.key
  std::string type;
  std::string default_value;
  std::string description;
};

/// Documented keys, in table order.
const std::vector<KeyInfo>& config_keys();

RunConfig parse_config_text(std::string_view text);
RunConfig parse_config_file(const std::filesystem::path& path);

/// Applies one `section.key=value` override.
void apply_override(RunConfig& config, std::string_view assignment);

/// Parses a measure string: none | lebesgue(a, b) | density(a, b, EXPR in u) |
/// atoms(u1:w1; u2:w2; ...).
MarkMeasure parse_measure(std::string_view text, std::string label);

/// everything | nothing | lo:hi[;lo:hi...] (closed intervals)
SubSupport parse_support(std::string_view text);

/// Levenshtein distance, used for "did you mean" suggestions.
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace jsde
