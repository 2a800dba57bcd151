#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "jsde/analysis.hpp"
#include "jsde/integrator.hpp"
#include "jsde/model.hpp"
#include "json.hpp"

namespace jsde {

// Monte Carlo experiments on the preset models. Every path i draws its own
// noise realization from derive_path_seed(master_seed, i); solutions that
// are compared (two resolutions, two initial points) share that realization.

enum class ExperimentKind { explosion, uniqueness, nonconfluence, convergence };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::explosion;
  std::string model_name = "example_31";
  std::optional<CoefficientSet> model;  // inline model; overrides model_name
  double horizon = 1.0;
  std::vector<double> steps = {1.0 / 256.0};
  std::size_t paths = 1000;
  std::uint64_t master_seed = 0;
  std::vector<double> radii = {10.0, 50.0, 250.0};
  double alpha = 1.0;
  double x0 = 1.0;
  double y0 = 2.0;
  std::optional<Taming> taming;       // unset: on for super-linear drift
  double explosion_radius = 1e6;      // stopping radius outside the explosion experiment
  double truncation_epsilon = 0.0;    // small-jump cutoff when nu1 has infinite mass

  // explosion: growth function and mu for the moment-bound row (mu unset: grid supremum)
  std::string growth = "one";
  std::optional<double> mu;
  // nonconfluence: epsilon ladder and the constants' parameters
  std::vector<double> epsilons;  // empty: 1e-6 * 5^k, k = 0..8
  double delta = 0.5;
  std::string modulus;           // empty: the preset's designated choice, else identity
  double modulus_scale = 1.0;
  // Run even when the model fails the experiment's assumption check.
  bool skip_checks = false;

  double budget = 2e9;  // cap on paths x total steps
  unsigned threads = 0;  // 0: hardware concurrency
  std::filesystem::path output_dir;  // empty: nothing written

  CoefficientSet resolved_model() const;
};

nlohmann::json to_json(const ExperimentConfig& config);

struct MeanStat {
  double mean = 0.0;
  double standard_error = 0.0;  // sample std / sqrt(n)
  std::size_t n = 0;
};

MeanStat mean_stat(const std::vector<double>& values);

struct RadiusRow {
  double radius = 0.0;
  std::size_t exits = 0;
  double frequency = 0.0;
  double standard_error = 0.0;
};

struct MomentRow {
  std::string growth;
  double mu = 0.0;
  double M = 0.0;
  double radius = 0.0;
  MeanStat phi_mean;  // E_MC[phi(X^2(T ^ tau_R))]
  double bound = 0.0;
  double implied_second_moment = 0.0;
  bool within_3se = false;
};

struct LevelRow {
  double step = 0.0;
  MeanStat statistic;
  std::size_t exploded = 0;
};

struct EpsilonRow {
  double epsilon = 0.0;
  std::size_t below = 0;
  double fraction = 0.0;
};

struct DataRow {
  std::size_t path_index = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;
};

struct ExperimentSummary {
  ExperimentKind kind = ExperimentKind::explosion;
  nlohmann::json config;

  // explosion
  std::vector<RadiusRow> radii;
  std::optional<MomentRow> moment;
  // uniqueness (|Delta_T|^alpha against the finest step) and convergence (|error|)
  std::vector<LevelRow> levels;
  double reference_step = 0.0;
  std::optional<double> slope;
  bool strictly_decreasing = false;
  std::optional<double> order_ci_low;
  std::optional<double> order_ci_high;
  bool exact = false;
  // nonconfluence
  std::vector<EpsilonRow> epsilons;
  MeanStat min_distance;
  double smallest_distance = INFINITY;
  std::optional<NonconfluenceConstants> constants;
  // shared-noise instrumentation: every coupled pair read the same jump events
  bool coupling_verified = true;

  std::vector<std::string> columns;
  std::vector<DataRow> rows;
};

nlohmann::json to_json(const ExperimentSummary& summary);

ExperimentSummary run_explosion(const ExperimentConfig& config);
ExperimentSummary run_uniqueness(const ExperimentConfig& config);
ExperimentSummary run_nonconfluence(const ExperimentConfig& config);
ExperimentSummary run_convergence(const ExperimentConfig& config);
ExperimentSummary run_experiment(const ExperimentConfig& config);

/// summary.json and data.csv in `dir` (created if missing).
void write_outputs(const ExperimentSummary& summary, const std::filesystem::path& dir);
void write_data_csv(std::ostream& out, const ExperimentSummary& summary);

/// Calls body(i) for i in [0, count) on `threads` workers. Results must be
/// written to per-index slots; the first exception (lowest index) is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace jsde
