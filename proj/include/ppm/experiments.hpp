#pragma once
// The repeated-sample experiment harness: budget orderings across
// synthesizer variants, equal-budget calibration, tail-widened ranges, and
// the sample-size grid. Replicates are fanned out on seeds derived from the
// master seed and aggregated in replicate order.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppm/pipeline.hpp"

namespace ppm::experiments {

// Per-variant, per-replicate scalars collected by the harness.
struct VariantSeries {
  std::vector<double> epsilon;
  std::vector<double> delta;
  std::vector<double> max_ecdf;
  std::vector<double> avg_ecdf;
  std::vector<double> mean;
  std::vector<double> median;
  std::vector<double> q90;
};

struct OrderingExperiment {
  std::vector<std::string> labels;  // variant order used
  std::map<std::string, VariantSeries> series;
  // "a>b" -> fraction of replicates where epsilon_a > epsilon_b.
  std::vector<std::pair<std::string, double>> ordering_fractions;
  // Full chain weighted > trunc(wide) > trunc(narrow) > avg(wide) >
  // avg(narrow), when the six-variant set was run.
  double chain_fraction = 0.0;
  std::string chain_description;
  // Paired avg-ECDF difference weighted minus trunc(wide), per replicate.
  std::vector<double> paired_avg_ecdf_diff;

  nlohmann::json to_json() const;
};

OrderingExperiment run_experiment_budget_ordering(
    const pipeline::PipelineConfig& config, bool write_artifacts = true);

struct EqualBudgetExperiment {
  double target_epsilon = 0.0;
  struct Arm {
    std::string label;
    double scale = 1.0;
    double achieved_epsilon = 0.0;
    bool converged = true;
    synthesis::SummaryStats synthetic;  // stats averaged over synth replicates
    double closeness_mean = 0.0;        // |synthetic stat - confidential stat|
    double closeness_median = 0.0;
    double closeness_q90 = 0.0;
    double max_ecdf = 0.0;
    double avg_ecdf = 0.0;
  };
  synthesis::SummaryStats confidential;
  std::vector<Arm> arms;  // weighted, trunc(wide), trunc(narrow)

  // Label of the arm with the smallest closeness for each statistic.
  std::string best_mean, best_median, best_q90;

  nlohmann::json to_json() const;
};

// Calibrates the weighted and trunc(wide) synthesizers onto the
// trunc(narrow) budget (2% relative tolerance) and compares utility.
EqualBudgetExperiment run_experiment_equal_budget(
    const pipeline::PipelineConfig& config, bool write_artifacts = true);

struct TailWideningExperiment {
  std::vector<double> fractions;  // includes 0 = plain base range
  // epsilon[f][r] and max_ecdf[f][r], indexed like `fractions`.
  std::vector<std::vector<double>> epsilon;
  std::vector<std::vector<double>> max_ecdf;
  std::vector<double> weighted_epsilon;  // per replicate
  // Fractions of replicates with a strictly increasing epsilon chain
  // (base < widened ... < weighted) and a non-decreasing max-ECDF chain.
  double epsilon_chain_fraction = 0.0;
  double ecdf_chain_fraction = 0.0;

  nlohmann::json to_json() const;
};

TailWideningExperiment run_experiment_tail_widening(
    const pipeline::PipelineConfig& config, bool write_artifacts = true);

struct NGridExperiment {
  std::vector<std::size_t> grid;
  std::vector<std::string> labels;
  // delta[label][n_index][replicate]
  std::map<std::string, std::vector<std::vector<double>>> delta;
  // iqr[label][n_index]
  std::map<std::string, std::vector<double>> iqr;

  nlohmann::json to_json() const;
};

NGridExperiment run_experiment_n_grid(const pipeline::PipelineConfig& config,
                                      bool write_artifacts = true);

}  // namespace ppm::experiments
