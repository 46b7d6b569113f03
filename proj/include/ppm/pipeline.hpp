#pragma once
// Two-stage pipeline wiring: unweighted fit -> risk weights (and lambda per
// range) -> stage-2 pseudo-posterior fit -> accounting -> synthesis ->
// utility, plus the file artifacts a run leaves behind.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ppm/accounting.hpp"
#include "ppm/data.hpp"
#include "ppm/model.hpp"
#include "ppm/ranges.hpp"
#include "ppm/risk.hpp"
#include "ppm/synthesis.hpp"

namespace ppm::pipeline {

class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& message)
      : std::runtime_error("[stage " + stage + "] " + message),
        stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct TailWidening {
  std::pair<double, double> wide{0.2, 2.4};
  double top_fraction = 0.0;
};

struct VariantSpec {
  accounting::StandardKind kind = accounting::StandardKind::Weighted;
  std::optional<std::pair<double, double>> range;  // avg / trunc
  std::optional<TailWidening> widen;               // avg only

  std::string label() const;
};

// Parse "unweighted", "weighted", "avg(0.4,1.8)", "trunc(0.6,1.2)".
VariantSpec parse_variant(const std::string& text);

struct PipelineConfig {
  // Data source: CSV wins when set, otherwise the simulation config.
  std::optional<std::string> input_csv;
  data::CsvSchema schema;
  data::SimulationConfig sim;

  std::vector<VariantSpec> variants;
  std::size_t m_draws = 1000;
  std::size_t s_draws = 1000;
  std::uint64_t seed = 1;
  model::PriorConfig prior;
  model::DensityScale density_scale = model::DensityScale::Normal;
  synthesis::ThetaMode theta_mode = synthesis::ThetaMode::PerRecord;

  double weight_scale = 1.0;
  std::optional<double> target_epsilon;
  std::size_t synth_replicates = 1;

  // Experiment knobs.
  std::size_t replicates = 100;
  std::vector<std::size_t> n_grid{200, 400, 1600, 6400};
  std::vector<std::pair<double, double>> range_pairs{{0.4, 1.8}, {0.6, 1.2}};
  std::pair<double, double> wide_range{0.2, 2.4};
  std::vector<double> top_fractions{0.0, 0.01, 0.05, 0.10};

  std::string out_dir = "out";

  // The six-synthesizer set the experiments use, derived from range_pairs.
  std::vector<VariantSpec> default_variants() const;
};

nlohmann::json config_json(const PipelineConfig& config);

struct VariantResult {
  VariantSpec spec;
  std::string label;
  double scale_used = 1.0;
  std::optional<risk::CalibrationResult> calibration;
  std::shared_ptr<const model::PosteriorDraws> posterior;
  risk::RiskWeights weights;  // the alpha weights after any scaling
  std::optional<ranges::KnowledgeProbs> lambda;
  std::optional<std::vector<double>> alpha_star;
  accounting::PrivacyAccount account;
  std::vector<synthesis::SyntheticDataset> synthetic;
  std::vector<synthesis::UtilityReport> utility;
};

struct ReplicateResult {
  std::shared_ptr<const data::Dataset> dataset;
  std::shared_ptr<const model::PosteriorDraws> stage1;
  risk::RiskWeights alpha;  // base weights (weight_scale applied)
  std::vector<VariantResult> variants;
};

enum class RunDepth { Account, Synthesize, Utility };

// One full in-memory pipeline pass. `seed` drives both the simulated data
// and every mechanism stream; `n_override` substitutes the simulated sample
// size (used by the n-grid experiment).
ReplicateResult run_replicate(const PipelineConfig& config, std::uint64_t seed,
                              std::optional<std::size_t> n_override = {},
                              RunDepth depth = RunDepth::Utility);

struct RunReport {
  std::string out_dir;
  nlohmann::json document;          // exactly what run_report.json holds
  std::vector<std::string> files;   // artifacts written, relative to out_dir
};

// Runs one replicate at config.seed and writes all artifacts into
// config.out_dir: run_report.json, accounts_<label>.csv/.json, weights.csv,
// lambdas.csv, synthetic_<label>.csv, utility_<label>.json.
RunReport run_pipeline(const PipelineConfig& config,
                       RunDepth depth = RunDepth::Utility);

// FNV-1a 64-bit checksum of a file's bytes, as fixed-width hex.
std::string file_checksum_hex(const std::string& path);

}  // namespace ppm::pipeline
