#pragma once
// Posterior-predictive synthetic data and utility metrics against the
// confidential dataset.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ppm/data.hpp"
#include "ppm/model.hpp"

namespace ppm::synthesis {

enum class ThetaMode {
  PerRecord,   // fresh theta* index for every synthetic record
  PerDataset,  // one theta* index shared by the whole synthetic dataset
};

struct SyntheticDataset {
  std::vector<double> outcomes;        // positive, length n
  std::vector<std::uint32_t> draw_indices;
  std::string standard_label;
  std::uint64_t seed = 0;
};

// One synthetic dataset from the mechanism's stage-2 fit; deterministic
// under (seed, replicate).
SyntheticDataset synthesize(const model::PosteriorDraws& posterior,
                            const data::Dataset& data, std::uint64_t seed,
                            std::uint64_t replicate = 0,
                            ThetaMode mode = ThetaMode::PerRecord,
                            std::string label = "");

struct EcdfMetrics {
  double max_abs = 0.0;  // Kolmogorov-style max |F_c - F_s| on the merged support
  double avg_sq = 0.0;   // mean squared difference on the merged support
};

EcdfMetrics ecdf_metrics(std::span<const double> confidential,
                         std::span<const double> synthetic);

struct SummaryStats {
  double mean = 0.0;
  double median = 0.0;
  double q90 = 0.0;
};

// Quantiles interpolate linearly between order statistics
// (h = (n-1)p, the convention R calls type 7).
double quantile(std::vector<double> values, double p);
SummaryStats quantile_stats(std::span<const double> values);

struct UtilityReport {
  EcdfMetrics ecdf;
  SummaryStats synthetic;
  SummaryStats confidential;
};

UtilityReport utility_report(const data::Dataset& confidential,
                             const SyntheticDataset& synthetic);

}  // namespace ppm::synthesis
