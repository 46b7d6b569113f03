#pragma once
// Confidential datasets: CSV ingestion and the simulated population used by
// the experiment harness.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ppm::data {

// A fixed table of strictly positive outcomes plus predictor columns
// (column-major). Immutable once built.
class Dataset {
 public:
  Dataset(std::vector<double> outcomes,
          std::vector<std::vector<double>> predictor_cols,
          std::vector<std::string> labels);

  std::size_t n() const { return outcomes_.size(); }
  std::size_t p() const { return cols_.size(); }

  const std::vector<double>& outcomes() const { return outcomes_; }
  // log(x_i), cached at construction; the likelihood kernels work on it.
  const std::vector<double>& log_outcomes() const { return log_outcomes_; }
  const std::vector<double>& col(std::size_t j) const { return cols_[j]; }
  const std::vector<std::string>& labels() const { return labels_; }
  // Pointers to each predictor column, for the batched kernels.
  const std::vector<const double*>& col_ptrs() const { return col_ptrs_; }

  // row_i . beta, accumulated in column order (matches the batched kernel).
  double row_mean(std::span<const double> beta, std::size_t i) const;

 private:
  std::vector<double> outcomes_;
  std::vector<double> log_outcomes_;
  std::vector<std::vector<double>> cols_;
  std::vector<const double*> col_ptrs_;
  std::vector<std::string> labels_;
};

struct PredictorSpec {
  std::string column;
  bool log_transform = false;

  std::string label() const {
    return log_transform ? "log(" + column + ")" : column;
  }
};

struct CsvSchema {
  std::string outcome = "y";
  std::vector<PredictorSpec> predictors;  // declared order is kept
  bool intercept = true;
};

// Header row required, UTF-8, '.' decimal separator, one record per row.
Dataset load_csv(const std::string& path, const CsvSchema& schema);

// Outcome column first, then the dataset's predictor columns (intercept
// included if present). %.17g round-trips through load_csv.
void write_csv(const Dataset& data, const std::string& outcome_label,
               const std::string& path);

struct SimulationConfig {
  std::size_t n = 2000;
  std::uint64_t seed = 1;
  double latent_mean = 2.0;  // z ~ Normal(latent_mean, latent_sd)
  double latent_sd = 1.0;
  double shift = 1.0;        // log x ~ Normal(z + shift, noise_sd)
  double noise_sd = 1.0;
};

// Skewed synthetic population: predictors are an intercept and z.
Dataset simulate(const SimulationConfig& config);

}  // namespace ppm::data
