#include "ppm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ppm/kernels.hpp"
#include "ppm/rng.hpp"

namespace ppm::data {

Dataset::Dataset(std::vector<double> outcomes,
                 std::vector<std::vector<double>> predictor_cols,
                 std::vector<std::string> labels)
    : outcomes_(std::move(outcomes)),
      cols_(std::move(predictor_cols)),
      labels_(std::move(labels)) {
  if (outcomes_.size() < 2) {
    throw std::invalid_argument("Dataset: need at least 2 records");
  }
  for (std::size_t i = 0; i < outcomes_.size(); ++i) {
    if (!(outcomes_[i] > 0.0)) {
      throw std::invalid_argument("Dataset: outcome at row " +
                                  std::to_string(i + 1) +
                                  " is not strictly positive");
    }
  }
  if (cols_.empty()) {
    throw std::invalid_argument("Dataset: need at least one predictor column");
  }
  for (const auto& c : cols_) {
    if (c.size() != outcomes_.size()) {
      throw std::invalid_argument("Dataset: predictor column length mismatch");
    }
  }
  if (labels_.size() != cols_.size()) {
    throw std::invalid_argument("Dataset: label count mismatch");
  }
  log_outcomes_.resize(outcomes_.size());
  kernels::log_v(outcomes_.data(), outcomes_.size(), log_outcomes_.data());
  col_ptrs_.reserve(cols_.size());
  for (const auto& c : cols_) col_ptrs_.push_back(c.data());
}

double Dataset::row_mean(std::span<const double> beta, std::size_t i) const {
  double acc = cols_[0][i] * beta[0];
  for (std::size_t j = 1; j < cols_.size(); ++j) {
    acc = acc + cols_[j][i] * beta[j];
  }
  return acc;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

double parse_number(const std::string& field, std::size_t row,
                    const std::string& column) {
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw std::runtime_error("load_csv: row " + std::to_string(row) +
                             ": cannot parse '" + field + "' in column " +
                             column);
  }
  return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_csv: cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("load_csv: empty file " + path);
  }
  const std::vector<std::string> header = split_csv_line(line);

  auto column_index = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw std::runtime_error("load_csv: column '" + name +
                               "' not found in header of " + path);
    }
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t outcome_idx = column_index(schema.outcome);
  std::vector<std::size_t> pred_idx;
  pred_idx.reserve(schema.predictors.size());
  for (const auto& spec : schema.predictors) {
    pred_idx.push_back(column_index(spec.column));
  }

  std::vector<double> outcomes;
  std::vector<std::vector<double>> raw(schema.predictors.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("load_csv: row " + std::to_string(row) +
                               ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    }
    const double y = parse_number(fields[outcome_idx], row, schema.outcome);
    if (!(y > 0.0)) {
      throw std::runtime_error("load_csv: row " + std::to_string(row) +
                               ": outcome must be strictly positive, got " +
                               fields[outcome_idx]);
    }
    outcomes.push_back(y);
    for (std::size_t j = 0; j < pred_idx.size(); ++j) {
      double v = parse_number(fields[pred_idx[j]], row,
                              schema.predictors[j].column);
      if (schema.predictors[j].log_transform) {
        if (!(v > 0.0)) {
          throw std::runtime_error(
              "load_csv: row " + std::to_string(row) + ": column " +
              schema.predictors[j].column +
              " must be positive for a log transform");
        }
        v = kernels::log_e(v);
      }
      raw[j].push_back(v);
    }
  }

  std::vector<std::vector<double>> cols;
  std::vector<std::string> labels;
  if (schema.intercept) {
    cols.emplace_back(outcomes.size(), 1.0);
    labels.emplace_back("(intercept)");
  }
  for (std::size_t j = 0; j < raw.size(); ++j) {
    cols.push_back(std::move(raw[j]));
    labels.push_back(schema.predictors[j].label());
  }
  if (cols.empty()) {
    throw std::runtime_error(
        "load_csv: schema declares no predictors and no intercept");
  }
  return Dataset(std::move(outcomes), std::move(cols), std::move(labels));
}

void write_csv(const Dataset& data, const std::string& outcome_label,
               const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_csv: cannot open " + path);
  }
  out << outcome_label;
  for (const auto& l : data.labels()) out << ',' << l;
  out << '\n';
  char buf[40];
  for (std::size_t i = 0; i < data.n(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", data.outcomes()[i]);
    out << buf;
    for (std::size_t j = 0; j < data.p(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.col(j)[i]);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("write_csv: write failed for " + path);
  }
}

Dataset simulate(const SimulationConfig& config) {
  if (config.n < 2) {
    throw std::invalid_argument("simulate: n must be >= 2");
  }
  if (!(config.latent_sd > 0.0) || !(config.noise_sd > 0.0)) {
    throw std::invalid_argument("simulate: latent_sd and noise_sd must be > 0");
  }
  std::vector<double> z(config.n);
  std::vector<double> logx(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    rng::Stream zs(config.seed, rng::Stage::SimLatent, i);
    z[i] = config.latent_mean + config.latent_sd * zs.normal();
    rng::Stream xs(config.seed, rng::Stage::SimNoise, i);
    logx[i] = z[i] + config.shift + config.noise_sd * xs.normal();
  }
  std::vector<double> x(config.n);
  kernels::exp_v(logx.data(), config.n, x.data());

  std::vector<std::vector<double>> cols;
  cols.emplace_back(config.n, 1.0);
  cols.push_back(std::move(z));
  return Dataset(std::move(x), std::move(cols), {"(intercept)", "z"});
}

}  // namespace ppm::data
