#include "ppm/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ppm/kernels.hpp"
#include "ppm/rng.hpp"

namespace ppm::synthesis {

SyntheticDataset synthesize(const model::PosteriorDraws& posterior,
                            const data::Dataset& data, std::uint64_t seed,
                            std::uint64_t replicate, ThetaMode mode,
                            std::string label) {
  const std::size_t n = data.n();
  const std::size_t m = posterior.m_draws();
  SyntheticDataset out;
  out.standard_label = std::move(label);
  out.seed = seed;
  out.outcomes.resize(n);
  out.draw_indices.resize(n);

  std::uint32_t shared_idx = 0;
  if (mode == ThetaMode::PerDataset) {
    rng::Stream s(seed, rng::Stage::Synthesize, static_cast<std::uint64_t>(-1),
                  replicate);
    shared_idx = static_cast<std::uint32_t>(s.uniform_index(m));
  }
  for (std::size_t i = 0; i < n; ++i) {
    rng::Stream s(seed, rng::Stage::Synthesize, i, replicate);
    const std::uint32_t idx = mode == ThetaMode::PerRecord
                                  ? static_cast<std::uint32_t>(s.uniform_index(m))
                                  : shared_idx;
    const auto& th = posterior.draws[idx];
    const double mu = data.row_mean(th.beta, i);
    const double z = s.normal();
    out.draw_indices[i] = idx;
    out.outcomes[i] = kernels::exp_e(mu + std::sqrt(th.sigma2) * z);
  }
  return out;
}

EcdfMetrics ecdf_metrics(std::span<const double> confidential,
                         std::span<const double> synthetic) {
  if (confidential.empty() || synthetic.empty()) {
    throw std::invalid_argument("ecdf_metrics: empty input");
  }
  std::vector<double> c(confidential.begin(), confidential.end());
  std::vector<double> s(synthetic.begin(), synthetic.end());
  std::sort(c.begin(), c.end());
  std::sort(s.begin(), s.end());

  // Merged support keeps duplicates; both ECDFs are evaluated at each point.
  std::vector<double> merged;
  merged.reserve(c.size() + s.size());
  std::merge(c.begin(), c.end(), s.begin(), s.end(),
             std::back_inserter(merged));

  const double nc = static_cast<double>(c.size());
  const double ns = static_cast<double>(s.size());
  EcdfMetrics m;
  double sum_sq = 0.0;
  for (double v : merged) {
    const double fc =
        static_cast<double>(std::upper_bound(c.begin(), c.end(), v) -
                            c.begin()) /
        nc;
    const double fs =
        static_cast<double>(std::upper_bound(s.begin(), s.end(), v) -
                            s.begin()) /
        ns;
    const double d = fc - fs;
    m.max_abs = std::max(m.max_abs, std::fabs(d));
    sum_sq += d * d;
  }
  m.avg_sq = sum_sq / static_cast<double>(merged.size());
  return m;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) {
    throw std::invalid_argument("quantile: empty input");
  }
  if (!(p >= 0.0) || !(p <= 1.0)) {
    throw std::invalid_argument("quantile: p must be in [0,1]");
  }
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 1) return values[0];
  const double h = static_cast<double>(n - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return values[n - 1];
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

SummaryStats quantile_stats(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("quantile_stats: empty input");
  }
  SummaryStats st;
  double sum = 0.0;
  for (double v : values) sum += v;
  st.mean = sum / static_cast<double>(values.size());
  std::vector<double> tmp(values.begin(), values.end());
  st.median = quantile(tmp, 0.5);
  st.q90 = quantile(std::move(tmp), 0.9);
  return st;
}

UtilityReport utility_report(const data::Dataset& confidential,
                             const SyntheticDataset& synthetic) {
  if (synthetic.outcomes.size() != confidential.n()) {
    throw std::invalid_argument("utility_report: length mismatch");
  }
  UtilityReport rep;
  rep.ecdf = ecdf_metrics(confidential.outcomes(), synthetic.outcomes);
  rep.synthetic = quantile_stats(synthetic.outcomes);
  rep.confidential = quantile_stats(confidential.outcomes());
  return rep;
}

}  // namespace ppm::synthesis
