#include "ppm/ranges.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ppm/kernels.hpp"

namespace ppm::ranges {

RangeSpec RangeSpec::multiplicative(const data::Dataset& data, double a,
                                    double b) {
  if (!(a > 0.0) || !(a <= 1.0) || !(b >= 1.0) || !(a < b)) {
    throw std::invalid_argument(
        "RangeSpec: multipliers must satisfy 0 < a <= 1 <= b");
  }
  RangeSpec r;
  const std::size_t n = data.n();
  r.lo_.resize(n);
  r.hi_.resize(n);
  r.unbounded_.assign(n, 0);
  r.finite_count_ = n;
  for (std::size_t i = 0; i < n; ++i) {
    r.lo_[i] = a * data.outcomes()[i];
    r.hi_[i] = b * data.outcomes()[i];
  }
  r.multipliers_ = std::make_pair(a, b);
  return r;
}

RangeSpec RangeSpec::unbounded(std::size_t n) {
  RangeSpec r;
  r.lo_.assign(n, 0.0);
  r.hi_.assign(n, std::numeric_limits<double>::infinity());
  r.unbounded_.assign(n, 1);
  r.finite_count_ = 0;
  return r;
}

RangeSpec RangeSpec::absolute(
    const data::Dataset& data,
    std::vector<std::pair<double, double>> intervals) {
  if (intervals.size() != data.n()) {
    throw std::invalid_argument("RangeSpec: interval count mismatch");
  }
  RangeSpec r;
  const std::size_t n = data.n();
  r.lo_.resize(n);
  r.hi_.resize(n);
  r.unbounded_.assign(n, 0);
  r.finite_count_ = n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [lo, hi] = intervals[i];
    const double x = data.outcomes()[i];
    if (!(lo > 0.0) || !(lo < hi)) {
      throw std::invalid_argument("RangeSpec: bad interval at record " +
                                  std::to_string(i));
    }
    if (x < lo || x > hi) {
      throw std::invalid_argument(
          "RangeSpec: record " + std::to_string(i) +
          " lies outside its declared sensitive interval");
    }
    r.lo_[i] = lo;
    r.hi_[i] = hi;
  }
  return r;
}

RangeSpec RangeSpec::tail_widened(const data::Dataset& data,
                                  std::pair<double, double> base,
                                  std::pair<double, double> wide,
                                  double top_fraction) {
  if (!(top_fraction >= 0.0) || !(top_fraction < 1.0)) {
    throw std::invalid_argument("RangeSpec: top_fraction must be in [0,1)");
  }
  if (wide.first > base.first || wide.second < base.second) {
    throw std::invalid_argument(
        "RangeSpec: wide range must contain the base range");
  }
  RangeSpec r = multiplicative(data, base.first, base.second);
  if (top_fraction == 0.0) return r;
  r.multipliers_.reset();  // mixed multipliers

  const std::size_t n = data.n();
  const std::size_t k = static_cast<std::size_t>(
      std::ceil(top_fraction * static_cast<double>(n)));
  // Threshold = k-th largest outcome; ties at the threshold widen too.
  std::vector<double> sorted = data.outcomes();
  std::nth_element(sorted.begin(), sorted.begin() + (n - k), sorted.end());
  const double threshold = sorted[n - k];
  for (std::size_t i = 0; i < n; ++i) {
    if (data.outcomes()[i] >= threshold) {
      r.lo_[i] = wide.first * data.outcomes()[i];
      r.hi_[i] = wide.second * data.outcomes()[i];
    }
  }
  return r;
}

double KnowledgeProbs::se(std::size_t i) const {
  const double l = lambda[i];
  return std::sqrt(l * (1.0 - l) / static_cast<double>(s_draws));
}

KnowledgeProbs estimate_lambda(const model::PosteriorDraws& stage1,
                               const data::Dataset& data,
                               const RangeSpec& ranges, std::size_t s_draws,
                               std::uint64_t seed) {
  if (ranges.size() != data.n()) {
    throw std::invalid_argument("estimate_lambda: ranges/data length "
                                "mismatch");
  }
  if (stage1.stage != model::FitStage::Unweighted) {
    throw std::invalid_argument(
        "estimate_lambda: requires the unweighted stage-1 posterior");
  }
  if (s_draws < 1) {
    throw std::invalid_argument("estimate_lambda: s_draws must be >= 1");
  }
  KnowledgeProbs out;
  out.s_draws = s_draws;
  out.lambda.assign(data.n(), 0.0);
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (ranges.is_unbounded(i)) continue;  // whole support: lambda is 0
    const auto draws = model::predictive_draw(stage1, data, i, s_draws, seed);
    const double lo = ranges.lo(i);
    const double hi = ranges.hi(i);
    std::size_t outside = 0;
    for (double v : draws) {
      if (v < lo || v > hi) ++outside;
    }
    out.lambda[i] =
        static_cast<double>(outside) / static_cast<double>(s_draws);
  }
  return out;
}

ComposedWeights compose_alpha_star(const risk::RiskWeights& alpha,
                                   const KnowledgeProbs& lambda) {
  if (alpha.alpha.size() != lambda.lambda.size()) {
    throw std::invalid_argument("compose_alpha_star: length mismatch");
  }
  ComposedWeights out;
  out.alpha_star.resize(alpha.alpha.size());
  for (std::size_t i = 0; i < alpha.alpha.size(); ++i) {
    const double l = lambda.lambda[i];
    out.alpha_star[i] = l + (1.0 - l) * alpha.alpha[i];
  }
  return out;
}

double truncation_mass(const model::ThetaDraw& theta,
                       const data::Dataset& data, std::size_t i,
                       const RangeSpec& ranges) {
  if (i >= ranges.size()) {
    throw std::invalid_argument("truncation_mass: record index out of range");
  }
  if (ranges.is_unbounded(i)) return 1.0;
  const double mu = data.row_mean(theta.beta, i);
  const double inv_sigma = 1.0 / std::sqrt(theta.sigma2);
  const double zlo = (kernels::log_e(ranges.lo(i)) - mu) * inv_sigma;
  const double zhi = (kernels::log_e(ranges.hi(i)) - mu) * inv_sigma;
  return kernels::interval_mass_e(zlo, zhi);
}

}  // namespace ppm::ranges
