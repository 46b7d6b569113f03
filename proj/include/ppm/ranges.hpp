#pragma once
// Per-record sensitive ranges, the exclusion probabilities lambda estimated
// from the stage-1 predictive, the composed weights alpha*, and the
// truncation masses P(R_i | theta).

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ppm/data.hpp"
#include "ppm/model.hpp"
#include "ppm/risk.hpp"

namespace ppm::ranges {

// Per-record interval [lo_i, hi_i] on the outcome scale, guaranteed to
// contain x_i; the unbounded sentinel stands for the whole support.
class RangeSpec {
 public:
  // [a * x_i, b * x_i] for every record; requires 0 < a <= 1 <= b, a < b.
  static RangeSpec multiplicative(const data::Dataset& data, double a,
                                  double b);
  static RangeSpec unbounded(std::size_t n);
  // Direct absolute intervals; each must contain its record's outcome.
  static RangeSpec absolute(const data::Dataset& data,
                            std::vector<std::pair<double, double>> intervals);
  // Records at or above the empirical (1 - top_fraction) outcome quantile
  // get the wide multiplier pair, the rest the base pair. The wide pair must
  // contain the base pair; ties at the threshold are included.
  static RangeSpec tail_widened(const data::Dataset& data,
                                std::pair<double, double> base,
                                std::pair<double, double> wide,
                                double top_fraction);

  std::size_t size() const { return lo_.size(); }
  bool is_unbounded(std::size_t i) const { return unbounded_[i] != 0; }
  bool all_unbounded() const { return finite_count_ == 0; }
  double lo(std::size_t i) const { return lo_[i]; }
  double hi(std::size_t i) const { return hi_[i]; }

  // Uniform multiplier pair when the spec was built from one (a, b).
  const std::optional<std::pair<double, double>>& multipliers() const {
    return multipliers_;
  }

 private:
  RangeSpec() = default;
  std::vector<double> lo_, hi_;
  std::vector<std::uint8_t> unbounded_;
  std::size_t finite_count_ = 0;
  std::optional<std::pair<double, double>> multipliers_;
};

struct KnowledgeProbs {
  std::vector<double> lambda;  // each in [0,1]
  std::size_t s_draws = 0;

  // Binomial Monte Carlo standard error of lambda_i.
  double se(std::size_t i) const;
};

// lambda_i = fraction of stage-1 posterior predictive draws falling outside
// R_i; draws for record i depend only on (seed, i), so candidate ranges
// share them. A value exactly on an endpoint counts as inside. Requires the
// unweighted stage-1 fit.
KnowledgeProbs estimate_lambda(const model::PosteriorDraws& stage1,
                               const data::Dataset& data,
                               const RangeSpec& ranges, std::size_t s_draws,
                               std::uint64_t seed);

struct ComposedWeights {
  std::vector<double> alpha_star;  // lambda_i + (1 - lambda_i) * alpha_i
};

ComposedWeights compose_alpha_star(const risk::RiskWeights& alpha,
                                   const KnowledgeProbs& lambda);

// P(lo_i < x <= hi_i | theta) under the model for record i; 1 for the
// unbounded sentinel, strictly below 1 for finite ranges.
double truncation_mass(const model::ThetaDraw& theta,
                       const data::Dataset& data, std::size_t i,
                       const RangeSpec& ranges);

}  // namespace ppm::ranges
