#pragma once
// Lipschitz sensitivity accounting. All four standards are instances of one
// scheme: take the sensitive-complement log likelihood per (record, draw)
// cell, then the max of its absolute value over draws and records; the
// budget is epsilon = 2 * delta.
//
//   unweighted       f
//   weighted         alpha_i * f
//   range_averaged   (1 - lambda_i) * alpha_i * f
//   range_truncated  alpha_i * f - log P(R_i | theta)

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ppm/data.hpp"
#include "ppm/model.hpp"
#include "ppm/ranges.hpp"
#include "ppm/risk.hpp"

namespace ppm::accounting {

enum class StandardKind { Unweighted, Weighted, RangeAveraged, RangeTruncated };

std::string kind_name(StandardKind k);

// A privacy standard tag; range-bearing kinds carry their RangeSpec.
class Standard {
 public:
  static Standard unweighted();
  static Standard weighted();
  static Standard range_averaged(ranges::RangeSpec ranges);
  static Standard range_truncated(ranges::RangeSpec ranges);

  StandardKind kind() const { return kind_; }
  const ranges::RangeSpec& range_spec() const;
  bool has_ranges() const { return ranges_.has_value(); }

 private:
  explicit Standard(StandardKind k) : kind_(k) {}
  StandardKind kind_;
  std::optional<ranges::RangeSpec> ranges_;
};

struct PrivacyAccount {
  std::vector<double> per_record_lipschitz;  // max over draws, per record
  double delta = 0.0;                        // max over records
  double epsilon = 0.0;                      // 2 * delta
  StandardKind kind = StandardKind::Unweighted;
  std::string label;
  std::size_t m_draws = 0;
  // (record, draw) cells where the truncated sensitive log likelihood came
  // out positive; possible for continuous outcomes with narrow ranges.
  std::uint64_t sign_flip_count = 0;
  std::optional<std::pair<double, double>> range_multipliers;
};

// Sensitive-complement log likelihood for one (record, draw) cell. lambda_i
// is required for range_averaged.
double sensitive_loglik(const Standard& standard, const model::ThetaDraw& theta,
                        const data::Dataset& data, std::size_t i,
                        double alpha_i,
                        std::optional<double> lambda_i = std::nullopt,
                        model::DensityScale scale =
                            model::DensityScale::Normal);

// Full account over the posterior's draws. The posterior must be the
// matching mechanism's stage-2 fit: unweighted for the unweighted standard,
// alpha-weighted for weighted and range_truncated, alpha*-weighted for
// range_averaged (checked against weights/lambda).
PrivacyAccount account(const Standard& standard,
                       const model::PosteriorDraws& posterior,
                       const data::Dataset& data,
                       const risk::RiskWeights& weights,
                       const ranges::KnowledgeProbs* lambda = nullptr,
                       model::DensityScale scale = model::DensityScale::Normal,
                       std::string label = "");

struct OrderingReport {
  struct Entry {
    std::string label;
    double epsilon;
    double delta;
  };
  std::vector<Entry> sorted_desc;
  // (label_a, label_b, epsilon_a - epsilon_b) for every pair, in sorted order.
  std::vector<std::tuple<std::string, std::string, double>> pairwise;
  // "a>b" -> whether epsilon_a > epsilon_b held, for the orderings the
  // standards imply (weighted above range-restricted, wider above narrower,
  // truncated above averaged at equal ranges).
  std::vector<std::pair<std::string, bool>> expected;
  std::vector<std::string> ties;

  bool all_expected_hold() const;
};

OrderingReport compare_accounts(const std::vector<PrivacyAccount>& accounts);

}  // namespace ppm::accounting
