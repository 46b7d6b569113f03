#pragma once
// The Bayesian synthesizer: a weighted normal regression on log outcomes
// with a conjugate normal-inverse-gamma posterior. Record i's likelihood
// contribution enters the fit exponentiated by its weight, which simply
// scales its share of every sufficient statistic.

#include <cstdint>
#include <span>
#include <vector>

#include "ppm/data.hpp"

namespace ppm::model {

struct PriorConfig {
  // Empty mean vector means zeros of the right length.
  std::vector<double> coef_mean;
  double coef_precision = 0.01;  // K0 = coef_precision * I
  double shape = 1.0;            // sigma2 ~ InvGamma(shape, rate)
  double rate = 1.0;
};

struct ThetaDraw {
  std::vector<double> beta;
  double sigma2 = 1.0;
};

enum class FitStage { Unweighted, Weighted };

struct PosteriorDraws {
  std::vector<ThetaDraw> draws;
  std::vector<double> weights;  // the weight vector the fit used
  FitStage stage = FitStage::Unweighted;

  // Conjugate hyperparameters of the fitted pseudo posterior.
  std::vector<double> coef_mean;       // m_n
  std::vector<double> coef_precision;  // K_n, p x p row-major
  double shape = 0.0;                  // a_n
  double rate = 0.0;                   // b_n

  std::size_t m_draws() const { return draws.size(); }
  std::size_t p() const { return coef_mean.size(); }

  // Exact marginal moments implied by the hyperparameters.
  double coef_mean_exact(std::size_t j) const { return coef_mean[j]; }
  double coef_var_exact(std::size_t j) const;  // Var(beta_j), needs a_n > 1
  double sigma2_mean_exact() const;            // needs a_n > 1
  double sigma2_var_exact() const;             // needs a_n > 2
};

// Weighted conjugate fit; draws are exact samples, deterministic under seed.
// weights must lie in [0,1] and not all be zero.
PosteriorDraws fit_pseudo_posterior(const data::Dataset& data,
                                    std::span<const double> weights,
                                    const PriorConfig& prior,
                                    std::size_t m_draws, std::uint64_t seed);

enum class DensityScale {
  Normal,     // density of log(x_i) on the log scale
  Lognormal,  // density of x_i itself (subtracts the log(x_i) Jacobian)
};

// Log density of record i under theta.
double log_density(const ThetaDraw& theta, const data::Dataset& data,
                   std::size_t i, DensityScale scale = DensityScale::Normal);

// Model CDF of the outcome at `value` for record i: P(x <= value | theta).
double cdf(const ThetaDraw& theta, const data::Dataset& data, std::size_t i,
           double value);

// Posterior predictive draws for record i: theta draws are cycled in order,
// one normal draw each, exponentiated. Deterministic under (seed, i).
std::vector<double> predictive_draw(const PosteriorDraws& posterior,
                                    const data::Dataset& data, std::size_t i,
                                    std::size_t s_draws, std::uint64_t seed);

}  // namespace ppm::model
