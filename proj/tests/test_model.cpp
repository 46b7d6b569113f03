#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>
#include <vector>

#include "ppm/data.hpp"
#include "ppm/model.hpp"

using namespace ppm;

namespace {

data::Dataset intercept_only(std::vector<double> outcomes) {
  const std::size_t n = outcomes.size();
  return data::Dataset(std::move(outcomes), {std::vector<double>(n, 1.0)},
                       {"(intercept)"});
}

// Unweighted normal-inverse-gamma update from sufficient statistics, for an
// intercept-only model. Independent of the fit's own algebra.
struct NigHand {
  double kn, mn, an, bn;
};
NigHand nig_update(double sum_w, double sum_wy, double sum_wyy,
                   const model::PriorConfig& prior) {
  NigHand h;
  h.kn = sum_w + prior.coef_precision;
  h.mn = sum_wy / h.kn;  // prior mean zero
  h.an = prior.shape + 0.5 * sum_w;
  h.bn = prior.rate + 0.5 * (sum_wyy - h.mn * h.mn * h.kn);
  return h;
}

}  // namespace

TEST_CASE("log_density matches hand-evaluated normal densities") {
  // One record with outcome e^2, intercept-only, beta pinned at log(x).
  auto d = intercept_only({std::exp(2.0), 1.0});
  model::ThetaDraw theta{{2.0}, 1.0};

  const double at_mode = model::log_density(theta, d, 0);
  CHECK(at_mode == doctest::Approx(-0.9189385332046727).epsilon(1e-12));

  // Lognormal scale subtracts log(x) exactly.
  const double logn = model::log_density(theta, d, 0,
                                         model::DensityScale::Lognormal);
  CHECK(logn == at_mode - 2.0);

  // x = e, mean = log x: the spec's -1.9189 example.
  auto d2 = intercept_only({std::exp(1.0), 1.0});
  model::ThetaDraw theta2{{1.0}, 1.0};
  CHECK(model::log_density(theta2, d2, 0, model::DensityScale::Lognormal) ==
        doctest::Approx(-1.9189385332046727).epsilon(1e-12));

  // three standard deviations out
  auto d3 = intercept_only({std::exp(3.0), 1.0});
  model::ThetaDraw theta3{{0.0}, 1.0};
  CHECK(model::log_density(theta3, d3, 0) ==
        doctest::Approx(-0.9189385332046727 - 4.5).epsilon(1e-12));
}

TEST_CASE("lognormal scale equals normal scale minus log(x), exactly") {
  auto d = intercept_only({0.37, 12.0, 440.0, 2.0});
  model::ThetaDraw theta{{1.3}, 2.7};
  for (std::size_t i = 0; i < d.n(); ++i) {
    const double fn = model::log_density(theta, d, i);
    const double fl =
        model::log_density(theta, d, i, model::DensityScale::Lognormal);
    CHECK(fl == fn - d.log_outcomes()[i]);
  }
}

TEST_CASE("cdf hits the lognormal median and tail limits") {
  auto d = intercept_only({5.0, 1.0});
  model::ThetaDraw theta{{std::log(5.0)}, 0.49};
  CHECK(model::cdf(theta, d, 0, 5.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(model::cdf(theta, d, 0, 1e-30) < 1e-10);
  CHECK(model::cdf(theta, d, 0, 1e30) > 1.0 - 1e-10);

  // Phi(0.588) against an independent erfc evaluation
  model::ThetaDraw std_theta{{0.0}, 1.0};
  const double got = model::cdf(std_theta, d, 0, std::exp(0.588));
  const double want = 0.5 * std::erfc(-0.588 / std::sqrt(2.0));
  CHECK(std::fabs(got - want) < 1e-12);
  CHECK(got == doctest::Approx(0.7218).epsilon(2e-4));

  // monotone in value; interval probabilities inside (0,1)
  double prev = 0.0;
  for (double v : {0.5, 1.0, 2.0, 5.0, 9.0, 50.0}) {
    const double c = model::cdf(theta, d, 0, v);
    CHECK(c >= prev);
    prev = c;
  }
  const double inner =
      model::cdf(theta, d, 0, 5.0 * 1.8) - model::cdf(theta, d, 0, 5.0 * 0.4);
  CHECK(inner > 0.0);
  CHECK(inner < 1.0);
}

TEST_CASE("unweighted fit reproduces the hand conjugate update") {
  std::mt19937_64 gen(71);
  std::normal_distribution<double> noise(0.0, 0.8);
  std::vector<double> x;
  for (int i = 0; i < 40; ++i) x.push_back(std::exp(1.5 + noise(gen)));
  auto d = intercept_only(x);

  model::PriorConfig prior;
  std::vector<double> ones(d.n(), 1.0);
  const auto fit = model::fit_pseudo_posterior(d, ones, prior, 4, 1);

  double sy = 0.0, syy = 0.0;
  for (double ly : d.log_outcomes()) {
    sy += ly;
    syy += ly * ly;
  }
  const auto h = nig_update(static_cast<double>(d.n()), sy, syy, prior);
  CHECK(fit.coef_precision[0] == doctest::Approx(h.kn).epsilon(1e-12));
  CHECK(fit.coef_mean[0] == doctest::Approx(h.mn).epsilon(1e-12));
  CHECK(fit.shape == doctest::Approx(h.an).epsilon(1e-12));
  CHECK(fit.rate == doctest::Approx(h.bn).epsilon(1e-12));
  CHECK(fit.stage == model::FitStage::Unweighted);
}

TEST_CASE("all-0.5 weights equal the half-sample sufficient statistics") {
  std::mt19937_64 gen(72);
  std::normal_distribution<double> noise(0.0, 1.1);
  std::vector<double> x;
  for (int i = 0; i < 30; ++i) x.push_back(std::exp(2.0 + noise(gen)));
  auto d = intercept_only(x);

  model::PriorConfig prior;
  std::vector<double> half(d.n(), 0.5);
  const auto fit = model::fit_pseudo_posterior(d, half, prior, 4, 1);
  CHECK(fit.stage == model::FitStage::Weighted);

  double sy = 0.0, syy = 0.0;
  for (double ly : d.log_outcomes()) {
    sy += ly;
    syy += ly * ly;
  }
  const auto h =
      nig_update(0.5 * static_cast<double>(d.n()), 0.5 * sy, 0.5 * syy, prior);
  CHECK(fit.coef_precision[0] == doctest::Approx(h.kn).epsilon(1e-12));
  CHECK(fit.coef_mean[0] == doctest::Approx(h.mn).epsilon(1e-12));
  CHECK(fit.shape == doctest::Approx(h.an).epsilon(1e-12));
  CHECK(fit.rate == doctest::Approx(h.bn).epsilon(1e-12));
}

TEST_CASE("scaling all weights scales the data share of every statistic") {
  data::SimulationConfig cfg;
  cfg.n = 200;
  cfg.seed = 3;
  const auto d = data::simulate(cfg);
  model::PriorConfig prior;

  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> uw(0.1, 1.0);
  std::vector<double> w(d.n());
  for (auto& v : w) v = uw(gen);
  std::vector<double> wc = w;
  const double c = 0.37;
  for (auto& v : wc) v *= c;

  const auto f1 = model::fit_pseudo_posterior(d, w, prior, 2, 1);
  const auto f2 = model::fit_pseudo_posterior(d, wc, prior, 2, 1);
  const std::size_t p = d.p();
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) {
      const double prior_term = a == b ? prior.coef_precision : 0.0;
      const double s1 = f1.coef_precision[a * p + b] - prior_term;
      const double s2 = f2.coef_precision[a * p + b] - prior_term;
      CHECK(s2 == doctest::Approx(c * s1).epsilon(1e-10));
    }
  }
  CHECK(f2.shape - prior.shape ==
        doctest::Approx(c * (f1.shape - prior.shape)).epsilon(1e-10));
}

TEST_CASE("posterior recovers the simulated slope") {
  data::SimulationConfig cfg;
  cfg.n = 2000;
  cfg.seed = 17;
  const auto d = data::simulate(cfg);
  model::PriorConfig prior;
  std::vector<double> ones(d.n(), 1.0);
  const auto fit = model::fit_pseudo_posterior(d, ones, prior, 1000, 17);

  const double slope_sd = std::sqrt(fit.coef_var_exact(1));
  CHECK(std::fabs(fit.coef_mean[1] - 1.0) < 3.0 * slope_sd);
  // draw moments agree with the exact moments
  double mean_draw = 0.0;
  for (const auto& th : fit.draws) mean_draw += th.beta[1];
  mean_draw /= static_cast<double>(fit.m_draws());
  CHECK(std::fabs(mean_draw - fit.coef_mean[1]) < 5.0 * slope_sd / std::sqrt(1000.0));
}

TEST_CASE("fit rejects bad weights") {
  auto d = intercept_only({1.0, 2.0, 3.0});
  model::PriorConfig prior;
  std::vector<double> zeros(3, 0.0);
  CHECK_THROWS_WITH_AS(model::fit_pseudo_posterior(d, zeros, prior, 2, 1),
                       doctest::Contains("insufficient effective sample"),
                       std::runtime_error);
  std::vector<double> toobig = {0.5, 1.5, 0.2};
  CHECK_THROWS_AS(model::fit_pseudo_posterior(d, toobig, prior, 2, 1),
                  std::invalid_argument);
  std::vector<double> wrong_len = {0.5, 0.5};
  CHECK_THROWS_AS(model::fit_pseudo_posterior(d, wrong_len, prior, 2, 1),
                  std::invalid_argument);
}

TEST_CASE("fit draws are deterministic under the seed") {
  data::SimulationConfig cfg;
  cfg.n = 100;
  cfg.seed = 21;
  const auto d = data::simulate(cfg);
  model::PriorConfig prior;
  std::vector<double> ones(d.n(), 1.0);
  const auto f1 = model::fit_pseudo_posterior(d, ones, prior, 50, 99);
  const auto f2 = model::fit_pseudo_posterior(d, ones, prior, 50, 99);
  for (std::size_t m = 0; m < 50; ++m) {
    CHECK(f1.draws[m].sigma2 == f2.draws[m].sigma2);
    CHECK(f1.draws[m].beta == f2.draws[m].beta);
  }
}

TEST_CASE("predictive draws: degenerate variance collapses onto exp(mean)") {
  auto d = intercept_only({7.0, 7.0});
  model::PosteriorDraws post;
  post.stage = model::FitStage::Unweighted;
  post.weights = {1.0, 1.0};
  post.coef_mean = {1.3};
  post.draws = {model::ThetaDraw{{1.3}, 1e-16}};
  const auto xs = model::predictive_draw(post, d, 0, 5, 42);
  for (double v : xs) {
    CHECK(std::fabs(v - std::exp(1.3)) / std::exp(1.3) < 1e-6);
  }
}

TEST_CASE("predictive draws cover the median half the time") {
  auto d = intercept_only({2.0, 2.0});
  model::PosteriorDraws post;
  post.stage = model::FitStage::Unweighted;
  post.weights = {1.0, 1.0};
  post.coef_mean = {0.4};
  post.draws = {model::ThetaDraw{{0.4}, 1.7}};
  const std::size_t s = 200000;
  const auto xs = model::predictive_draw(post, d, 0, s, 7);
  const double median = std::exp(0.4);
  std::size_t below = 0;
  for (double v : xs) below += v <= median ? 1 : 0;
  const double frac = static_cast<double>(below) / static_cast<double>(s);
  const double se = 0.5 / std::sqrt(static_cast<double>(s));
  CHECK(std::fabs(frac - 0.5) < 3.0 * se);

  const auto again = model::predictive_draw(post, d, 0, 1000, 7);
  const auto again2 = model::predictive_draw(post, d, 0, 1000, 7);
  CHECK(again == again2);
}
