#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ppm/data.hpp"
#include "ppm/model.hpp"
#include "ppm/risk.hpp"

using namespace ppm;

namespace {

data::Dataset intercept_only(std::vector<double> outcomes) {
  const std::size_t n = outcomes.size();
  return data::Dataset(std::move(outcomes), {std::vector<double>(n, 1.0)},
                       {"(intercept)"});
}

model::PosteriorDraws fixed_posterior(std::vector<model::ThetaDraw> draws,
                                      std::size_t n) {
  model::PosteriorDraws p;
  p.stage = model::FitStage::Unweighted;
  p.weights.assign(n, 1.0);
  p.coef_mean = {0.0};
  p.draws = std::move(draws);
  return p;
}

}  // namespace

TEST_CASE("loglik matrix equals per-cell re-evaluation") {
  data::SimulationConfig cfg;
  cfg.n = 23;
  cfg.seed = 2;
  const auto d = data::simulate(cfg);
  model::PriorConfig prior;
  std::vector<double> ones(d.n(), 1.0);
  const auto fit = model::fit_pseudo_posterior(d, ones, prior, 7, 11);

  const auto ll = risk::loglik_matrix(fit, d);
  REQUIRE(ll.n == d.n());
  REQUIRE(ll.m == 7);
  for (std::size_t i = 0; i < ll.n; ++i) {
    for (std::size_t m = 0; m < ll.m; ++m) {
      CHECK(ll.at(i, m) == model::log_density(fit.draws[m], d, i));
    }
  }

  // max over draws per record equals a scalar loop
  std::vector<double> max_abs(ll.n, 0.0);
  for (std::size_t i = 0; i < ll.n; ++i) {
    for (std::size_t m = 0; m < ll.m; ++m) {
      max_abs[i] = std::max(max_abs[i], std::fabs(ll.at(i, m)));
    }
  }
  const auto w = risk::compute_alpha(ll);
  for (std::size_t i = 0; i < ll.n; ++i) {
    if (max_abs[i] > 0.0) {
      CHECK(w.raw[i] == doctest::Approx(1.0 / max_abs[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("single-cell matrix and tail ordering") {
  auto d = intercept_only({std::exp(0.5), 1.0});
  auto post = fixed_posterior({model::ThetaDraw{{0.5}, 1.0}}, 2);
  const auto ll = risk::loglik_matrix(post, d);
  CHECK(ll.at(0, 0) == doctest::Approx(-0.9189385332046727).epsilon(1e-12));

  // A tail record scores below a modal record at every draw.
  auto d2 = intercept_only({std::exp(0.5), std::exp(6.0)});
  auto post2 = fixed_posterior({model::ThetaDraw{{0.5}, 1.0},
                                model::ThetaDraw{{0.4}, 2.0},
                                model::ThetaDraw{{0.7}, 0.5}},
                               2);
  const auto ll2 = risk::loglik_matrix(post2, d2);
  for (std::size_t m = 0; m < 3; ++m) {
    CHECK(ll2.at(1, m) < ll2.at(0, m));
  }
}

TEST_CASE("compute_alpha normalizes by the largest reciprocal") {
  risk::LoglikMatrix ll;
  ll.n = 2;
  ll.m = 1;
  ll.cells = {-4.0, -2.0};
  const auto w = risk::compute_alpha(ll);
  CHECK(w.raw[0] == doctest::Approx(0.25));
  CHECK(w.raw[1] == doctest::Approx(0.5));
  CHECK(w.alpha[0] == doctest::Approx(0.5));
  CHECK(w.alpha[1] == doctest::Approx(1.0));

  // identical records: everyone at 1
  risk::LoglikMatrix same;
  same.n = 3;
  same.m = 2;
  same.cells = {-3.0, -3.0, -3.0, -1.0, -1.0, -1.0};
  const auto ws = risk::compute_alpha(same);
  for (double a : ws.alpha) CHECK(a == 1.0);

  // single record is the normalization fixed point
  risk::LoglikMatrix one;
  one.n = 1;
  one.m = 1;
  one.cells = {-9.0};
  CHECK(risk::compute_alpha(one).alpha[0] == 1.0);

  // zero max |f| clamps to 1 with a counter
  risk::LoglikMatrix zero;
  zero.n = 2;
  zero.m = 1;
  zero.cells = {0.0, -2.0};
  const auto wz = risk::compute_alpha(zero);
  CHECK(wz.alpha[0] == 1.0);
  CHECK(wz.clamped_count == 1);
}

TEST_CASE("compute_alpha invariants on a real fit") {
  data::SimulationConfig cfg;
  cfg.n = 500;
  cfg.seed = 8;
  const auto d = data::simulate(cfg);
  model::PriorConfig prior;
  std::vector<double> ones(d.n(), 1.0);
  const auto fit = model::fit_pseudo_posterior(d, ones, prior, 100, 3);
  const auto ll = risk::loglik_matrix(fit, d);
  const auto w = risk::compute_alpha(ll);

  double amax = 0.0;
  for (double a : w.alpha) {
    CHECK(a > 0.0);
    CHECK(a <= 1.0);
    amax = std::max(amax, a);
  }
  CHECK(amax == 1.0);

  // monotone: larger max |f| never gets a larger alpha
  std::vector<double> max_abs(ll.n, 0.0);
  for (std::size_t i = 0; i < ll.n; ++i) {
    for (std::size_t m = 0; m < ll.m; ++m) {
      max_abs[i] = std::max(max_abs[i], std::fabs(ll.at(i, m)));
    }
  }
  for (std::size_t i = 0; i < ll.n; ++i) {
    for (std::size_t j = 0; j < ll.n; ++j) {
      if (max_abs[i] > max_abs[j]) {
        CHECK(w.alpha[i] <= w.alpha[j]);
      }
    }
  }
}

TEST_CASE("scale_weights is multiplicative and validated") {
  risk::RiskWeights w;
  w.alpha = {1.0, 0.4};
  w.raw = {2.0, 0.8};
  const auto same = risk::scale_weights(w, 1.0);
  CHECK(same.alpha == w.alpha);
  CHECK(same.scale_constant == 1.0);

  const auto half = risk::scale_weights(w, 0.5);
  CHECK(half.alpha[0] == doctest::Approx(0.5));
  CHECK(half.alpha[1] == doctest::Approx(0.2));
  CHECK(half.scale_constant == doctest::Approx(0.5));

  CHECK_THROWS_AS(risk::scale_weights(w, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(risk::scale_weights(w, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(risk::scale_weights(w, -0.1), std::invalid_argument);
}

TEST_CASE("calibrate_scale bisects a monotone budget") {
  // Synthetic budget curve epsilon(c) = 10c.
  auto eps = [](double c) { return 10.0 * c; };

  const auto hit = risk::calibrate_scale(eps, 5.0, 0.001, 60);
  CHECK(hit.converged);
  CHECK(hit.scale == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::fabs(hit.achieved_epsilon - 5.0) / 5.0 <= 0.001);

  // target equal to the uncalibrated budget: immediate fixed point
  const auto fixed = risk::calibrate_scale(eps, 10.0, 0.02, 25);
  CHECK(fixed.converged);
  CHECK(fixed.scale == 1.0);

  // target above the uncalibrated budget
  CHECK_THROWS_WITH_AS(risk::calibrate_scale(eps, 11.0, 0.02, 25),
                       doctest::Contains("above uncalibrated"),
                       std::runtime_error);

  // non-convergence returns the best probe, flagged
  const auto rough = risk::calibrate_scale(eps, 5.1, 1e-12, 3);
  CHECK_FALSE(rough.converged);
  CHECK(rough.achieved_epsilon > 0.0);
  CHECK(std::fabs(rough.achieved_epsilon - 5.1) < 1.0);
  CHECK(rough.trace.size() >= 3);

  // a floor in the budget (offset that does not scale) cannot bracket a
  // target below it; flagged, not bisected forever
  auto floored = [](double c) { return 4.0 + 10.0 * c; };
  const auto stuck = risk::calibrate_scale(floored, 2.0, 0.02, 25);
  CHECK_FALSE(stuck.converged);

  // convergence tolerance honored in the trace
  for (const auto& [c, e] : hit.trace) {
    CHECK(c >= 0.0);
    CHECK(e == doctest::Approx(10.0 * c));
  }
}

TEST_CASE("calibration against the real pipeline budget is monotone enough") {
  // Small end-to-end check that the closure wiring works: scale alpha, refit,
  // recompute the budget; epsilon should shrink with c.
  data::SimulationConfig cfg;
  cfg.n = 300;
  cfg.seed = 12;
  const auto d = data::simulate(cfg);
  model::PriorConfig prior;
  std::vector<double> ones(d.n(), 1.0);
  const auto stage1 = model::fit_pseudo_posterior(d, ones, prior, 200, 12);
  const auto alpha = risk::compute_alpha(risk::loglik_matrix(stage1, d));

  auto eps_at = [&](double c) {
    const auto wc = risk::scale_weights(alpha, c);
    const auto fit = model::fit_pseudo_posterior(d, wc.alpha, prior, 200, 12);
    const auto ll = risk::loglik_matrix(fit, d);
    double delta = 0.0;
    for (std::size_t i = 0; i < ll.n; ++i) {
      for (std::size_t m = 0; m < ll.m; ++m) {
        delta = std::max(delta, std::fabs(wc.alpha[i] * ll.at(i, m)));
      }
    }
    return 2.0 * delta;
  };
  const double e1 = eps_at(1.0);
  const double ehalf = eps_at(0.5);
  const double equarter = eps_at(0.25);
  CHECK(ehalf < e1);
  CHECK(equarter < ehalf);

  const auto cal = risk::calibrate_scale(eps_at, 0.7 * e1, 0.02, 25);
  CHECK(cal.converged);
  CHECK(std::fabs(cal.achieved_epsilon - 0.7 * e1) / (0.7 * e1) <= 0.02);
}
