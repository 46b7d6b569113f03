#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ppm/data.hpp"
#include "ppm/model.hpp"
#include "ppm/risk.hpp"
#include "ppm/synthesis.hpp"

using namespace ppm;

namespace {

data::Dataset intercept_only(std::vector<double> outcomes) {
  const std::size_t n = outcomes.size();
  return data::Dataset(std::move(outcomes), {std::vector<double>(n, 1.0)},
                       {"(intercept)"});
}

}  // namespace

TEST_CASE("degenerate posterior synthesizes exp(mean) up to 1e-6") {
  auto d = intercept_only({3.0, 4.0, 5.0});
  model::PosteriorDraws post;
  post.stage = model::FitStage::Weighted;
  post.weights = {0.5, 0.5, 0.5};
  post.coef_mean = {1.1};
  post.draws = {model::ThetaDraw{{1.1}, 1e-16}};
  const auto syn = synthesis::synthesize(post, d, 3);
  for (double v : syn.outcomes) {
    CHECK(std::fabs(v - std::exp(1.1)) / std::exp(1.1) < 1e-6);
    CHECK(v > 0.0);
  }
  CHECK(syn.outcomes.size() == d.n());
}

TEST_CASE("synthesis is seed-deterministic and seed-sensitive") {
  data::SimulationConfig cfg;
  cfg.n = 300;
  cfg.seed = 6;
  const auto d = data::simulate(cfg);
  model::PriorConfig prior;
  std::vector<double> ones(d.n(), 1.0);
  const auto fit = model::fit_pseudo_posterior(d, ones, prior, 50, 6);

  const auto a = synthesis::synthesize(fit, d, 11);
  const auto b = synthesis::synthesize(fit, d, 11);
  const auto c = synthesis::synthesize(fit, d, 12);
  CHECK(a.outcomes == b.outcomes);
  CHECK(a.draw_indices == b.draw_indices);
  CHECK(a.outcomes != c.outcomes);

  // distinct synth replicates from one seed
  const auto r2 = synthesis::synthesize(fit, d, 11, 1);
  CHECK(a.outcomes != r2.outcomes);

  // per-dataset mode shares one draw index
  const auto shared =
      synthesis::synthesize(fit, d, 11, 0, synthesis::ThetaMode::PerDataset);
  for (auto idx : shared.draw_indices) {
    CHECK(idx == shared.draw_indices[0]);
  }
}

TEST_CASE("identical fits give identical synthetic data across mechanisms") {
  // weighted and range-truncated share the alpha-weighted fit; synthesis
  // depends only on (fit, seed), not on the accounting standard.
  data::SimulationConfig cfg;
  cfg.n = 200;
  cfg.seed = 19;
  const auto d = data::simulate(cfg);
  model::PriorConfig prior;
  std::vector<double> ones(d.n(), 1.0);
  const auto stage1 = model::fit_pseudo_posterior(d, ones, prior, 40, 19);
  const auto alpha = risk::compute_alpha(risk::loglik_matrix(stage1, d));
  const auto f1 = model::fit_pseudo_posterior(d, alpha.alpha, prior, 40, 19);
  const auto f2 = model::fit_pseudo_posterior(d, alpha.alpha, prior, 40, 19);
  const auto s1 = synthesis::synthesize(f1, d, 19, 0,
                                        synthesis::ThetaMode::PerRecord,
                                        "weighted");
  const auto s2 = synthesis::synthesize(f2, d, 19, 0,
                                        synthesis::ThetaMode::PerRecord,
                                        "trunc_0p4_1p8");
  CHECK(s1.outcomes == s2.outcomes);
}

TEST_CASE("ecdf metrics: identity, disjoint supports, hand enumeration") {
  const std::vector<double> x = {1.0, 2.0, 3.0};
  const auto self = synthesis::ecdf_metrics(x, x);
  CHECK(self.max_abs == 0.0);
  CHECK(self.avg_sq == 0.0);

  const std::vector<double> a = {1.0, 2.0};
  const std::vector<double> b = {3.0, 4.0};
  CHECK(synthesis::ecdf_metrics(a, b).max_abs == 1.0);

  // merged support {1,1,2,2,3,4}: only the point at 3 differs (1 vs 2/3)
  const std::vector<double> c = {1.0, 2.0, 3.0};
  const std::vector<double> s = {1.0, 2.0, 4.0};
  const auto m = synthesis::ecdf_metrics(c, s);
  CHECK(m.max_abs == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(m.avg_sq == doctest::Approx((1.0 / 9.0) / 6.0).epsilon(1e-12));
}

TEST_CASE("ecdf metrics are symmetric and avg <= max^2") {
  data::SimulationConfig cfg;
  cfg.n = 500;
  cfg.seed = 23;
  const auto d1 = data::simulate(cfg);
  cfg.seed = 24;
  const auto d2 = data::simulate(cfg);
  const auto m12 = synthesis::ecdf_metrics(d1.outcomes(), d2.outcomes());
  const auto m21 = synthesis::ecdf_metrics(d2.outcomes(), d1.outcomes());
  CHECK(m12.max_abs == m21.max_abs);
  CHECK(m12.avg_sq == m21.avg_sq);
  CHECK(m12.avg_sq <= m12.max_abs * m12.max_abs);
  CHECK(m12.max_abs > 0.0);
}

TEST_CASE("quantiles interpolate between order statistics") {
  std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(synthesis::quantile(v, 0.9) == doctest::Approx(9.1).epsilon(1e-12));
  CHECK(synthesis::quantile(v, 0.5) == doctest::Approx(5.5).epsilon(1e-12));
  CHECK(synthesis::quantile(v, 0.0) == 1.0);
  CHECK(synthesis::quantile(v, 1.0) == 10.0);

  const std::vector<double> flat(7, 3.25);
  const auto st = synthesis::quantile_stats(flat);
  CHECK(st.mean == 3.25);
  CHECK(st.median == 3.25);
  CHECK(st.q90 == 3.25);
}

TEST_CASE("utility report carries both sides' statistics") {
  data::SimulationConfig cfg;
  cfg.n = 400;
  cfg.seed = 31;
  const auto d = data::simulate(cfg);
  model::PriorConfig prior;
  std::vector<double> ones(d.n(), 1.0);
  const auto fit = model::fit_pseudo_posterior(d, ones, prior, 100, 31);
  const auto syn = synthesis::synthesize(fit, d, 31);
  const auto rep = synthesis::utility_report(d, syn);
  CHECK(rep.ecdf.max_abs > 0.0);
  CHECK(rep.ecdf.max_abs < 0.5);  // unweighted synthesis tracks the data
  CHECK(rep.confidential.mean ==
        doctest::Approx(synthesis::quantile_stats(d.outcomes()).mean));
  CHECK(rep.synthetic.q90 > rep.synthetic.median);
}
