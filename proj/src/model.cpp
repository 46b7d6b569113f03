#include "ppm/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ppm/kernels.hpp"
#include "ppm/rng.hpp"

namespace ppm::model {

namespace {

// Lower Cholesky of a small SPD matrix (row-major, in place copy).
std::vector<double> cholesky(const std::vector<double>& a, std::size_t p) {
  std::vector<double> l(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * p + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * p + k] * l[j * p + k];
      if (i == j) {
        if (!(s > 0.0)) {
          throw std::runtime_error(
              "fit_pseudo_posterior: precision matrix is not positive "
              "definite");
        }
        l[i * p + i] = std::sqrt(s);
      } else {
        l[i * p + j] = s / l[j * p + j];
      }
    }
  }
  return l;
}

// Solve L y = b, then L^T x = y.
std::vector<double> chol_solve(const std::vector<double>& l, std::size_t p,
                               const std::vector<double>& b) {
  std::vector<double> y(p), x(p);
  for (std::size_t i = 0; i < p; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * p + k] * y[k];
    y[i] = s / l[i * p + i];
  }
  for (std::size_t ii = p; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < p; ++k) s -= l[k * p + ii] * x[k];
    x[ii] = s / l[ii * p + ii];
  }
  return x;
}

// Solve L^T w = z (back substitution only).
void chol_solve_lt(const std::vector<double>& l, std::size_t p,
                   std::vector<double>& z) {
  for (std::size_t ii = p; ii-- > 0;) {
    double s = z[ii];
    for (std::size_t k = ii + 1; k < p; ++k) s -= l[k * p + ii] * z[k];
    z[ii] = s / l[ii * p + ii];
  }
}

}  // namespace

double PosteriorDraws::coef_var_exact(std::size_t j) const {
  if (!(shape > 1.0)) {
    throw std::runtime_error("coef_var_exact: needs shape > 1");
  }
  const std::size_t pp = p();
  auto l = cholesky(coef_precision, pp);
  std::vector<double> e(pp, 0.0);
  e[j] = 1.0;
  auto kinv_col = chol_solve(l, pp, e);
  return rate / (shape - 1.0) * kinv_col[j];
}

double PosteriorDraws::sigma2_mean_exact() const {
  if (!(shape > 1.0)) {
    throw std::runtime_error("sigma2_mean_exact: needs shape > 1");
  }
  return rate / (shape - 1.0);
}

double PosteriorDraws::sigma2_var_exact() const {
  if (!(shape > 2.0)) {
    throw std::runtime_error("sigma2_var_exact: needs shape > 2");
  }
  double m = sigma2_mean_exact();
  return m * m / (shape - 2.0);
}

PosteriorDraws fit_pseudo_posterior(const data::Dataset& data,
                                    std::span<const double> weights,
                                    const PriorConfig& prior,
                                    std::size_t m_draws, std::uint64_t seed) {
  const std::size_t n = data.n();
  const std::size_t p = data.p();
  if (weights.size() != n) {
    throw std::invalid_argument("fit_pseudo_posterior: weights length " +
                                std::to_string(weights.size()) +
                                " does not match n = " + std::to_string(n));
  }
  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weights[i] >= 0.0) || weights[i] > 1.0) {
      throw std::invalid_argument("fit_pseudo_posterior: weight at record " +
                                  std::to_string(i) + " outside [0,1]");
    }
    wsum += weights[i];
  }
  if (wsum == 0.0) {
    throw std::runtime_error("fit_pseudo_posterior: insufficient effective "
                             "sample (all weights are zero)");
  }
  if (m_draws < 1) {
    throw std::invalid_argument("fit_pseudo_posterior: m_draws must be >= 1");
  }
  if (!(prior.coef_precision > 0.0) || !(prior.shape > 0.0) ||
      !(prior.rate > 0.0)) {
    throw std::invalid_argument("fit_pseudo_posterior: prior must be proper");
  }
  std::vector<double> m0 = prior.coef_mean;
  if (m0.empty()) m0.assign(p, 0.0);
  if (m0.size() != p) {
    throw std::invalid_argument(
        "fit_pseudo_posterior: prior mean length mismatch");
  }

  // Weighted sufficient statistics, accumulated in record order.
  const auto& y = data.log_outcomes();
  std::vector<double> sxx(p * p, 0.0), sxy(p, 0.0);
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    for (std::size_t a = 0; a < p; ++a) {
      const double xa = data.col(a)[i];
      sxy[a] += w * xa * y[i];
      for (std::size_t b = 0; b <= a; ++b) {
        sxx[a * p + b] += w * xa * data.col(b)[i];
      }
    }
    syy += w * y[i] * y[i];
  }
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a + 1; b < p; ++b) sxx[a * p + b] = sxx[b * p + a];
  }

  PosteriorDraws out;
  out.weights.assign(weights.begin(), weights.end());
  out.stage = FitStage::Unweighted;
  for (double w : weights) {
    if (w != 1.0) {
      out.stage = FitStage::Weighted;
      break;
    }
  }

  std::vector<double> kn = sxx;
  for (std::size_t j = 0; j < p; ++j) kn[j * p + j] += prior.coef_precision;
  std::vector<double> rhs = sxy;
  for (std::size_t j = 0; j < p; ++j) rhs[j] += prior.coef_precision * m0[j];

  auto l = cholesky(kn, p);
  auto mn = chol_solve(l, p, rhs);

  double m0k = 0.0, quad = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    m0k += prior.coef_precision * m0[j] * m0[j];
    // mn^T K_n mn = mn^T rhs since K_n mn = rhs
    quad += mn[j] * rhs[j];
  }
  const double an = prior.shape + 0.5 * wsum;
  const double bn = prior.rate + 0.5 * (syy + m0k - quad);
  if (!(bn > 0.0)) {
    throw std::runtime_error("fit_pseudo_posterior: degenerate posterior rate");
  }

  out.coef_mean = mn;
  out.coef_precision = kn;
  out.shape = an;
  out.rate = bn;

  out.draws.resize(m_draws);
  std::vector<double> z(p);
  for (std::size_t m = 0; m < m_draws; ++m) {
    rng::Stream sig_stream(seed, rng::Stage::FitSigma, m);
    const double g = sig_stream.gamma(an);
    const double sigma2 = bn / g;

    rng::Stream beta_stream(seed, rng::Stage::FitBeta, m);
    for (std::size_t j = 0; j < p; ++j) z[j] = beta_stream.normal();
    chol_solve_lt(l, p, z);  // z <- K_n^{-T/2} z, cov K_n^{-1}
    ThetaDraw& d = out.draws[m];
    d.beta.resize(p);
    const double s = std::sqrt(sigma2);
    for (std::size_t j = 0; j < p; ++j) d.beta[j] = mn[j] + s * z[j];
    d.sigma2 = sigma2;
  }
  return out;
}

double log_density(const ThetaDraw& theta, const data::Dataset& data,
                   std::size_t i, DensityScale scale) {
  if (i >= data.n()) {
    throw std::invalid_argument("log_density: record index out of range");
  }
  double cnorm, inv2s;
  kernels::normal_consts(theta.sigma2, cnorm, inv2s);
  const double mu = data.row_mean(theta.beta, i);
  const double d = data.log_outcomes()[i] - mu;
  double f = cnorm - (d * d) * inv2s;
  if (scale == DensityScale::Lognormal) {
    f -= data.log_outcomes()[i];
  }
  return f;
}

double cdf(const ThetaDraw& theta, const data::Dataset& data, std::size_t i,
           double value) {
  if (!(value > 0.0)) {
    throw std::invalid_argument("cdf: value must be strictly positive");
  }
  const double mu = data.row_mean(theta.beta, i);
  const double z = (kernels::log_e(value) - mu) / std::sqrt(theta.sigma2);
  return kernels::normal_cdf_e(z);
}

std::vector<double> predictive_draw(const PosteriorDraws& posterior,
                                    const data::Dataset& data, std::size_t i,
                                    std::size_t s_draws, std::uint64_t seed) {
  if (s_draws < 1) {
    throw std::invalid_argument("predictive_draw: s_draws must be >= 1");
  }
  if (i >= data.n()) {
    throw std::invalid_argument("predictive_draw: record index out of range");
  }
  const std::size_t m = posterior.m_draws();

  std::vector<double> mu(s_draws), sigma(s_draws), z(s_draws), out(s_draws);
  for (std::size_t s = 0; s < s_draws; ++s) {
    const ThetaDraw& th = posterior.draws[s % m];
    mu[s] = data.row_mean(th.beta, i);
    sigma[s] = std::sqrt(th.sigma2);
  }
  rng::Stream stream(seed, rng::Stage::Predictive, i);
  stream.fill_normal(z);
  kernels::exp_mu_plus_sigma_z(mu.data(), sigma.data(), z.data(), s_draws,
                               out.data());
  return out;
}

}  // namespace ppm::model
