#include "ppm/risk.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ppm/kernels.hpp"

namespace ppm::risk {

LoglikMatrix loglik_matrix(const model::PosteriorDraws& posterior,
                           const data::Dataset& data,
                           model::DensityScale scale) {
  const std::size_t n = data.n();
  const std::size_t m = posterior.m_draws();
  if (posterior.p() != data.p()) {
    throw std::invalid_argument("loglik_matrix: posterior/data dimension "
                                "mismatch");
  }
  LoglikMatrix out;
  out.n = n;
  out.m = m;
  out.stage = posterior.stage;
  out.cells.resize(n * m);

  std::vector<double> mu(n);
  const auto& y = data.log_outcomes();
  for (std::size_t mm = 0; mm < m; ++mm) {
    const auto& th = posterior.draws[mm];
    kernels::linear_combination(data.col_ptrs().data(), th.beta.data(),
                                data.p(), n, mu.data());
    double cnorm, inv2s;
    kernels::normal_consts(th.sigma2, cnorm, inv2s);
    double* row = out.cells.data() + mm * n;
    kernels::normal_loglik(y.data(), mu.data(), n, cnorm, inv2s, row);
    if (scale == model::DensityScale::Lognormal) {
      kernels::vec_sub_inplace(row, y.data(), n);
    }
  }
  return out;
}

RiskWeights compute_alpha(const LoglikMatrix& ll) {
  if (ll.n == 0 || ll.m == 0) {
    throw std::invalid_argument("compute_alpha: empty log-likelihood matrix");
  }
  std::vector<double> max_abs(ll.n, 0.0);
  for (std::size_t mm = 0; mm < ll.m; ++mm) {
    kernels::abs_max_update(ll.cells.data() + mm * ll.n, ll.n,
                            max_abs.data());
  }

  RiskWeights w;
  w.raw.resize(ll.n);
  w.alpha.resize(ll.n);
  for (std::size_t i = 0; i < ll.n; ++i) {
    if (max_abs[i] == 0.0) {
      // A zero maximum would make the reciprocal infinite; such a record is
      // maximally non-risky, so it gets weight 1.
      w.raw[i] = std::numeric_limits<double>::infinity();
      ++w.clamped_count;
    } else {
      w.raw[i] = 1.0 / max_abs[i];
    }
  }
  double raw_max = 0.0;
  for (double r : w.raw) {
    if (std::isfinite(r) && r > raw_max) raw_max = r;
  }
  for (std::size_t i = 0; i < ll.n; ++i) {
    if (!std::isfinite(w.raw[i]) || raw_max == 0.0) {
      w.alpha[i] = 1.0;
    } else {
      double a = w.raw[i] / raw_max;
      w.alpha[i] = a < 1.0 ? a : 1.0;
    }
  }
  return w;
}

RiskWeights scale_weights(const RiskWeights& w, double c) {
  if (!(c > 0.0) || c > 1.0) {
    throw std::invalid_argument("scale_weights: constant must lie in (0,1]");
  }
  RiskWeights out = w;
  for (double& a : out.alpha) a *= c;
  out.scale_constant = w.scale_constant * c;
  return out;
}

CalibrationResult calibrate_scale(
    const std::function<double(double)>& epsilon_of_scale,
    double target_epsilon, double rel_tol, int max_iters) {
  if (!(target_epsilon > 0.0)) {
    throw std::invalid_argument("calibrate_scale: target must be positive");
  }
  if (!(rel_tol > 0.0)) {
    throw std::invalid_argument("calibrate_scale: tolerance must be positive");
  }
  CalibrationResult res;
  auto probe = [&](double c) {
    double e = epsilon_of_scale(c);
    res.trace.emplace_back(c, e);
    return e;
  };
  auto within = [&](double e) {
    return std::fabs(e - target_epsilon) / target_epsilon <= rel_tol;
  };

  const double e1 = probe(1.0);
  if (within(e1)) {
    res.scale = 1.0;
    res.achieved_epsilon = e1;
    res.converged = true;
    return res;
  }
  if (e1 < target_epsilon) {
    throw std::runtime_error(
        "calibrate_scale: target above uncalibrated budget");
  }

  // Walk down geometrically until the target is bracketed. The budget need
  // not fall all the way to zero (the truncated offset does not scale, and
  // near-zero weights leave a prior-dominated fit), so a failed bracket is
  // reported rather than bisected.
  double hi = 1.0;
  double lo = 1.0;
  bool bracketed = false;
  for (int k = 0; k < 20; ++k) {
    hi = lo;
    lo *= 0.5;
    const double e = probe(lo);
    if (within(e)) {
      res.scale = lo;
      res.achieved_epsilon = e;
      res.converged = true;
      return res;
    }
    if (e < target_epsilon) {
      bracketed = true;
      break;
    }
  }
  if (bracketed) {
    for (int it = 0; it < max_iters; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double e = probe(mid);
      if (within(e)) {
        res.scale = mid;
        res.achieved_epsilon = e;
        res.converged = true;
        return res;
      }
      if (e > target_epsilon) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  }
  // Best probe so far, flagged as not converged.
  double best_gap = std::numeric_limits<double>::infinity();
  for (const auto& [c, e] : res.trace) {
    const double gap = std::fabs(e - target_epsilon);
    if (gap < best_gap) {
      best_gap = gap;
      res.scale = c;
      res.achieved_epsilon = e;
    }
  }
  res.converged = false;
  return res;
}

}  // namespace ppm::risk
