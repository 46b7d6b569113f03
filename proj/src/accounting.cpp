#include "ppm/accounting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "ppm/kernels.hpp"

namespace ppm::accounting {

std::string kind_name(StandardKind k) {
  switch (k) {
    case StandardKind::Unweighted: return "unweighted";
    case StandardKind::Weighted: return "weighted";
    case StandardKind::RangeAveraged: return "range_averaged";
    case StandardKind::RangeTruncated: return "range_truncated";
  }
  return "unknown";
}

Standard Standard::unweighted() { return Standard(StandardKind::Unweighted); }
Standard Standard::weighted() { return Standard(StandardKind::Weighted); }

Standard Standard::range_averaged(ranges::RangeSpec ranges) {
  Standard s(StandardKind::RangeAveraged);
  s.ranges_ = std::move(ranges);
  return s;
}

Standard Standard::range_truncated(ranges::RangeSpec ranges) {
  Standard s(StandardKind::RangeTruncated);
  s.ranges_ = std::move(ranges);
  return s;
}

const ranges::RangeSpec& Standard::range_spec() const {
  if (!ranges_) {
    throw std::logic_error("Standard: no range spec attached");
  }
  return *ranges_;
}

double sensitive_loglik(const Standard& standard, const model::ThetaDraw& theta,
                        const data::Dataset& data, std::size_t i,
                        double alpha_i, std::optional<double> lambda_i,
                        model::DensityScale scale) {
  const double f = model::log_density(theta, data, i, scale);
  switch (standard.kind()) {
    case StandardKind::Unweighted:
      return f;
    case StandardKind::Weighted:
      return alpha_i * f;
    case StandardKind::RangeAveraged: {
      if (!lambda_i) {
        throw std::invalid_argument(
            "sensitive_loglik: range_averaged requires lambda");
      }
      const double w = (1.0 - *lambda_i) * alpha_i;
      return w * f;
    }
    case StandardKind::RangeTruncated: {
      const auto& r = standard.range_spec();
      if (r.is_unbounded(i)) {
        return alpha_i * f - 0.0;
      }
      const double mu = data.row_mean(theta.beta, i);
      const double inv_sigma = 1.0 / std::sqrt(theta.sigma2);
      const double zlo = (kernels::log_e(r.lo(i)) - mu) * inv_sigma;
      const double zhi = (kernels::log_e(r.hi(i)) - mu) * inv_sigma;
      return alpha_i * f - kernels::log_interval_mass_e(zlo, zhi);
    }
  }
  throw std::logic_error("sensitive_loglik: unreachable");
}

namespace {

void check_mechanism(const Standard& standard,
                     const model::PosteriorDraws& posterior,
                     const risk::RiskWeights& weights,
                     const ranges::KnowledgeProbs* lambda) {
  const std::size_t n = weights.alpha.size();
  if (posterior.weights.size() != n) {
    throw std::invalid_argument("account: posterior/weights length mismatch");
  }
  auto nearly_equal = [](double a, double b) {
    return std::fabs(a - b) <= 1e-12;
  };
  switch (standard.kind()) {
    case StandardKind::Unweighted:
      if (posterior.stage != model::FitStage::Unweighted) {
        throw std::invalid_argument(
            "account: unweighted standard requires the unweighted posterior");
      }
      break;
    case StandardKind::Weighted:
    case StandardKind::RangeTruncated:
      for (std::size_t i = 0; i < n; ++i) {
        if (!nearly_equal(posterior.weights[i], weights.alpha[i])) {
          throw std::invalid_argument(
              "account: posterior was not fit with the supplied alpha "
              "weights (mechanism/standard mismatch)");
        }
      }
      break;
    case StandardKind::RangeAveraged: {
      if (lambda == nullptr) {
        throw std::invalid_argument(
            "account: range_averaged requires lambda");
      }
      if (lambda->lambda.size() != n) {
        throw std::invalid_argument("account: lambda length mismatch");
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double astar =
            lambda->lambda[i] + (1.0 - lambda->lambda[i]) * weights.alpha[i];
        if (!nearly_equal(posterior.weights[i], astar)) {
          throw std::invalid_argument(
              "account: range_averaged standard requires the alpha*-weighted "
              "posterior (mechanism/standard mismatch)");
        }
      }
      break;
    }
  }
  if (standard.kind() == StandardKind::RangeAveraged ||
      standard.kind() == StandardKind::RangeTruncated) {
    if (standard.range_spec().size() != n) {
      throw std::invalid_argument("account: range spec length mismatch");
    }
  }
}

}  // namespace

PrivacyAccount account(const Standard& standard,
                       const model::PosteriorDraws& posterior,
                       const data::Dataset& data,
                       const risk::RiskWeights& weights,
                       const ranges::KnowledgeProbs* lambda,
                       model::DensityScale scale, std::string label) {
  const std::size_t n = data.n();
  const std::size_t m = posterior.m_draws();
  if (weights.alpha.size() != n) {
    throw std::invalid_argument("account: weights length mismatch");
  }
  check_mechanism(standard, posterior, weights, lambda);

  // Per-record multiplier on f.
  std::vector<double> wfac(n, 1.0);
  switch (standard.kind()) {
    case StandardKind::Unweighted:
      break;
    case StandardKind::Weighted:
    case StandardKind::RangeTruncated:
      wfac = weights.alpha;
      break;
    case StandardKind::RangeAveraged:
      for (std::size_t i = 0; i < n; ++i) {
        wfac[i] = (1.0 - lambda->lambda[i]) * weights.alpha[i];
      }
      break;
  }

  const bool truncated = standard.kind() == StandardKind::RangeTruncated;
  const bool any_finite_range =
      truncated && !standard.range_spec().all_unbounded();

  // Log range endpoints and the finite-record list, fixed across draws.
  std::vector<double> log_lo, log_hi;
  std::vector<std::size_t> unbounded_idx;
  if (any_finite_range) {
    const auto& r = standard.range_spec();
    log_lo.resize(n);
    log_hi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (r.is_unbounded(i)) {
        unbounded_idx.push_back(i);
        log_lo[i] = 0.0;
        log_hi[i] = 1.0;
      } else {
        log_lo[i] = kernels::log_e(r.lo(i));
        log_hi[i] = kernels::log_e(r.hi(i));
      }
    }
  }

  PrivacyAccount acc;
  acc.kind = standard.kind();
  acc.label = label.empty() ? kind_name(standard.kind()) : std::move(label);
  acc.m_draws = m;
  acc.per_record_lipschitz.assign(n, 0.0);
  if (standard.has_ranges()) {
    acc.range_multipliers = standard.range_spec().multipliers();
  }

  const auto& y = data.log_outcomes();
  std::vector<double> mu(n), f(n), zlo(n), zhi(n), log_mass(n, 0.0);
  for (std::size_t mm = 0; mm < m; ++mm) {
    const auto& th = posterior.draws[mm];
    kernels::linear_combination(data.col_ptrs().data(), th.beta.data(),
                                data.p(), n, mu.data());
    double cnorm, inv2s;
    kernels::normal_consts(th.sigma2, cnorm, inv2s);
    kernels::normal_loglik(y.data(), mu.data(), n, cnorm, inv2s, f.data());
    if (scale == model::DensityScale::Lognormal) {
      kernels::vec_sub_inplace(f.data(), y.data(), n);
    }
    switch (standard.kind()) {
      case StandardKind::Unweighted:
        kernels::abs_max_update(f.data(), n, acc.per_record_lipschitz.data());
        break;
      case StandardKind::Weighted:
      case StandardKind::RangeAveraged:
        kernels::weighted_abs_max_update(f.data(), wfac.data(), n,
                                         acc.per_record_lipschitz.data());
        break;
      case StandardKind::RangeTruncated: {
        if (!any_finite_range) {
          // The sentinel offset is log(1) = 0: identical to the weighted
          // standard on this posterior, bit for bit.
          kernels::weighted_abs_max_update(f.data(), wfac.data(), n,
                                           acc.per_record_lipschitz.data());
          break;
        }
        const double inv_sigma = 1.0 / std::sqrt(th.sigma2);
        kernels::standardize(log_lo.data(), mu.data(), n, inv_sigma,
                             zlo.data());
        kernels::standardize(log_hi.data(), mu.data(), n, inv_sigma,
                             zhi.data());
        kernels::log_interval_mass(zlo.data(), zhi.data(), n, log_mass.data());
        for (std::size_t i : unbounded_idx) log_mass[i] = 0.0;
        kernels::offset_abs_max_update(f.data(), wfac.data(), log_mass.data(),
                                       n, acc.per_record_lipschitz.data(),
                                       &acc.sign_flip_count);
        break;
      }
    }
  }

  acc.delta = *std::max_element(acc.per_record_lipschitz.begin(),
                                acc.per_record_lipschitz.end());
  acc.epsilon = 2.0 * acc.delta;
  return acc;
}

namespace {

bool contains(const std::pair<double, double>& outer,
              const std::pair<double, double>& inner) {
  return outer.first <= inner.first && outer.second >= inner.second &&
         outer != inner;
}

}  // namespace

bool OrderingReport::all_expected_hold() const {
  for (const auto& [name, ok] : expected) {
    if (!ok) return false;
  }
  return true;
}

OrderingReport compare_accounts(const std::vector<PrivacyAccount>& accounts) {
  if (accounts.size() < 2) {
    throw std::invalid_argument("compare_accounts: need at least 2 accounts");
  }
  OrderingReport rep;
  for (const auto& a : accounts) {
    rep.sorted_desc.push_back({a.label, a.epsilon, a.delta});
  }
  std::stable_sort(rep.sorted_desc.begin(), rep.sorted_desc.end(),
                   [](const auto& a, const auto& b) {
                     return a.epsilon > b.epsilon;
                   });
  for (std::size_t i = 0; i < rep.sorted_desc.size(); ++i) {
    for (std::size_t j = i + 1; j < rep.sorted_desc.size(); ++j) {
      rep.pairwise.emplace_back(
          rep.sorted_desc[i].label, rep.sorted_desc[j].label,
          rep.sorted_desc[i].epsilon - rep.sorted_desc[j].epsilon);
      if (rep.sorted_desc[i].epsilon == rep.sorted_desc[j].epsilon) {
        rep.ties.push_back(rep.sorted_desc[i].label + "=" +
                           rep.sorted_desc[j].label);
      }
    }
  }

  auto expect = [&](const PrivacyAccount& hi, const PrivacyAccount& lo) {
    rep.expected.emplace_back(hi.label + ">" + lo.label,
                              hi.epsilon > lo.epsilon);
  };
  for (const auto& a : accounts) {
    for (const auto& b : accounts) {
      if (&a == &b) continue;
      // Weighted dominates every range-restricted account.
      if (a.kind == StandardKind::Weighted &&
          (b.kind == StandardKind::RangeAveraged ||
           b.kind == StandardKind::RangeTruncated)) {
        expect(a, b);
      }
      // Same kind, nested uniform ranges: wider range, larger budget.
      if (a.kind == b.kind && a.range_multipliers && b.range_multipliers &&
          contains(*a.range_multipliers, *b.range_multipliers)) {
        expect(a, b);
      }
      // Equal ranges: truncated above averaged.
      if (a.kind == StandardKind::RangeTruncated &&
          b.kind == StandardKind::RangeAveraged && a.range_multipliers &&
          b.range_multipliers && *a.range_multipliers == *b.range_multipliers) {
        expect(a, b);
      }
    }
  }
  return rep;
}

}  // namespace ppm::accounting
