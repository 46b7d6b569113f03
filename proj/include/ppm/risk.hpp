#pragma once
// Per-record disclosure-risk weights derived from the stage-1 fit, plus the
// scaling machinery used to calibrate a run onto a target budget.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "ppm/data.hpp"
#include "ppm/model.hpp"

namespace ppm::risk {

// f_{theta_m}(x_i) over all records and draws, stored draw-major so each
// draw's row is contiguous for the batched kernels.
struct LoglikMatrix {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> cells;  // cells[mm * n + i]
  model::FitStage stage = model::FitStage::Unweighted;

  double at(std::size_t i, std::size_t mm) const { return cells[mm * n + i]; }
};

LoglikMatrix loglik_matrix(const model::PosteriorDraws& posterior,
                           const data::Dataset& data,
                           model::DensityScale scale =
                               model::DensityScale::Normal);

struct RiskWeights {
  std::vector<double> alpha;  // in [0,1]
  std::vector<double> raw;    // 1 / max_m |f|, before normalization
  double scale_constant = 1.0;
  std::size_t clamped_count = 0;  // records whose max |f| was exactly zero
};

// alpha_i = min(1, raw_i / max_j raw_j): the riskiest record (largest
// max_m |f|) gets the smallest weight, the least risky gets 1.
RiskWeights compute_alpha(const LoglikMatrix& ll);

// Multiplies every weight by c in (0,1] and records the constant.
RiskWeights scale_weights(const RiskWeights& w, double c);

struct CalibrationResult {
  double scale = 1.0;
  double achieved_epsilon = 0.0;
  bool converged = false;
  // (scale probed, epsilon obtained), in probe order.
  std::vector<std::pair<double, double>> trace;
};

// Bisection on the scale constant. epsilon_of_scale must refit the pseudo
// posterior at the probed scale and return the recomputed budget. Throws if
// the target exceeds the uncalibrated budget; returns converged=false with
// the best probe if the tolerance is not reached.
CalibrationResult calibrate_scale(
    const std::function<double(double)>& epsilon_of_scale,
    double target_epsilon, double rel_tol = 0.02, int max_iters = 25);

}  // namespace ppm::risk
