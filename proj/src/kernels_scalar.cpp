// Scalar reference backend and the elementwise entry points.

#include <cmath>

#include "ppm/kernels.hpp"

#include "kernel_loops.hpp"

namespace ppm::kernels {

namespace detail {
const KernelOps scalar_ops = make_ops<ScalarPack>();
}  // namespace detail

using detail::ScalarPack;

double exp_e(double x) { return detail::exp_body(ScalarPack{x}).v; }
double log_e(double x) { return detail::log_body(ScalarPack{x}).v; }
double erfc_e(double x) { return detail::erfc_body(ScalarPack{x}).v; }
double normal_icdf_e(double p) {
  return detail::normal_icdf_body(ScalarPack{p}).v;
}

double normal_cdf_e(double z) {
  ScalarPack arg = detail::pmul(detail::pneg(ScalarPack{z}),
                                ScalarPack{detail::kInvSqrt2});
  return 0.5 * detail::erfc_body(arg).v;
}

double interval_mass_e(double zlo, double zhi) {
  return detail::interval_mass_body(ScalarPack{zlo}, ScalarPack{zhi}).v;
}

double log_interval_mass_e(double zlo, double zhi) {
  return detail::log_interval_mass_body(ScalarPack{zlo}, ScalarPack{zhi}).v;
}

void normal_consts(double sigma2, double& cnorm, double& inv_two_sigma2) {
  constexpr double two_pi = 6.283185307179586476925287;
  cnorm = -0.5 * log_e(two_pi * sigma2);
  inv_two_sigma2 = 0.5 / sigma2;
}

}  // namespace ppm::kernels
