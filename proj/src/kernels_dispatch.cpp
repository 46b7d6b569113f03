// Runtime backend selection.

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "ppm/kernels.hpp"

#include "kernel_loops.hpp"

namespace ppm::kernels {

namespace {

using detail::KernelOps;

bool detect_avx2() {
#if defined(PPM_HAVE_AVX2)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("PPM_KERNELS")) {
    std::string v(env);
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2") {
      if (!detect_avx2()) {
        throw std::runtime_error("PPM_KERNELS=avx2 but CPU lacks AVX2");
      }
      return Backend::Avx2;
    }
    // anything else, including "auto", falls through to detection
  }
  return detect_avx2() ? Backend::Avx2 : Backend::Scalar;
}

Backend g_backend = initial_backend();

const KernelOps& ops() {
#if defined(PPM_HAVE_AVX2)
  return g_backend == Backend::Avx2 ? detail::avx2_ops : detail::scalar_ops;
#else
  return detail::scalar_ops;
#endif
}

}  // namespace

bool avx2_available() { return detect_avx2(); }

Backend active_backend() { return g_backend; }

void set_backend(Backend b) {
  if (b == Backend::Avx2 && !detect_avx2()) {
    throw std::runtime_error("AVX2 backend not available on this CPU");
  }
  g_backend = b;
}

std::string backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

void exp_v(const double* x, std::size_t n, double* out) {
  ops().exp_v(x, n, out);
}
void log_v(const double* x, std::size_t n, double* out) {
  ops().log_v(x, n, out);
}
void erfc_v(const double* x, std::size_t n, double* out) {
  ops().erfc_v(x, n, out);
}
void normal_icdf_v(const double* p, std::size_t n, double* out) {
  ops().normal_icdf_v(p, n, out);
}
void linear_combination(const double* const* cols, const double* coefs,
                        std::size_t p, std::size_t n, double* out) {
  ops().linear_combination(cols, coefs, p, n, out);
}
void normal_loglik(const double* y, const double* mu, std::size_t n,
                   double cnorm, double inv_two_sigma2, double* out) {
  ops().normal_loglik(y, mu, n, cnorm, inv_two_sigma2, out);
}
void vec_sub_inplace(double* a, const double* b, std::size_t n) {
  ops().vec_sub_inplace(a, b, n);
}
void abs_max_update(const double* f, std::size_t n, double* running) {
  ops().abs_max_update(f, n, running);
}
void weighted_abs_max_update(const double* f, const double* w, std::size_t n,
                             double* running) {
  ops().weighted_abs_max_update(f, w, n, running);
}
void offset_abs_max_update(const double* f, const double* w,
                           const double* log_mass, std::size_t n,
                           double* running, std::uint64_t* positive_count) {
  ops().offset_abs_max_update(f, w, log_mass, n, running, positive_count);
}
void standardize(const double* logval, const double* mu, std::size_t n,
                 double inv_sigma, double* out) {
  ops().standardize(logval, mu, n, inv_sigma, out);
}
void log_interval_mass(const double* zlo, const double* zhi, std::size_t n,
                       double* out) {
  ops().log_interval_mass(zlo, zhi, n, out);
}
void exp_mu_plus_sigma_z(const double* mu, const double* sigma,
                         const double* z, std::size_t n, double* out) {
  ops().exp_mu_plus_sigma_z(mu, sigma, z, n, out);
}

}  // namespace ppm::kernels
