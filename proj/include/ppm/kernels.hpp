#pragma once
// Batched numeric kernels with runtime backend dispatch.
//
// Every floating-point primitive the library touches in an inner loop lives
// here, in two variants: a scalar reference implementation and an AVX2
// implementation. Both are instantiated from the same operation templates
// (see src/pack_math.hpp), so they execute the identical sequence of IEEE
// double operations and produce bit-identical results. Backend selection is
// a pure speed choice.
//
// The elementwise functions (exp_e, log_e, erfc_e, ...) are the scalar
// entry points to the same code; single-value call sites and batched call
// sites therefore agree bitwise, which the accounting oracles rely on.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

namespace ppm::kernels {

enum class Backend { Scalar, Avx2 };

// True when the running CPU can execute the AVX2 backend.
bool avx2_available();

// Currently active backend. Resolved once from the PPM_KERNELS environment
// variable ("scalar", "avx2" or "auto") and CPU detection.
Backend active_backend();

// Force a backend (used by the equivalence tests). Throws std::runtime_error
// if the requested backend cannot run on this CPU.
void set_backend(Backend b);

std::string backend_name(Backend b);

// ---- scalar elementwise reference functions ------------------------------

double exp_e(double x);
double log_e(double x);
double erfc_e(double x);
// Inverse standard normal CDF (Acklam's rational approximation,
// |relative error| < 1.2e-9).
double normal_icdf_e(double p);
// Standard normal CDF, 0.5 * erfc(-z / sqrt(2)).
double normal_cdf_e(double z);
// P(zlo < Z < zhi) for a standard normal, evaluated in whichever tail keeps
// the erfc difference well conditioned. Result clamped to >= 1e-300.
double interval_mass_e(double zlo, double zhi);
double log_interval_mass_e(double zlo, double zhi);

// Normalizing constant and quadratic coefficient of a normal log density:
// cnorm = -0.5*log(2*pi*sigma2), inv_two_sigma2 = 0.5/sigma2.
void normal_consts(double sigma2, double& cnorm, double& inv_two_sigma2);

// ---- batched kernels (dispatched) ----------------------------------------

void exp_v(const double* x, std::size_t n, double* out);
void log_v(const double* x, std::size_t n, double* out);
void erfc_v(const double* x, std::size_t n, double* out);
void normal_icdf_v(const double* p, std::size_t n, double* out);

// out[i] = sum_j coefs[j] * cols[j][i], accumulated in column order.
void linear_combination(const double* const* cols, const double* coefs,
                        std::size_t p, std::size_t n, double* out);

// out[i] = cnorm - (y[i]-mu[i])^2 * inv_two_sigma2
void normal_loglik(const double* y, const double* mu, std::size_t n,
                   double cnorm, double inv_two_sigma2, double* out);

// a[i] -= b[i]  (log-scale -> lognormal Jacobian shift)
void vec_sub_inplace(double* a, const double* b, std::size_t n);

// running[i] = max(running[i], |f[i]|)
void abs_max_update(const double* f, std::size_t n, double* running);

// running[i] = max(running[i], |w[i]*f[i]|)
void weighted_abs_max_update(const double* f, const double* w, std::size_t n,
                             double* running);

// t = w[i]*f[i] - log_mass[i]; running[i] = max(running[i], |t|);
// *positive_count += #(t > 0)
void offset_abs_max_update(const double* f, const double* w,
                           const double* log_mass, std::size_t n,
                           double* running, std::uint64_t* positive_count);

// out[i] = (logval[i] - mu[i]) * inv_sigma
void standardize(const double* logval, const double* mu, std::size_t n,
                 double inv_sigma, double* out);

// out[i] = log(P(zlo[i] < Z < zhi[i])) for a standard normal.
void log_interval_mass(const double* zlo, const double* zhi, std::size_t n,
                       double* out);

// out[i] = exp(mu[i] + sigma[i] * z[i])
void exp_mu_plus_sigma_z(const double* mu, const double* sigma,
                         const double* z, std::size_t n, double* out);

}  // namespace ppm::kernels
