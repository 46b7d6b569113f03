#pragma once
// Array drivers for the pack bodies in pack_math.hpp. A backend instantiates
// these with its vector pack; the remainder of each array is handled with
// ScalarPack, which evaluates the same operation sequence per lane, so the
// split point never changes results.

#include <cstddef>
#include <cstdint>

#include "pack_math.hpp"

namespace ppm::kernels::detail {

inline ScalarPack pload_v(const double* p, ScalarPack*) { return {*p}; }

template <class V>
inline V pload_as(const double* p) {
  return pload_v(p, static_cast<V*>(nullptr));
}

template <class V, class BodyV, class BodyS>
inline void map1(const double* x, std::size_t n, double* out, BodyV bv,
                 BodyS bs) {
  std::size_t i = 0;
  for (; i + V::width <= n; i += V::width) {
    pstore(out + i, bv(pload_as<V>(x + i)));
  }
  for (; i < n; ++i) {
    pstore(out + i, bs(ScalarPack{x[i]}));
  }
}

template <class V>
void exp_loop(const double* x, std::size_t n, double* out) {
  map1<V>(x, n, out, [](V a) { return exp_body(a); },
          [](ScalarPack a) { return exp_body(a); });
}

template <class V>
void log_loop(const double* x, std::size_t n, double* out) {
  map1<V>(x, n, out, [](V a) { return log_body(a); },
          [](ScalarPack a) { return log_body(a); });
}

template <class V>
void erfc_loop(const double* x, std::size_t n, double* out) {
  map1<V>(x, n, out, [](V a) { return erfc_body(a); },
          [](ScalarPack a) { return erfc_body(a); });
}

template <class V>
void normal_icdf_loop(const double* x, std::size_t n, double* out) {
  map1<V>(x, n, out, [](V a) { return normal_icdf_body(a); },
          [](ScalarPack a) { return normal_icdf_body(a); });
}

template <class V>
void linear_combination_loop(const double* const* cols, const double* coefs,
                             std::size_t p, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + V::width <= n; i += V::width) {
    V acc = pmul(pload_as<V>(cols[0] + i), pset1_like(V{}, coefs[0]));
    for (std::size_t j = 1; j < p; ++j) {
      acc = padd(acc, pmul(pload_as<V>(cols[j] + i), pset1_like(V{}, coefs[j])));
    }
    pstore(out + i, acc);
  }
  for (; i < n; ++i) {
    ScalarPack acc = pmul(ScalarPack{cols[0][i]}, ScalarPack{coefs[0]});
    for (std::size_t j = 1; j < p; ++j) {
      acc = padd(acc, pmul(ScalarPack{cols[j][i]}, ScalarPack{coefs[j]}));
    }
    out[i] = acc.v;
  }
}

template <class V>
void normal_loglik_loop(const double* y, const double* mu, std::size_t n,
                        double cnorm, double inv2s, double* out) {
  std::size_t i = 0;
  for (; i + V::width <= n; i += V::width) {
    V d = psub(pload_as<V>(y + i), pload_as<V>(mu + i));
    V f = psub(pset1_like(V{}, cnorm),
               pmul(pmul(d, d), pset1_like(V{}, inv2s)));
    pstore(out + i, f);
  }
  for (; i < n; ++i) {
    ScalarPack d = psub(ScalarPack{y[i]}, ScalarPack{mu[i]});
    out[i] = psub(ScalarPack{cnorm},
                  pmul(pmul(d, d), ScalarPack{inv2s})).v;
  }
}

template <class V>
void vec_sub_inplace_loop(double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + V::width <= n; i += V::width) {
    pstore(a + i, psub(pload_as<V>(a + i), pload_as<V>(b + i)));
  }
  for (; i < n; ++i) a[i] -= b[i];
}

template <class V>
void abs_max_update_loop(const double* f, std::size_t n, double* running) {
  std::size_t i = 0;
  for (; i + V::width <= n; i += V::width) {
    pstore(running + i, pmax(pload_as<V>(running + i), pabs(pload_as<V>(f + i))));
  }
  for (; i < n; ++i) {
    running[i] = pmax(ScalarPack{running[i]}, pabs(ScalarPack{f[i]})).v;
  }
}

template <class V>
void weighted_abs_max_update_loop(const double* f, const double* w,
                                  std::size_t n, double* running) {
  std::size_t i = 0;
  for (; i + V::width <= n; i += V::width) {
    V t = pmul(pload_as<V>(w + i), pload_as<V>(f + i));
    pstore(running + i, pmax(pload_as<V>(running + i), pabs(t)));
  }
  for (; i < n; ++i) {
    ScalarPack t = pmul(ScalarPack{w[i]}, ScalarPack{f[i]});
    running[i] = pmax(ScalarPack{running[i]}, pabs(t)).v;
  }
}

template <class V>
void offset_abs_max_update_loop(const double* f, const double* w,
                                const double* log_mass, std::size_t n,
                                double* running, std::uint64_t* positive) {
  std::uint64_t count = 0;
  std::size_t i = 0;
  for (; i + V::width <= n; i += V::width) {
    V t = psub(pmul(pload_as<V>(w + i), pload_as<V>(f + i)),
               pload_as<V>(log_mass + i));
    pstore(running + i, pmax(pload_as<V>(running + i), pabs(t)));
    count += pcount_true(pcmp_gt(t, pset1_like(V{}, 0.0)));
  }
  for (; i < n; ++i) {
    ScalarPack t = psub(pmul(ScalarPack{w[i]}, ScalarPack{f[i]}),
                        ScalarPack{log_mass[i]});
    running[i] = pmax(ScalarPack{running[i]}, pabs(t)).v;
    if (t.v > 0.0) ++count;
  }
  *positive += count;
}

template <class V>
void standardize_loop(const double* lv, const double* mu, std::size_t n,
                      double inv_sigma, double* out) {
  std::size_t i = 0;
  for (; i + V::width <= n; i += V::width) {
    pstore(out + i, pmul(psub(pload_as<V>(lv + i), pload_as<V>(mu + i)),
                         pset1_like(V{}, inv_sigma)));
  }
  for (; i < n; ++i) {
    out[i] = pmul(psub(ScalarPack{lv[i]}, ScalarPack{mu[i]}),
                  ScalarPack{inv_sigma}).v;
  }
}

template <class V>
void log_interval_mass_loop(const double* zlo, const double* zhi,
                            std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + V::width <= n; i += V::width) {
    pstore(out + i,
           log_interval_mass_body(pload_as<V>(zlo + i), pload_as<V>(zhi + i)));
  }
  for (; i < n; ++i) {
    out[i] = log_interval_mass_body(ScalarPack{zlo[i]}, ScalarPack{zhi[i]}).v;
  }
}

template <class V>
void exp_mu_plus_sigma_z_loop(const double* mu, const double* sigma,
                              const double* z, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + V::width <= n; i += V::width) {
    V a = padd(pload_as<V>(mu + i), pmul(pload_as<V>(sigma + i), pload_as<V>(z + i)));
    pstore(out + i, exp_body(a));
  }
  for (; i < n; ++i) {
    ScalarPack a = padd(ScalarPack{mu[i]},
                        pmul(ScalarPack{sigma[i]}, ScalarPack{z[i]}));
    out[i] = exp_body(a).v;
  }
}

// The dispatch table each backend fills in.
struct KernelOps {
  void (*exp_v)(const double*, std::size_t, double*);
  void (*log_v)(const double*, std::size_t, double*);
  void (*erfc_v)(const double*, std::size_t, double*);
  void (*normal_icdf_v)(const double*, std::size_t, double*);
  void (*linear_combination)(const double* const*, const double*, std::size_t,
                             std::size_t, double*);
  void (*normal_loglik)(const double*, const double*, std::size_t, double,
                        double, double*);
  void (*vec_sub_inplace)(double*, const double*, std::size_t);
  void (*abs_max_update)(const double*, std::size_t, double*);
  void (*weighted_abs_max_update)(const double*, const double*, std::size_t,
                                  double*);
  void (*offset_abs_max_update)(const double*, const double*, const double*,
                                std::size_t, double*, std::uint64_t*);
  void (*standardize)(const double*, const double*, std::size_t, double,
                      double*);
  void (*log_interval_mass)(const double*, const double*, std::size_t,
                            double*);
  void (*exp_mu_plus_sigma_z)(const double*, const double*, const double*,
                              std::size_t, double*);
};

extern const KernelOps scalar_ops;
#if defined(PPM_HAVE_AVX2)
extern const KernelOps avx2_ops;
#endif

template <class V>
constexpr KernelOps make_ops() {
  return KernelOps{
      &exp_loop<V>,
      &log_loop<V>,
      &erfc_loop<V>,
      &normal_icdf_loop<V>,
      &linear_combination_loop<V>,
      &normal_loglik_loop<V>,
      &vec_sub_inplace_loop<V>,
      &abs_max_update_loop<V>,
      &weighted_abs_max_update_loop<V>,
      &offset_abs_max_update_loop<V>,
      &standardize_loop<V>,
      &log_interval_mass_loop<V>,
      &exp_mu_plus_sigma_z_loop<V>,
  };
}

}  // namespace ppm::kernels::detail
