#pragma once
// Operation templates shared by the scalar and AVX2 kernel backends.
//
// Each math routine below is written once against a "pack" of doubles and is
// instantiated with ScalarPack (width 1) and, in the AVX2 translation unit,
// with Avx2Pack (width 4). All pack operations map to correctly-rounded IEEE
// double operations applied lane-wise in a fixed order, so the two
// instantiations return bit-identical values. Branches are expressed as
// full evaluation plus select, keeping the operation DAG independent of the
// data.
//
// exp/log polynomial and rational coefficients follow Cephes (Moshier);
// the normal quantile uses Acklam's rational approximation.

#include <bit>
#include <cstdint>
#include <cstring>

namespace ppm::kernels::detail {

// ---------------------------------------------------------------------------
// ScalarPack: one double, plain IEEE arithmetic.
// ---------------------------------------------------------------------------

struct ScalarPack {
  double v;
  static constexpr std::size_t width = 1;
};

struct ScalarMask {
  bool m;
};

inline ScalarPack pset1(double x) { return {x}; }
inline ScalarPack pload(const double* p) { return {*p}; }
inline void pstore(double* p, ScalarPack a) { *p = a.v; }

inline ScalarPack padd(ScalarPack a, ScalarPack b) { return {a.v + b.v}; }
inline ScalarPack psub(ScalarPack a, ScalarPack b) { return {a.v - b.v}; }
inline ScalarPack pmul(ScalarPack a, ScalarPack b) { return {a.v * b.v}; }
inline ScalarPack pdiv(ScalarPack a, ScalarPack b) { return {a.v / b.v}; }

inline ScalarPack psqrt(ScalarPack a) { return {__builtin_sqrt(a.v)}; }

inline ScalarPack pabs(ScalarPack a) {
  return {std::bit_cast<double>(std::bit_cast<std::uint64_t>(a.v) &
                                0x7FFFFFFFFFFFFFFFull)};
}
inline ScalarPack pneg(ScalarPack a) {
  return {std::bit_cast<double>(std::bit_cast<std::uint64_t>(a.v) ^
                                0x8000000000000000ull)};
}
inline ScalarPack pmin(ScalarPack a, ScalarPack b) {
  return {b.v < a.v ? b.v : a.v};
}
inline ScalarPack pmax(ScalarPack a, ScalarPack b) {
  return {b.v > a.v ? b.v : a.v};
}

inline ScalarMask pcmp_lt(ScalarPack a, ScalarPack b) { return {a.v < b.v}; }
inline ScalarMask pcmp_le(ScalarPack a, ScalarPack b) { return {a.v <= b.v}; }
inline ScalarMask pcmp_gt(ScalarPack a, ScalarPack b) { return {a.v > b.v}; }
inline ScalarMask pcmp_ge(ScalarPack a, ScalarPack b) { return {a.v >= b.v}; }

// select(m, a, b) = m ? a : b, lane-wise
inline ScalarPack pselect(ScalarMask m, ScalarPack a, ScalarPack b) {
  return {m.m ? a.v : b.v};
}
inline ScalarMask pmask_or(ScalarMask a, ScalarMask b) { return {a.m || b.m}; }

inline int pcount_true(ScalarMask m) { return m.m ? 1 : 0; }

// Integer-valued double helpers. Valid for |k| < 2^51, which covers every
// exponent this library manipulates.
inline constexpr double kMagic = 6755399441055744.0;  // 1.5 * 2^52

// Round to nearest (ties to even) for |x| < 2^51.
inline ScalarPack pround(ScalarPack x) {
  return {(x.v + kMagic) - kMagic};
}

// 2^k for an integer-valued double k in [-1022, 1023].
inline ScalarPack pexp2i(ScalarPack k) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(k.v + kMagic);
  std::int64_t ki = static_cast<std::int64_t>(bits) -
                    static_cast<std::int64_t>(std::bit_cast<std::uint64_t>(kMagic));
  return {std::bit_cast<double>(static_cast<std::uint64_t>(ki + 1023) << 52)};
}

// Decompose normal positive x into m in [0.5, 1) and integer exponent e
// (as an integer-valued double) with x = m * 2^e.
inline void pfrexp(ScalarPack x, ScalarPack& mant, ScalarPack& expo) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(x.v);
  std::int64_t e = static_cast<std::int64_t>((bits >> 52) & 0x7FF) - 1022;
  mant.v = std::bit_cast<double>((bits & 0x000FFFFFFFFFFFFFull) |
                                 0x3FE0000000000000ull);
  std::uint64_t ebits = static_cast<std::uint64_t>(e) +
                        std::bit_cast<std::uint64_t>(kMagic);
  expo.v = std::bit_cast<double>(ebits) - kMagic;
}

// ---------------------------------------------------------------------------
// Polynomial evaluation (Horner, fixed order).
// ---------------------------------------------------------------------------

template <class P, std::size_t N>
inline P poly(P x, const double (&c)[N]) {
  P r = pset1_like(x, c[0]);
  for (std::size_t i = 1; i < N; ++i) {
    r = padd(pmul(r, x), pset1_like(x, c[i]));
  }
  return r;
}

// Monic polynomial: x^N + c[0] x^{N-1} + ... + c[N-1]
template <class P, std::size_t N>
inline P poly1(P x, const double (&c)[N]) {
  P r = padd(x, pset1_like(x, c[0]));
  for (std::size_t i = 1; i < N; ++i) {
    r = padd(pmul(r, x), pset1_like(x, c[i]));
  }
  return r;
}

inline ScalarPack pset1_like(ScalarPack, double x) { return {x}; }

// ---------------------------------------------------------------------------
// exp, Cephes style: e^x = 2^k * (1 + 2 r P(r^2) / (Q(r^2) - r P(r^2)))
// ---------------------------------------------------------------------------

inline constexpr double kLog2E = 1.4426950408889634073599;
inline constexpr double kLn2Hi = 6.93145751953125e-1;
inline constexpr double kLn2Lo = 1.42860682030941723212e-6;

// Domain is clipped so 2^k stays a normal double; values beyond saturate to
// inf / 0 (the library never needs the outermost half-ulp of libm's range).
inline constexpr double kExpMax = 709.436139303124;   // ~1023.49 * ln 2
inline constexpr double kExpMin = -708.3964185322641; // ~-1022 * ln 2

inline constexpr double kExpP[3] = {1.26177193074810590878e-4,
                                    3.02994407707441961300e-2,
                                    9.99999999999999999910e-1};
inline constexpr double kExpQ[4] = {3.00198505138664455042e-6,
                                    2.52448340349684104192e-3,
                                    2.27265548208155028766e-1,
                                    2.00000000000000000005e0};

template <class P>
inline P exp_body(P x) {
  auto too_big = pcmp_gt(x, pset1_like(x, kExpMax));
  auto too_small = pcmp_lt(x, pset1_like(x, kExpMin));

  P k = pround(pmul(x, pset1_like(x, kLog2E)));
  P r = psub(x, pmul(k, pset1_like(x, kLn2Hi)));
  r = psub(r, pmul(k, pset1_like(x, kLn2Lo)));

  P z = pmul(r, r);
  P px = pmul(r, poly(z, kExpP));
  P qx = poly(z, kExpQ);
  P e = padd(pset1_like(x, 1.0),
             pdiv(pmul(pset1_like(x, 2.0), px), psub(qx, px)));

  P res = pmul(e, pexp2i(k));
  res = pselect(too_big, pset1_like(x, __builtin_inf()), res);
  res = pselect(too_small, pset1_like(x, 0.0), res);
  return res;
}

// ---------------------------------------------------------------------------
// log, Cephes style on m in [sqrt(1/2), sqrt(2))
// ---------------------------------------------------------------------------

inline constexpr double kSqrtHalf = 0.70710678118654752440;
inline constexpr double kLogP[6] = {1.01875663804580931796e-4,
                                    4.97494994976747001425e-1,
                                    4.70579119878881725854e0,
                                    1.44989225341610930846e1,
                                    1.79368678507819816313e1,
                                    7.70838733755885391666e0};
inline constexpr double kLogQ[5] = {1.12873587189167450590e1,
                                    4.52279145837532221105e1,
                                    8.29875266912776603211e1,
                                    7.11544750618563894466e1,
                                    2.31251620126765340583e1};
inline constexpr double kLn2CorrLo = 2.121944400546905827679e-4;
inline constexpr double kLn2CorrHi = 0.693359375;
inline constexpr double kDblMinNormal = 2.2250738585072014e-308;
inline constexpr double kTwo54 = 18014398509481984.0;  // 2^54

template <class P>
inline P log_body(P x) {
  auto not_pos = pcmp_le(x, pset1_like(x, 0.0));
  auto is_zero = pcmp_ge(x, pset1_like(x, 0.0));  // with not_pos: x == +-0
  auto is_inf = pcmp_gt(x, pset1_like(x, 1.7976931348623157e308));

  // Scale subnormals into the normal range first.
  auto tiny = pcmp_lt(x, pset1_like(x, kDblMinNormal));
  P xs = pselect(tiny, pmul(x, pset1_like(x, kTwo54)), x);
  P e_adj = pselect(tiny, pset1_like(x, -54.0), pset1_like(x, 0.0));
  // Keep the bit decomposition well-defined on non-positive lanes.
  xs = pmax(xs, pset1_like(x, kDblMinNormal));

  P m, e;
  pfrexp(xs, m, e);
  auto low = pcmp_lt(m, pset1_like(x, kSqrtHalf));
  m = pselect(low, padd(m, m), m);
  e = pselect(low, psub(e, pset1_like(x, 1.0)), e);
  e = padd(e, e_adj);

  P t = psub(m, pset1_like(x, 1.0));
  P z = pmul(t, t);
  P y = pmul(t, pdiv(pmul(z, poly(t, kLogP)), poly1(t, kLogQ)));
  y = psub(y, pmul(pset1_like(x, 0.5), z));
  P r = padd(t, y);
  r = psub(r, pmul(e, pset1_like(x, kLn2CorrLo)));
  r = padd(r, pmul(e, pset1_like(x, kLn2CorrHi)));

  r = pselect(is_inf, pset1_like(x, __builtin_inf()), r);
  r = pselect(not_pos,
              pselect(is_zero, pset1_like(x, -__builtin_inf()),
                      pset1_like(x, __builtin_nan(""))),
              r);
  return r;
}

// ---------------------------------------------------------------------------
// erfc, Cephes rational approximations
// ---------------------------------------------------------------------------

inline constexpr double kErfT[5] = {9.60497373987051638749e0,
                                    9.00260197203842689217e1,
                                    2.23200534594684319226e3,
                                    7.00332514112805075473e3,
                                    5.55923013010394962768e4};
inline constexpr double kErfU[5] = {3.35617141647503099647e1,
                                    5.21357949780152679795e2,
                                    4.59432382970980127987e3,
                                    2.26290000613890934246e4,
                                    4.92673942608635921086e4};
inline constexpr double kErfcP[9] = {2.46196981473530512524e-10,
                                     5.64189564831068821977e-1,
                                     7.46321056442269912687e0,
                                     4.86371970985681366614e1,
                                     1.96520832956077098242e2,
                                     5.26445194995477358631e2,
                                     9.34528527171957607540e2,
                                     1.02755188689515710272e3,
                                     5.57535335369399327526e2};
inline constexpr double kErfcQ[8] = {1.32281951154744992508e1,
                                     8.67072140885989742329e1,
                                     3.54937778887819891062e2,
                                     9.75708501743205489753e2,
                                     1.82390916687909736289e3,
                                     2.24633760818710981792e3,
                                     1.65666309194161350182e3,
                                     5.57535340817727675546e2};
inline constexpr double kErfcR[6] = {5.64189583547755073984e-1,
                                     1.27536670759978104416e0,
                                     5.01905042251180477414e0,
                                     6.16021097993053585195e0,
                                     7.40974269950448939160e0,
                                     2.97886665372100240670e0};
inline constexpr double kErfcS[6] = {2.26052863220117276590e0,
                                     9.39603524938001434673e0,
                                     1.20489539808096656605e1,
                                     1.70814450747565897222e1,
                                     9.60896809063285878198e0,
                                     3.36907645100081516050e0};

template <class P>
inline P erfc_body(P a) {
  P x = pabs(a);
  auto neg = pcmp_lt(a, pset1_like(a, 0.0));
  auto small = pcmp_lt(x, pset1_like(a, 1.0));
  auto mid = pcmp_lt(x, pset1_like(a, 8.0));

  // |a| < 1: 1 - erf(a)
  P z2 = pmul(a, a);
  P erf_a = pmul(a, pdiv(poly(z2, kErfT), poly1(z2, kErfU)));
  P y_small = psub(pset1_like(a, 1.0), erf_a);

  // |a| >= 1: exp(-a^2) * rational(|a|)
  P ez = exp_body(pneg(z2));
  P y_mid = pmul(ez, pdiv(poly(x, kErfcP), poly1(x, kErfcQ)));
  P y_far = pmul(ez, pdiv(poly(x, kErfcR), poly1(x, kErfcS)));
  P y_large = pselect(mid, y_mid, y_far);
  y_large = pselect(neg, psub(pset1_like(a, 2.0), y_large), y_large);

  return pselect(small, y_small, y_large);
}

// ---------------------------------------------------------------------------
// Inverse normal CDF (Acklam)
// ---------------------------------------------------------------------------

inline constexpr double kIcdfA[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                     -2.759285104469687e+02, 1.383577518672690e+02,
                                     -3.066479806614716e+01, 2.506628277459239e+00};
inline constexpr double kIcdfB[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                     -1.556989798598866e+02, 6.680131188771972e+01,
                                     -1.328068155288572e+01};
inline constexpr double kIcdfC[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                     -2.400758277161838e+00, -2.549732539343734e+00,
                                     4.374664141464968e+00,  2.938163982698783e+00};
inline constexpr double kIcdfD[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                     2.445134137142996e+00, 3.754408661907416e+00};
inline constexpr double kIcdfPLow = 0.02425;

template <class P>
inline P normal_icdf_body(P p) {
  P one = pset1_like(p, 1.0);
  P half = pset1_like(p, 0.5);
  auto lo = pcmp_lt(p, pset1_like(p, kIcdfPLow));
  auto hi = pcmp_gt(p, pset1_like(p, 1.0 - kIcdfPLow));

  // central region
  P q = psub(p, half);
  P r = pmul(q, q);
  P num = pmul(poly(r, kIcdfA), q);
  P den = padd(pmul(poly1_shift(r, kIcdfB), r), one);
  P x_mid = pdiv(num, den);

  // lower tail. Clamp args away from 0 so unused lanes stay finite.
  P p_lo = pmax(p, pset1_like(p, 1e-310));
  P ql = psqrt(pmul(pset1_like(p, -2.0), log_body(p_lo)));
  P x_lo = pdiv(poly(ql, kIcdfC),
                padd(pmul(poly1_shift(ql, kIcdfD), ql), one));

  // upper tail
  P p_hi = pmax(psub(one, p), pset1_like(p, 1e-310));
  P qh = psqrt(pmul(pset1_like(p, -2.0), log_body(p_hi)));
  P x_hi = pneg(pdiv(poly(qh, kIcdfC),
                     padd(pmul(poly1_shift(qh, kIcdfD), qh), one)));

  return pselect(lo, x_lo, pselect(hi, x_hi, x_mid));
}

// Horner without the trailing constant: c[0] x^{N-1} + ... + c[N-1]; caller
// appends "* x + 1" to finish Acklam's monic-with-unit-constant denominators.
template <class P, std::size_t N>
inline P poly1_shift(P x, const double (&c)[N]) {
  P r = pset1_like(x, c[0]);
  for (std::size_t i = 1; i < N; ++i) {
    r = padd(pmul(r, x), pset1_like(x, c[i]));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Interval mass of a standard normal, tail-stable
// ---------------------------------------------------------------------------

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kMassFloor = 1e-300;

template <class P>
inline P interval_mass_body(P zlo, P zhi) {
  // Evaluate 0.5*(erfc(u) - erfc(v)) in whichever tail keeps both erfc
  // arguments non-negative-ish so the difference does not cancel.
  auto right = pcmp_ge(padd(zlo, zhi), pset1_like(zlo, 0.0));
  P is2 = pset1_like(zlo, kInvSqrt2);
  P u = pselect(right, pmul(zlo, is2), pmul(pneg(zhi), is2));
  P v = pselect(right, pmul(zhi, is2), pmul(pneg(zlo), is2));
  P mass = pmul(pset1_like(zlo, 0.5), psub(erfc_body(u), erfc_body(v)));
  return pmax(mass, pset1_like(zlo, kMassFloor));
}

template <class P>
inline P log_interval_mass_body(P zlo, P zhi) {
  return log_body(interval_mass_body(zlo, zhi));
}

}  // namespace ppm::kernels::detail
