// AVX2 backend. Avx2Pack mirrors ScalarPack operation-for-operation; every
// intrinsic used here is correctly rounded per lane, so results match the
// scalar backend bitwise.

#if defined(PPM_HAVE_AVX2)

#include <immintrin.h>

#include <bit>
#include <cstdint>

#include "pack_math.hpp"

namespace ppm::kernels::detail {

struct Avx2Pack {
  __m256d v;
  static constexpr std::size_t width = 4;
};

struct Avx2Mask {
  __m256d m;
};

inline Avx2Pack pset1_like(Avx2Pack, double x) { return {_mm256_set1_pd(x)}; }
inline Avx2Pack pload_v(const double* p, Avx2Pack*) {
  return {_mm256_loadu_pd(p)};
}
inline void pstore(double* p, Avx2Pack a) { _mm256_storeu_pd(p, a.v); }

inline Avx2Pack padd(Avx2Pack a, Avx2Pack b) {
  return {_mm256_add_pd(a.v, b.v)};
}
inline Avx2Pack psub(Avx2Pack a, Avx2Pack b) {
  return {_mm256_sub_pd(a.v, b.v)};
}
inline Avx2Pack pmul(Avx2Pack a, Avx2Pack b) {
  return {_mm256_mul_pd(a.v, b.v)};
}
inline Avx2Pack pdiv(Avx2Pack a, Avx2Pack b) {
  return {_mm256_div_pd(a.v, b.v)};
}
inline Avx2Pack psqrt(Avx2Pack a) { return {_mm256_sqrt_pd(a.v)}; }

inline Avx2Pack pabs(Avx2Pack a) {
  const __m256d mask =
      _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFll));
  return {_mm256_and_pd(a.v, mask)};
}
inline Avx2Pack pneg(Avx2Pack a) {
  const __m256d sign =
      _mm256_castsi256_pd(_mm256_set1_epi64x(0x8000000000000000ull));
  return {_mm256_xor_pd(a.v, sign)};
}
inline Avx2Pack pmin(Avx2Pack a, Avx2Pack b) {
  return {_mm256_min_pd(a.v, b.v)};
}
inline Avx2Pack pmax(Avx2Pack a, Avx2Pack b) {
  return {_mm256_max_pd(a.v, b.v)};
}

inline Avx2Mask pcmp_lt(Avx2Pack a, Avx2Pack b) {
  return {_mm256_cmp_pd(a.v, b.v, _CMP_LT_OQ)};
}
inline Avx2Mask pcmp_le(Avx2Pack a, Avx2Pack b) {
  return {_mm256_cmp_pd(a.v, b.v, _CMP_LE_OQ)};
}
inline Avx2Mask pcmp_gt(Avx2Pack a, Avx2Pack b) {
  return {_mm256_cmp_pd(a.v, b.v, _CMP_GT_OQ)};
}
inline Avx2Mask pcmp_ge(Avx2Pack a, Avx2Pack b) {
  return {_mm256_cmp_pd(a.v, b.v, _CMP_GE_OQ)};
}

inline Avx2Pack pselect(Avx2Mask m, Avx2Pack a, Avx2Pack b) {
  return {_mm256_blendv_pd(b.v, a.v, m.m)};
}
inline Avx2Mask pmask_or(Avx2Mask a, Avx2Mask b) {
  return {_mm256_or_pd(a.m, b.m)};
}
inline int pcount_true(Avx2Mask m) {
  return __builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(m.m)));
}

inline Avx2Pack pround(Avx2Pack x) {
  const __m256d magic = _mm256_set1_pd(kMagic);
  return {_mm256_sub_pd(_mm256_add_pd(x.v, magic), magic)};
}

inline Avx2Pack pexp2i(Avx2Pack k) {
  const __m256d magic = _mm256_set1_pd(kMagic);
  const __m256i magic_bits =
      _mm256_set1_epi64x(static_cast<long long>(std::bit_cast<std::uint64_t>(kMagic)));
  __m256i ki = _mm256_sub_epi64(
      _mm256_castpd_si256(_mm256_add_pd(k.v, magic)), magic_bits);
  __m256i bits =
      _mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52);
  return {_mm256_castsi256_pd(bits)};
}

inline void pfrexp(Avx2Pack x, Avx2Pack& mant, Avx2Pack& expo) {
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll);
  const __m256i half_exp = _mm256_set1_epi64x(0x3FE0000000000000ll);
  const __m256i magic_bits =
      _mm256_set1_epi64x(static_cast<long long>(std::bit_cast<std::uint64_t>(kMagic)));
  const __m256d magic = _mm256_set1_pd(kMagic);

  __m256i bits = _mm256_castpd_si256(x.v);
  __m256i e = _mm256_sub_epi64(
      _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7FF)),
      _mm256_set1_epi64x(1022));
  mant.v = _mm256_castsi256_pd(
      _mm256_or_si256(_mm256_and_si256(bits, mant_mask), half_exp));
  expo.v = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_add_epi64(e, magic_bits)), magic);
}

}  // namespace ppm::kernels::detail

#include "kernel_loops.hpp"

namespace ppm::kernels::detail {
const KernelOps avx2_ops = make_ops<Avx2Pack>();
}  // namespace ppm::kernels::detail

#endif  // PPM_HAVE_AVX2
