#include "ppm/rng.hpp"

#include <stdexcept>

#include "ppm/kernels.hpp"

namespace ppm::rng {

namespace {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ull;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ull;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
  unsigned __int128 prod =
      static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b);
  hi = static_cast<std::uint64_t>(prod >> 64);
  lo = static_cast<std::uint64_t>(prod);
}

inline void philox_round(std::uint64_t ctr[4], const std::uint64_t key[2]) {
  std::uint64_t hi0, lo0, hi1, lo1;
  mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
  mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
  std::uint64_t out0 = hi1 ^ ctr[1] ^ key[0];
  std::uint64_t out1 = lo1;
  std::uint64_t out2 = hi0 ^ ctr[3] ^ key[1];
  std::uint64_t out3 = lo0;
  ctr[0] = out0;
  ctr[1] = out1;
  ctr[2] = out2;
  ctr[3] = out3;
}

// Distinct key halves for the two stream families derived from one seed.
constexpr std::uint64_t kKeySalt = 0x243F6A8885A308D3ull;  // pi digits

}  // namespace

void philox4x64(const std::uint64_t counter[4], const std::uint64_t key[2],
                std::uint64_t out[4]) {
  std::uint64_t ctr[4] = {counter[0], counter[1], counter[2], counter[3]};
  std::uint64_t k[2] = {key[0], key[1]};
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    philox_round(ctr, k);
  }
  out[0] = ctr[0];
  out[1] = ctr[1];
  out[2] = ctr[2];
  out[3] = ctr[3];
}

Stream::Stream(std::uint64_t seed, Stage stage, std::uint64_t unit,
               std::uint64_t aux) {
  key_[0] = seed;
  key_[1] = kKeySalt;
  base_[0] = static_cast<std::uint64_t>(stage);
  base_[1] = unit;
  base_[2] = aux;
}

void Stream::refill() {
  std::uint64_t ctr[4] = {block_, base_[0], base_[1], base_[2]};
  philox4x64(ctr, key_, buf_);
  ++block_;
  pos_ = 0;
}

std::uint64_t Stream::next_u64() {
  if (pos_ >= 4) refill();
  return buf_[pos_++];
}

double Stream::uniform() {
  // 53 random bits plus a half-ulp offset keeps the value strictly inside
  // (0, 1), which the inverse-CDF transform requires.
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

void Stream::fill_uniform(std::span<double> out) {
  for (double& v : out) v = uniform();
}

double Stream::normal() { return kernels::normal_icdf_e(uniform()); }

void Stream::fill_normal(std::span<double> out) {
  fill_uniform(out);
  kernels::normal_icdf_v(out.data(), out.size(), out.data());
}

std::uint64_t Stream::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const std::uint64_t threshold = (-n) % n;
  for (;;) {
    std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

double Stream::gamma(double shape) {
  if (!(shape > 0.0)) {
    throw std::invalid_argument("gamma: shape must be positive");
  }
  if (shape < 1.0) {
    // Boost to shape+1 and scale by U^(1/shape).
    double g = gamma(shape + 1.0);
    double u = uniform();
    return g * kernels::exp_e(kernels::log_e(u) / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / __builtin_sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = uniform();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (kernels::log_e(u) < 0.5 * x2 + d * (1.0 - v + kernels::log_e(v))) {
      return d * v;
    }
  }
}

std::vector<std::uint64_t> replicate_seeds(std::uint64_t master,
                                           std::size_t count) {
  if (count < 1) {
    throw std::invalid_argument("replicate_seeds: count must be >= 1");
  }
  std::vector<std::uint64_t> seeds(count);
  Stream s(master, Stage::SeedDerive);
  for (auto& v : seeds) v = s.next_u64();
  return seeds;
}

}  // namespace ppm::rng
