#pragma once
// Counter-based random streams (Philox4x64-10, Salmon et al. 2011).
//
// Every random quantity in the library is drawn from a Stream addressed by
// (seed, stage, unit, aux). Identical addresses replay identical sequences
// no matter how calls are interleaved or scheduled, which is what makes
// replicate fan-out and per-record parallelism reproducible.

#include <cstdint>
#include <span>
#include <vector>

namespace ppm::rng {

// Stage tags keep logically distinct draw sites on disjoint streams.
enum class Stage : std::uint64_t {
  SeedDerive = 1,
  SimLatent = 2,
  SimNoise = 3,
  FitSigma = 4,
  FitBeta = 5,
  Predictive = 6,
  Synthesize = 7,
  Test = 100,
};

// One Philox4x64-10 block: counter -> 4 output words.
void philox4x64(const std::uint64_t counter[4], const std::uint64_t key[2],
                std::uint64_t out[4]);

class Stream {
 public:
  Stream(std::uint64_t seed, Stage stage, std::uint64_t unit = 0,
         std::uint64_t aux = 0);

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1).
  double uniform();
  void fill_uniform(std::span<double> out);

  // Standard normal via the inverse CDF; fill_normal and repeated normal()
  // consume the stream identically.
  double normal();
  void fill_normal(std::span<double> out);

  // Uniform integer in [0, n), unbiased (rejection).
  std::uint64_t uniform_index(std::uint64_t n);

  // Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
  double gamma(double shape);

 private:
  void refill();

  std::uint64_t key_[2];
  std::uint64_t base_[3];  // stage, unit, aux
  std::uint64_t block_ = 0;
  std::uint64_t buf_[4];
  int pos_ = 4;
};

// Deterministic per-replicate seeds derived from a master seed.
std::vector<std::uint64_t> replicate_seeds(std::uint64_t master,
                                           std::size_t count);

}  // namespace ppm::rng
