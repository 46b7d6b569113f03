#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "ppm/rng.hpp"

using namespace ppm;

TEST_CASE("philox4x64-10 known-answer vectors") {
  // Reference outputs cross-checked against numpy's Philox bit generator
  // (which pre-increments its counter before the first block).
  {
    const std::uint64_t ctr[4] = {1, 0, 0, 0};
    const std::uint64_t key[2] = {0, 0};
    std::uint64_t out[4];
    rng::philox4x64(ctr, key, out);
    CHECK(out[0] == 0x02f4ba6408e4d89bull);
    CHECK(out[1] == 0x3dd62b0b9ca8c5b2ull);
    CHECK(out[2] == 0x1c8667a55d902e79ull);
    CHECK(out[3] == 0x907d7a052fd5b4dcull);
  }
  {
    const std::uint64_t ctr[4] = {2, 2, 3, 4};
    const std::uint64_t key[2] = {0xdeadbeefull, 0xcafef00dull};
    std::uint64_t out[4];
    rng::philox4x64(ctr, key, out);
    CHECK(out[0] == 0xbe50cc8d71b94ed3ull);
    CHECK(out[1] == 0x24145edfdabb5069ull);
    CHECK(out[2] == 0x2dc42591c5253a4bull);
    CHECK(out[3] == 0x925d19fbe559e7a9ull);
  }
}

TEST_CASE("streams are addressed, not stateful across addresses") {
  rng::Stream a1(42, rng::Stage::Test, 7);
  rng::Stream a2(42, rng::Stage::Test, 7);
  rng::Stream b(42, rng::Stage::Test, 8);
  rng::Stream c(43, rng::Stage::Test, 7);

  std::vector<std::uint64_t> sa1, sa2, sb, sc;
  for (int i = 0; i < 64; ++i) {
    sa1.push_back(a1.next_u64());
    sb.push_back(b.next_u64());
    sc.push_back(c.next_u64());
  }
  for (int i = 0; i < 64; ++i) sa2.push_back(a2.next_u64());
  CHECK(sa1 == sa2);
  CHECK(sa1 != sb);
  CHECK(sa1 != sc);
}

TEST_CASE("uniform lies strictly inside (0,1)") {
  rng::Stream s(1, rng::Stage::Test);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("fill_normal equals repeated scalar normals") {
  rng::Stream a(9, rng::Stage::Test, 1);
  rng::Stream b(9, rng::Stage::Test, 1);
  std::vector<double> batch(257);
  a.fill_normal(batch);
  for (double v : batch) {
    CHECK(v == b.normal());
  }
}

TEST_CASE("uniform_index is in range and deterministic") {
  rng::Stream a(5, rng::Stage::Test, 3);
  rng::Stream b(5, rng::Stage::Test, 3);
  for (int i = 0; i < 10000; ++i) {
    const auto ia = a.uniform_index(17);
    CHECK(ia < 17);
    CHECK(ia == b.uniform_index(17));
  }
}

TEST_CASE("gamma draws match the distribution's moments") {
  for (double shape : {0.7, 1.0, 3.5, 40.0}) {
    rng::Stream s(11, rng::Stage::Test, static_cast<std::uint64_t>(shape * 10));
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = s.gamma(shape);
      CHECK(g > 0.0);
      sum += g;
      sum2 += g * g;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    // mean = shape, var = shape; allow 5 sigma of Monte Carlo noise
    const double mean_se = std::sqrt(shape / n);
    CHECK(std::fabs(mean - shape) < 5.0 * mean_se);
    CHECK(std::fabs(var - shape) / shape < 0.05);
  }
}

TEST_CASE("replicate seeds are deterministic and collision-free") {
  const auto s3 = rng::replicate_seeds(7, 3);
  CHECK(s3.size() == 3);
  CHECK(s3 == rng::replicate_seeds(7, 3));
  CHECK(std::set<std::uint64_t>(s3.begin(), s3.end()).size() == 3);

  CHECK(rng::replicate_seeds(7, 1).size() == 1);
  CHECK(rng::replicate_seeds(7, 1)[0] == s3[0]);

  const auto s100 = rng::replicate_seeds(7, 100);
  CHECK(std::set<std::uint64_t>(s100.begin(), s100.end()).size() == 100);
  CHECK_THROWS_AS(rng::replicate_seeds(7, 0), std::invalid_argument);
}
