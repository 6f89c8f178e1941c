#include "localpop/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

namespace localpop {
namespace {

// Reference generator, written independently from the published xoshiro256++
// and splitmix64 algorithms, used to pin the library's stream layout.
std::uint64_t ref_sm64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct RefXoshiro {
  std::uint64_t s[4];
  RefXoshiro(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t h =
        ref_sm64(master ^ 0x9E3779B97F4A7C15ULL) ^ ref_sm64(stream ^ 0xD1B54A32D192ED03ULL);
    for (auto& w : s) {
      h += 0x9E3779B97F4A7C15ULL;
      w = ref_sm64(h);
    }
  }
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t next() {
    std::uint64_t r = rotl(s[0] + s[3], 23) + s[0];
    std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return r;
  }
};

// splitmix64's published first output for seed 0.
static_assert(mix64(0) == 0xE220A8397B1DCDAFULL);

TEST(Mix64, MatchesPublishedVectors) {
  EXPECT_EQ(mix64(0), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(mix64(1), 0x910A2DEC89025CC1ULL);
}

TEST(MixPair, OrderSensitiveAndStable) {
  EXPECT_NE(mix_pair(1, 2), mix_pair(2, 1));
  EXPECT_EQ(mix_pair(7, 9), mix_pair(7, 9));
  // spot-check spread: low-entropy inputs land far apart
  std::map<std::uint64_t, int> seen;
  for (std::uint64_t a = 0; a < 64; ++a)
    for (std::uint64_t b = 0; b < 64; ++b) seen[mix_pair(a, b)]++;
  EXPECT_EQ(seen.size(), 64u * 64u);
}

TEST(Rng, StreamFrozen) {
  Rng rng(Seed{1, 2});
  EXPECT_EQ(rng.next(), 0x2644A0DE52D8B126ULL);
  EXPECT_EQ(rng.next(), 0x55E607AFF537BC05ULL);
  EXPECT_EQ(rng.next(), 0x76FBB0D0427EA880ULL);
  EXPECT_EQ(rng.next(), 0x3EE8E5D46E6A7E60ULL);

  Rng rng2(Seed{0xDEADBEEFCAFEF00DULL, 42});
  EXPECT_EQ(rng2.next(), 0xD3E160D03BF97FA5ULL);
  EXPECT_EQ(rng2.next(), 0xC0B4112E36E93C1FULL);
}

TEST(Rng, MatchesReferenceImplementation) {
  const Seed seeds[] = {{0, 0}, {1, 2}, {123456789, 987654321}, {~0ULL, ~0ULL}};
  for (Seed sd : seeds) {
    Rng lib(sd);
    RefXoshiro ref(sd.master, sd.stream);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(lib.next(), ref.next());
  }
}

TEST(Rng, StreamsDiffer) {
  Rng a(Seed{5, 0});
  Rng b(Seed{5, 1});
  Rng c(Seed{6, 0});
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    std::uint64_t x = a.next();
    same_ab += (x == b.next());
    same_ac += (x == c.next());
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(Rng, NextDoubleRangeAndMean) {
  Rng rng(Seed{11, 0});
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double u = rng.next_double();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // mean 1/2, sd of mean = 1/sqrt(12 n) ~ 9.1e-4; 5 sigma band
  EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(Rng, NextBelowBoundsAndUniformity) {
  Rng rng(Seed{12, 0});
  EXPECT_EQ(rng.next_below(1), 0u);

  const std::uint64_t bound = 6;
  const int n = 120000;
  std::vector<int> counts(bound, 0);
  for (int i = 0; i < n; ++i) {
    std::uint64_t v = rng.next_below(bound);
    ASSERT_LT(v, bound);
    counts[static_cast<std::size_t>(v)]++;
  }
  const double expect = static_cast<double>(n) / static_cast<double>(bound);
  const double band = 4.5 * std::sqrt(expect * (1.0 - 1.0 / static_cast<double>(bound)));
  for (std::uint64_t v = 0; v < bound; ++v)
    EXPECT_NEAR(counts[static_cast<std::size_t>(v)], expect, band) << "value " << v;
}

TEST(Rng, ThresholdsExact) {
  EXPECT_EQ(Rng::threshold64(0.0), 0u);
  EXPECT_EQ(Rng::threshold64(-1.0), 0u);
  EXPECT_EQ(Rng::threshold64(1.0), ~0ULL);
  EXPECT_EQ(Rng::threshold64(0.5), 1ULL << 63);
  EXPECT_EQ(Rng::threshold64(0.25), 1ULL << 62);
  EXPECT_EQ(Rng::threshold32(0.0), 0u);
  EXPECT_EQ(Rng::threshold32(1.0), 0xFFFFFFFFu);
  EXPECT_EQ(Rng::threshold32(0.5), 1u << 31);
  EXPECT_EQ(Rng::threshold32(0.25), 1u << 30);
}

TEST(Rng, BernoulliFrequency) {
  Rng rng(Seed{13, 0});
  const double p = 0.3;
  const std::uint64_t thr = Rng::threshold64(p);
  const int n = 200000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += rng.bernoulli(thr);
  const double band = 4.5 * std::sqrt(p * (1 - p) / n);
  EXPECT_NEAR(static_cast<double>(hits) / n, p, band);

  Rng rng0(Seed{13, 1});
  for (int i = 0; i < 1000; ++i) EXPECT_FALSE(rng0.bernoulli(Rng::threshold64(0.0)));
}

TEST(Rng, ShuffleIsPermutationAndUniform) {
  Rng rng(Seed{14, 0});
  std::vector<int> v(10);
  std::iota(v.begin(), v.end(), 0);
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);

  // all 24 permutations of 4 elements equally likely
  const int n = 240000;
  std::map<std::array<int, 4>, int> freq;
  for (int t = 0; t < n; ++t) {
    std::vector<int> w{0, 1, 2, 3};
    rng.shuffle(w);
    freq[{w[0], w[1], w[2], w[3]}]++;
  }
  ASSERT_EQ(freq.size(), 24u);
  const double expect = n / 24.0;
  const double band = 5.0 * std::sqrt(expect);
  for (const auto& [perm, count] : freq) EXPECT_NEAR(count, expect, band);

  // degenerate sizes are no-ops
  std::vector<int> one{7};
  rng.shuffle(one);
  EXPECT_EQ(one[0], 7);
  std::vector<int> none;
  rng.shuffle(none);
  EXPECT_TRUE(none.empty());
}

TEST(GeometricSkip, RejectsBadEpsilon) {
  EXPECT_THROW(GeometricSkip(0.0), std::invalid_argument);
  EXPECT_THROW(GeometricSkip(1.0), std::invalid_argument);
  EXPECT_THROW(GeometricSkip(-0.5), std::invalid_argument);
  EXPECT_THROW(GeometricSkip(1.5), std::invalid_argument);
}

TEST(GeometricSkip, MatchesGeometricPmf) {
  const double eps = 0.75;
  GeometricSkip skip(eps);
  Rng rng(Seed{15, 0});
  const int n = 200000;
  std::vector<int> counts(16, 0);
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    std::uint32_t aux = 0;
    std::int64_t g = skip.sample(rng, aux);
    ASSERT_GE(g, 0);
    mean += static_cast<double>(g);
    if (g < 16) counts[static_cast<std::size_t>(g)]++;
  }
  mean /= n;
  // E[gap] = eps / (1 - eps) = 3, sd of mean = sqrt(eps)/(1-eps)/sqrt(n)
  EXPECT_NEAR(mean, 3.0, 5.0 * std::sqrt(eps) / (1 - eps) / std::sqrt(n));
  for (int g = 0; g < 10; ++g) {
    const double pg = (1 - eps) * std::pow(eps, g);
    const double band = 4.5 * std::sqrt(pg * (1 - pg) * n);
    EXPECT_NEAR(counts[static_cast<std::size_t>(g)], pg * n, band) << "gap " << g;
  }
}

TEST(GeometricSkip, EscapePathForHeavyErasure) {
  // gaps >= 255 occur with probability 0.998^255 ~ 0.60
  const double eps = 0.998;
  GeometricSkip skip(eps);
  Rng rng(Seed{16, 0});
  const int n = 20000;
  double mean = 0.0;
  int big = 0;
  for (int i = 0; i < n; ++i) {
    std::uint32_t aux = 0;
    std::int64_t g = skip.sample(rng, aux);
    mean += static_cast<double>(g);
    big += (g >= 255);
  }
  mean /= n;
  const double want = eps / (1 - eps);
  EXPECT_NEAR(mean, want, 5.0 * std::sqrt(eps) / (1 - eps) / std::sqrt(n));
  const double pbig = std::pow(eps, 255.0);
  EXPECT_NEAR(static_cast<double>(big) / n, pbig, 4.5 * std::sqrt(pbig * (1 - pbig) / n));
}

TEST(GeometricSkip, AuxBitsAreUniform) {
  GeometricSkip skip(0.5);
  Rng rng(Seed{17, 0});
  const int n = 100000;
  double sum = 0.0;
  int low_bit = 0;
  for (int i = 0; i < n; ++i) {
    std::uint32_t aux = 0;
    skip.sample(rng, aux);
    sum += static_cast<double>(aux) * 0x1.0p-32;
    low_bit += aux & 1u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.006);
  EXPECT_NEAR(static_cast<double>(low_bit) / n, 0.5, 0.008);
}

TEST(GeometricSkip, Deterministic) {
  GeometricSkip skip(0.9);
  Rng a(Seed{18, 3}), b(Seed{18, 3});
  for (int i = 0; i < 1000; ++i) {
    std::uint32_t xa = 0, xb = 0;
    ASSERT_EQ(skip.sample(a, xa), skip.sample(b, xb));
    ASSERT_EQ(xa, xb);
  }
}

}  // namespace
}  // namespace localpop
