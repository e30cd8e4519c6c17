#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "mcx/common.hpp"

using namespace mcx;

TEST(Common, HashesAreDeterministicAndOrderSensitive) {
  EXPECT_EQ(hash_words({1, 2, 3}), hash_words({1, 2, 3}));
  EXPECT_NE(hash_words({1, 2, 3}), hash_words({3, 2, 1}));
  EXPECT_EQ(hash_string("abc"), hash_string("abc"));
  EXPECT_NE(hash_string("abc"), hash_string("abd"));
}

TEST(Common, UniformOpen01StaysInsideTheInterval) {
  Rng rng(3);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform_open01(rng);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 10000, 0.5, 0.01);
}

TEST(Common, UniformIndexCoversRange) {
  Rng rng(5);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto k = uniform_index(rng, 7);
    ASSERT_LT(k, 7u);
    seen.insert(k);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Common, ShuffleIsAPermutationAndReproducible) {
  std::vector<int> a(50), b(50);
  std::iota(a.begin(), a.end(), 0);
  b = a;
  Rng r1(9), r2(9);
  shuffle_in_place(a, r1);
  shuffle_in_place(b, r2);
  EXPECT_EQ(a, b);
  std::vector<int> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Common, ParallelForVisitsEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (const int h : hits) EXPECT_EQ(h, 1);
}

TEST(Common, FormatDoubleRoundTrips) {
  for (const double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e15, 0.0}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Common, StandardNormalMoments) {
  Rng rng(11);
  double s = 0, s2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.03);
  EXPECT_NEAR(s2 / n, 1.0, 0.04);
}
