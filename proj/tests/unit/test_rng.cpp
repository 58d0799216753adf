#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ksample/numeric.hpp"
#include "ksample/rng.hpp"

namespace ksample {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(5);
  Rng b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, SubstreamsDependOnEveryPathElement) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s) {
    for (std::uint64_t t = 0; t < 4; ++t) seen.insert(derive_seed(s, {t, 1}));
  }
  EXPECT_EQ(seen.size(), 16u);
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_NE(derive_seed(1, {2}), derive_seed(1, {2, 0}));
  EXPECT_EQ(derive_seed(9, {4, 4}), derive_seed(9, {4, 4}));
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(1);
  double lo = 1.0;
  double hi = 0.0;
  CompensatedSum s;
  for (int i = 0; i < 100'000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    s.add(u);
  }
  EXPECT_GE(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(s.value() / 100'000.0, 0.5, 0.005);
}

TEST(Rng, UniformIndexCoversRange) {
  Rng rng(2);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits[rng.uniform_index(7)];
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, CategoricalRespectsZeroMass) {
  Rng rng(3);
  const std::vector<double> p{0.0, 0.3, 0.0, 0.7};
  for (int i = 0; i < 10'000; ++i) {
    const auto y = rng.categorical(p);
    EXPECT_TRUE(y == 1 || y == 3);
  }
}

TEST(Numeric, CompensatedSumRecoversCancelledTerms) {
  CompensatedSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  EXPECT_EQ(s.value(), 1.0);
}

TEST(Numeric, BinomialSmallValues) {
  EXPECT_EQ(binomial(5, 2), 10.0);
  EXPECT_EQ(binomial(30, 15), 155117520.0);
  EXPECT_EQ(binomial(3, 4), 0.0);
  EXPECT_EQ(binomial(0, 0), 1.0);
}

}  // namespace
}  // namespace ksample
