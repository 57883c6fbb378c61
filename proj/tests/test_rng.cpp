#include <gtest/gtest.h>

#include <set>

#include "sara/rng.hpp"

using namespace sara;

TEST(Rng, SameSeedSameSequence) {
  RandomStream a = seeded_rng(7), b = seeded_rng(7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, SplitStreamsDiffer) {
  RandomStream a = seeded_rng(7, DmaId{0}), b = seeded_rng(7, DmaId{1});
  int equal = 0;
  for (int i = 0; i < 1000; ++i) equal += a.next_u64() == b.next_u64();
  EXPECT_EQ(equal, 0);
  RandomStream again = seeded_rng(7, DmaId{0}), first = seeded_rng(7, DmaId{0});
  EXPECT_EQ(again.next_u64(), first.next_u64());
}

TEST(Rng, UniformMean) {
  RandomStream r = seeded_rng(1);
  double sum = 0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(Rng, BelowCoversRangeUniformly) {
  RandomStream r(3);
  std::array<int, 7> hist{};
  const int n = 700'000;
  for (int i = 0; i < n; ++i) ++hist[r.below(7)];
  for (int h : hist) EXPECT_NEAR(h, n / 7, n / 7 * 0.02);
}

TEST(Rng, ExponentialMean) {
  RandomStream r(9);
  double sum = 0;
  const int n = 500'000;
  for (int i = 0; i < n; ++i) sum += r.exponential(12.5);
  EXPECT_NEAR(sum / n, 12.5, 0.1);
}

TEST(Rng, FixedFirstDraws) {
  // Frozen outputs: guard against accidental changes to seeding.
  RandomStream r = seeded_rng(1);
  const std::uint64_t first = r.next_u64();
  RandomStream again = seeded_rng(1);
  EXPECT_EQ(again.next_u64(), first);
  EXPECT_EQ(mix64(0), 0xe220a8397b1dcdafull);
}
