#include <gtest/gtest.h>

#include <cmath>
#include <tuple>
#include <vector>

#include "rankmerge/error.hpp"
#include "rankmerge/pairwise.hpp"
#include "rankmerge/rstats.hpp"
#include "support.hpp"

using namespace rankmerge;

namespace {

using Triple = std::tuple<std::size_t, std::size_t, double>;

std::pair<std::vector<Triple>, PairwiseSummary> collect(const DataMatrix& m, PairwiseOptions opt) {
  std::vector<Triple> out;
  const auto summary = pairwise_row_correlations(m, opt, [&](std::size_t a, std::size_t b, double r) {
    out.emplace_back(a, b, r);
  });
  return {out, summary};
}

}  // namespace

TEST(PairCount, Arithmetic) {
  EXPECT_EQ(pair_count(0), 0u);
  EXPECT_EQ(pair_count(1), 0u);
  EXPECT_EQ(pair_count(3), 3u);
  EXPECT_EQ(pair_count(2000), 1999000u);
  EXPECT_EQ(pair_count(15562), 15562u * 15561u / 2u);
  EXPECT_EQ(pair_count(15562), 121080141u);
}

TEST(Pairwise, ThreeRowsInOrder) {
  DataMatrix m({"a", "b", "c"}, {"s1", "s2", "s3", "s4"}, {1, 2, 3, 4, 2, 4, 6, 8, 4, 3, 2, 1});
  const auto [pairs, summary] = collect(m, {});
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(summary.emitted, 3u);
  EXPECT_EQ(pairs[0], Triple(0, 1, 1.0));
  EXPECT_EQ(std::get<1>(pairs[1]), 2u);
  EXPECT_NEAR(std::get<2>(pairs[1]), -1.0, 1e-15);
  EXPECT_EQ(std::get<0>(pairs[2]), 1u);
}

TEST(Pairwise, IdenticalRowsGiveExactlyOne) {
  auto base = rankmerge::testing::random_matrix(1, 50, 3);
  std::vector<double> values(base.values().begin(), base.values().end());
  values.insert(values.end(), base.values().begin(), base.values().end());
  DataMatrix m({"x", "y"}, base.col_names(), values);
  const auto [pairs, summary] = collect(m, {});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(std::get<2>(pairs[0]), 1.0);
}

TEST(Pairwise, MatchesScalarCorrelation) {
  const auto m = rankmerge::testing::random_matrix(40, 25, 17);
  for (auto method : {CorrelationMethod::pearson, CorrelationMethod::spearman}) {
    PairwiseOptions opt;
    opt.method = method;
    opt.chunk_rows = 7;
    const auto [pairs, summary] = collect(m, opt);
    ASSERT_EQ(pairs.size(), pair_count(40));
    std::size_t i = 0;
    for (std::size_t a = 0; a < 40; ++a) {
      for (std::size_t b = a + 1; b < 40; ++b, ++i) {
        EXPECT_EQ(std::get<0>(pairs[i]), a);
        EXPECT_EQ(std::get<1>(pairs[i]), b);
        EXPECT_NEAR(std::get<2>(pairs[i]), correlation(m.row(a), m.row(b), method), 1e-12);
      }
    }
  }
}

TEST(Pairwise, ConstantRowsSkippedAndCounted) {
  DataMatrix m({"a", "flat", "b"}, {"s1", "s2", "s3"}, {1, 2, 3, 5, 5, 5, 3, 1, 2});
  const auto [pairs, summary] = collect(m, {});
  EXPECT_EQ(pairs.size(), 1u);
  EXPECT_EQ(summary.skipped, 2u);
  EXPECT_EQ(summary.constant_rows, std::vector<std::size_t>{1});
  EXPECT_EQ(summary.emitted + summary.skipped, pair_count(3));
}

TEST(Pairwise, MissingValuesFallBackToCompletePairs) {
  DataMatrix m({"a", "b"}, {"s1", "s2", "s3", "s4", "s5"}, {1, 2, kMissing, 4, 5, 2, 4, 9, 8, 10});
  const auto [pairs, summary] = collect(m, {});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_NEAR(std::get<2>(pairs[0]), 1.0, 1e-15);
}

TEST(Pairwise, ThreadAndChunkInvariance) {
  const auto m = rankmerge::testing::random_matrix(150, 33, 5);
  PairwiseOptions base;
  const auto [ref, s0] = collect(m, base);
  for (unsigned threads : {2u, 3u, 8u}) {
    for (std::size_t chunk : {1u, 16u, 1000u}) {
      PairwiseOptions opt;
      opt.threads = threads;
      opt.chunk_rows = chunk;
      const auto [got, s] = collect(m, opt);
      ASSERT_EQ(got.size(), ref.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        // Bitwise equality, not tolerance.
        ASSERT_EQ(got[i], ref[i]) << threads << " " << chunk << " " << i;
      }
    }
  }
}

TEST(Pairwise, InputValidation) {
  DataMatrix one({"a"}, {"s1", "s2", "s3"}, {1, 2, 3});
  EXPECT_THROW(collect(one, {}), Error);
  DataMatrix narrow({"a", "b"}, {"s1", "s2"}, {1, 2, 3, 4});
  EXPECT_THROW(collect(narrow, {}), Error);
}
