#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rankmerge/error.hpp"
#include "rankmerge/numerics.hpp"
#include "rankmerge/transform.hpp"
#include "support.hpp"

using namespace rankmerge;

namespace {

const double NA = kMissing;

// O(n^2) midrank oracle: 1 + #smaller + (#equal - 1) / 2.
std::vector<double> naive_midranks(const std::vector<double>& x) {
  std::vector<double> out(x.size(), NA);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (is_missing(x[i])) continue;
    double less = 0;
    double equal = 0;
    for (double y : x) {
      if (is_missing(y)) continue;
      less += y < x[i];
      equal += y == x[i];
    }
    out[i] = 1 + less + (equal - 1) / 2;
  }
  return out;
}

}  // namespace

TEST(Midrank, TiesAveraged) {
  const std::vector<double> x{10, 20, 20, 30};
  const auto r = midrank(x);
  EXPECT_EQ(r.ranks, (std::vector<double>{1, 2.5, 2.5, 4}));
  EXPECT_EQ(r.n, 4u);
}

TEST(Midrank, MissingStayMissing) {
  const std::vector<double> x{3, NA, 1};
  const auto r = midrank(x);
  EXPECT_EQ(r.n, 2u);
  EXPECT_EQ(r.ranks[0], 2.0);
  EXPECT_TRUE(is_missing(r.ranks[1]));
  EXPECT_EQ(r.ranks[2], 1.0);
  EXPECT_THROW(midrank(std::vector<double>{NA, NA}), Error);
}

TEST(Midrank, MatchesNaiveOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> small(0, 6);
  std::bernoulli_distribution miss(0.1);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> x(1 + rep % 40);
    for (auto& v : x) v = miss(rng) ? NA : small(rng);
    if (std::all_of(x.begin(), x.end(), [](double v) { return is_missing(v); })) x[0] = 1;
    const auto got = midrank(x).ranks;
    const auto want = naive_midranks(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (is_missing(want[i])) {
        EXPECT_TRUE(is_missing(got[i]));
      } else {
        EXPECT_EQ(got[i], want[i]);
      }
    }
  }
}

TEST(Ecdf, Examples) {
  EXPECT_EQ(ecdf_score(std::vector<double>{10, 20, 30, 40}), (std::vector<double>{0.25, 0.5, 0.75, 1.0}));
  const auto e = ecdf_score(std::vector<double>{5, NA, 7});
  EXPECT_EQ(e[0], 0.5);
  EXPECT_TRUE(is_missing(e[1]));
  EXPECT_EQ(e[2], 1.0);
}

TEST(Vdw, Examples) {
  const auto v = vdw_score(std::vector<double>{1, 2, 3});
  EXPECT_NEAR(v[0], -0.6744897501960817, 1e-12);
  EXPECT_EQ(v[1], 0.0);
  EXPECT_NEAR(v[2], 0.6744897501960817, 1e-12);
  const auto t = vdw_score(std::vector<double>{2, 2});
  EXPECT_EQ(t[0], 0.0);
  EXPECT_EQ(t[1], 0.0);
}

TEST(Vdw, SymmetricColumnSumsToZero) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  for (int n : {1, 2, 10, 101, 1000}) {
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    const auto s = vdw_score(x);
    double sum = 0;
    for (double v : s) sum += v;
    EXPECT_LT(std::fabs(sum), 1e-9 * n);
  }
}

TEST(Score, MonotoneInvariance) {
  const auto m = rankmerge::testing::random_matrix(200, 6, 8);
  std::vector<double> ex(m.values().begin(), m.values().end());
  for (auto& v : ex) v = std::exp(v);
  const DataMatrix me(m.row_names(), m.col_names(), ex);
  for (auto kind : {ScoreKind::ecdf, ScoreKind::vdw}) {
    EXPECT_EQ(score_columns(m, kind), score_columns(me, kind));
  }
}

TEST(Score, ThreadCountDoesNotChangeResult) {
  const auto m = rankmerge::testing::random_matrix(300, 17, 12);
  EXPECT_EQ(score_columns(m, ScoreKind::vdw, 1), score_columns(m, ScoreKind::vdw, 4));
}

TEST(Score, RejectsDoubleScoringAndNone) {
  const auto ds = rankmerge::testing::make_dataset(rankmerge::testing::random_matrix(5, 3, 1), "d", "g");
  const auto once = score_dataset(ds, ScoreKind::vdw);
  EXPECT_EQ(once.meta().score, ScoreKind::vdw);
  try {
    score_dataset(once, ScoreKind::ecdf);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::score_state);
  }
  EXPECT_THROW(score_columns(ds.data(), ScoreKind::none), Error);
}

TEST(Score, AllMissingColumnNamed) {
  DataMatrix m({"a", "b"}, {"good", "empty"}, {1, NA, 2, NA});
  try {
    score_columns(m, ScoreKind::ecdf);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("empty"), std::string::npos);
  }
}
