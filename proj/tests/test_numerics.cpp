#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rankmerge/error.hpp"
#include "rankmerge/numerics.hpp"

using namespace rankmerge;

namespace {

// Independent oracles in extended precision.
long double oracle_upper_tail(long double z) { return 0.5L * std::erfc(z / std::sqrt(2.0L)); }

double oracle_quantile(double p) {
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::numbers::sqrt2) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Closed-form chi-square survival: even df is a Poisson sum, odd df adds the
// normal tail to a half-integer series.
long double oracle_chi_sq_upper(long double x, int df) {
  const long double h = x / 2;
  if (df % 2 == 0) {
    long double term = 1;
    long double sum = 1;
    for (int i = 1; i < df / 2; ++i) {
      term *= h / i;
      sum += term;
    }
    return std::exp(-h) * sum;
  }
  long double q = 2 * oracle_upper_tail(std::sqrt(x));
  long double term = std::sqrt(x) * std::exp(-h) / std::sqrt(std::numbers::pi_v<long double> * 2) * 2;
  for (int k = 1; k <= (df - 1) / 2; ++k) {
    q += term;
    term *= x / (2 * k + 1);
  }
  return q;
}

}  // namespace

TEST(LogP, RejectsPositiveAndNan) {
  EXPECT_THROW(LogP(0.1), Error);
  EXPECT_THROW(LogP(std::nan("")), Error);
  EXPECT_THROW(LogP::from_probability(1.5), Error);
  EXPECT_EQ(LogP::one().ln(), 0.0);
}

TEST(LogP, UnderflowMarker) {
  EXPECT_FALSE(LogP::from_probability(1e-300).underflows());
  EXPECT_TRUE(LogP(-800.0).underflows());
  EXPECT_NEAR(LogP(-800.0).log10(), -800.0 / std::numbers::ln10, 1e-12);
}

TEST(NormCdf, KnownValues) {
  EXPECT_DOUBLE_EQ(norm_cdf(0.0), 0.5);
  EXPECT_NEAR(norm_cdf(1.959963984540054), 0.975, 1e-15);
  EXPECT_NEAR(norm_cdf(-1.0), 0.15865525393145707, 1e-15);
}

TEST(InvNormCdf, KnownQuantiles) {
  EXPECT_EQ(inv_norm_cdf(0.5), 0.0);
  EXPECT_NEAR(inv_norm_cdf(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(inv_norm_cdf(0.05), -1.6448536269514722, 1e-12);
  EXPECT_NEAR(inv_norm_cdf(1e-10), -6.361340902404056, 1e-9);
}

TEST(InvNormCdf, RoundTripGrid) {
  std::vector<double> grid;
  for (int e = -8; e <= -1; ++e) {
    for (double m : {1.0, 2.5, 5.0}) grid.push_back(m * std::pow(10.0, e));
  }
  for (double p = 0.1; p < 0.9; p += 0.01) grid.push_back(p);
  const std::size_t half = grid.size();
  for (std::size_t i = 0; i < half; ++i) grid.push_back(1.0 - grid[i]);

  for (double p : grid) {
    EXPECT_NEAR(norm_cdf(inv_norm_cdf(p)), p, 1e-10) << p;
    EXPECT_NEAR(inv_norm_cdf(p), oracle_quantile(p), 1e-9 * std::max(1.0, std::fabs(oracle_quantile(p)))) << p;
  }
}

TEST(InvNormCdf, MonotoneAndAntisymmetric) {
  double prev = -std::numeric_limits<double>::infinity();
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    const double z = inv_norm_cdf(p);
    EXPECT_GT(z, prev);
    EXPECT_NEAR(z, -inv_norm_cdf(1.0 - p), 1e-12);
    prev = z;
  }
}

TEST(InvNormCdf, DomainErrors) {
  EXPECT_THROW(inv_norm_cdf(0.0), Error);
  EXPECT_THROW(inv_norm_cdf(1.0), Error);
  EXPECT_THROW(inv_norm_cdf(-0.2), Error);
}

TEST(NormUpperTail, MatchesExtendedPrecisionErfc) {
  for (double z = -8.0; z <= 37.0; z += 0.25) {
    const long double oracle = oracle_upper_tail(z);
    const double got = norm_upper_tail_ln(z).ln();
    EXPECT_NEAR(got, static_cast<double>(std::log(oracle)), 1e-10 * std::max(1.0, std::fabs(got))) << z;
  }
}

TEST(NormUpperTail, FiniteFarInTheTail) {
  const double at40 = norm_upper_tail_ln(40.0).ln();
  EXPECT_TRUE(std::isfinite(at40));
  // ln Q(40) = -z^2/2 - ln(z sqrt(2 pi)) - 1/z^2 + ...
  EXPECT_NEAR(at40, -800.0 - std::log(40.0 * std::sqrt(2 * std::numbers::pi)) - 1.0 / 1600.0, 1e-5);
  EXPECT_TRUE(std::isfinite(norm_upper_tail_ln(1000.0).ln()));
  EXPECT_EQ(norm_upper_tail_ln(0.0).ln(), std::log(0.5));
}

TEST(ChiSquare, SpecialCases) {
  EXPECT_EQ(chi_sq_upper_tail_ln(0.0, 1).ln(), 0.0);
  EXPECT_EQ(chi_sq_upper_tail_ln(0.0, 7).ln(), 0.0);
  EXPECT_NEAR(chi_sq_upper_tail_ln(3.841459, 1).ln(), std::log(0.05), 1e-6);
  EXPECT_NEAR(chi_sq_upper_tail_ln(4.60517, 2).ln(), -4.60517 / 2, 1e-15);
  EXPECT_THROW(chi_sq_upper_tail_ln(1.0, 0), Error);
  EXPECT_THROW(chi_sq_upper_tail_ln(-1.0, 2), Error);
}

TEST(ChiSquare, NormalTailIdentity) {
  for (double z = -35.0; z <= 35.0; z += 0.125) {
    const double lhs = chi_sq_upper_tail_ln(z * z, 1).ln();
    const double rhs = std::log(2.0) + norm_upper_tail_ln(std::fabs(z)).ln();
    EXPECT_NEAR(lhs, rhs, 1e-8 * std::max(1.0, std::fabs(rhs))) << z;
  }
}

TEST(ChiSquare, ClosedFormOracle) {
  for (int df : {1, 2, 3, 4, 5, 8, 11, 20, 31}) {
    for (double x : {0.01, 0.5, 1.0, 2.0, 5.5, 10.0, 25.0, 60.0, 150.0, 400.0}) {
      const double oracle = static_cast<double>(std::log(oracle_chi_sq_upper(x, df)));
      const double got = chi_sq_upper_tail_ln(x, df).ln();
      EXPECT_NEAR(got, oracle, 1e-9 * std::max(1.0, std::fabs(oracle))) << "df=" << df << " x=" << x;
    }
  }
}

TEST(ChiSquare, MonotoneInX) {
  for (int df : {1, 3, 9}) {
    double prev = 0.0;
    for (double x = 0.1; x < 3000.0; x *= 1.3) {
      const double v = chi_sq_upper_tail_ln(x, df).ln();
      EXPECT_LT(v, prev);
      prev = v;
    }
  }
}

TEST(LogChoose, SmallExact) {
  EXPECT_EQ(log_choose(5, 0), 0.0);
  EXPECT_EQ(log_choose(5, 5), 0.0);
  EXPECT_NEAR(log_choose(10, 4), std::log(210.0), 1e-10);
  // Pascal triangle in exact integers.
  std::vector<std::uint64_t> row{1};
  for (int n = 1; n <= 60; ++n) {
    std::vector<std::uint64_t> next(n + 1, 1);
    for (int k = 1; k < n; ++k) next[k] = row[k - 1] + row[k];
    row = next;
    for (int k = 0; k <= n; ++k) {
      EXPECT_NEAR(log_choose(n, k), std::log(static_cast<double>(row[k])), 1e-10 * std::max(1.0, log_choose(n, k)));
    }
  }
}

TEST(LogChoose, SymmetryAndLargeN) {
  for (std::int64_t n : {100, 5000, 123457, 10000000}) {
    for (std::int64_t k : {std::int64_t{1}, std::int64_t{7}, n / 3, n / 2}) {
      EXPECT_NEAR(log_choose(n, k), log_choose(n, n - k), 1e-10 * log_choose(n, k));
      long double oracle = 0;
      if (k <= 5000) {
        for (std::int64_t i = 1; i <= k; ++i) oracle += std::log(static_cast<long double>(n - k + i) / i);
      } else {
        oracle = std::lgamma(static_cast<long double>(n) + 1) - std::lgamma(static_cast<long double>(k) + 1) -
                 std::lgamma(static_cast<long double>(n - k) + 1);
      }
      EXPECT_NEAR(log_choose(n, k), static_cast<double>(oracle), 1e-10 * static_cast<double>(oracle)) << n << " " << k;
    }
  }
  EXPECT_THROW(log_choose(5, 6), Error);
  EXPECT_THROW(log_choose(5, -1), Error);
}

TEST(LogSumExp, StableForExtremes) {
  EXPECT_NEAR(log_add_exp(-1000.0, -1000.0), -1000.0 + std::log(2.0), 1e-12);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(log_add_exp(-inf, -3.0), -3.0);
  const std::vector<double> v{-800.0, -801.0, -inf};
  EXPECT_NEAR(log_sum_exp(v), -800.0 + std::log1p(std::exp(-1.0)), 1e-12);
  EXPECT_EQ(log_sum_exp(std::vector<double>{}), -inf);
}
