#include "rankmerge/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rankmerge/error.hpp"

namespace rankmerge {

namespace {

constexpr double kLn10 = std::numbers::ln10;
// ln(1e-308): below this the linear form is no longer printed as a number.
const double kLnPrintFloor = std::log(1e-308);

constexpr double kHalfLn2Pi = 0.91893853320467274178032973640562;

double horner(const double* coef, int degree, double x) {
  double acc = coef[degree];
  for (int i = degree - 1; i >= 0; --i) acc = acc * x + coef[i];
  return acc;
}

}  // namespace

LogP::LogP(double ln_p) : ln_p_(ln_p) {
  if (std::isnan(ln_p) || ln_p > 0.0) {
    throw Error(ErrorKind::invalid_argument, "log-probability must be <= 0, got " + std::to_string(ln_p));
  }
}

LogP LogP::from_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "probability outside [0,1]: " + std::to_string(p));
  }
  return LogP(std::log(p));
}

double LogP::log10() const noexcept { return ln_p_ / kLn10; }

double LogP::probability() const noexcept { return std::exp(ln_p_); }

bool LogP::underflows() const noexcept { return ln_p_ < kLnPrintFloor; }

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double inv_norm_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "inv_norm_cdf: p must lie in (0,1), got " + std::to_string(p));
  }

  // Algorithm AS 241, Appl. Statist. (1988) 37(3), PPND16.
  static constexpr double a[] = {3.3871328727963666080e0, 1.3314166789178437745e+2, 1.9715909503065514427e+3,
                                 1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                 3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr double b[] = {1.0,
                                 4.2313330701600911252e+1,
                                 6.8718700749205790830e+2,
                                 5.3941960214247511077e+3,
                                 2.1213794301586595867e+4,
                                 3.9307895800092710610e+4,
                                 2.8729085735721942674e+4,
                                 5.2264952788528545610e+3};
  static constexpr double c[] = {1.42343711074968357734e0,  4.63033784615654529590e0,  5.76949722146069140550e0,
                                 3.64784832476320460504e0,  1.27045825245236838258e0,  2.41780725177450611770e-1,
                                 2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[] = {1.0,
                                 2.05319162663775882187e0,
                                 1.67638483018380384940e0,
                                 6.89767334985100004550e-1,
                                 1.48103976427480074590e-1,
                                 1.51986665636164571966e-2,
                                 5.47593808499534494600e-4,
                                 1.05075007164441684324e-9};
  static constexpr double e[] = {6.65790464350110377720e0,  5.46378491116411436990e0,  1.78482653991729133580e0,
                                 2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                 2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[] = {1.0,
                                 5.99832206555887937690e-1,
                                 1.36929880922735805310e-1,
                                 1.48753612908506148525e-2,
                                 7.86869131145613259100e-4,
                                 1.84631831751005468180e-5,
                                 1.42151175831644588870e-7,
                                 2.04426310338993978564e-15};

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * horner(a, 7, r) / horner(b, 7, r);
  }

  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = horner(c, 7, r) / horner(d, 7, r);
  } else {
    r -= 5.0;
    value = horner(e, 7, r) / horner(f, 7, r);
  }
  return q < 0.0 ? -value : value;
}

LogP norm_upper_tail_ln(double z) {
  if (std::isnan(z)) throw Error(ErrorKind::invalid_argument, "norm_upper_tail_ln: NaN argument");
  if (z < 0.0) {
    // 1 - Q(|z|), computed so that the tiny complement keeps its relative precision.
    return LogP(std::log1p(-0.5 * std::erfc(-z / std::numbers::sqrt2)));
  }
  if (z <= 8.0) {
    return LogP(std::log(0.5 * std::erfc(z / std::numbers::sqrt2)));
  }
  // Mills-ratio asymptotic series: Q(z) = phi(z)/z * sum_k (-1)^k (2k-1)!! / z^(2k),
  // truncated before the terms start growing.
  const double inv_z2 = 1.0 / (z * z);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double next = -term * (2.0 * k - 1.0) * inv_z2;
    if (std::fabs(next) >= std::fabs(term)) break;
    term = next;
    sum += term;
    if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
  }
  return LogP(-0.5 * z * z - kHalfLn2Pi - std::log(z) + std::log(sum));
}

double log_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw Error(ErrorKind::invalid_argument, "log_gamma_q: shape must be positive");
  if (std::isnan(x) || x < 0.0) throw Error(ErrorKind::invalid_argument, "log_gamma_q: x must be >= 0");
  if (x == 0.0) return 0.0;

  constexpr double eps = 1e-16;
  constexpr int max_iter = 100000;
  const double log_prefix = -x + a * std::log(x);

  if (x < a + 1.0) {
    // Lower series for P(a, x); Q = 1 - P.
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < max_iter; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * eps) break;
    }
    const double log_p = log_prefix - std::lgamma(a) + std::log(sum);
    const double p = std::exp(log_p);
    return p < 1.0 ? std::log1p(-p) : -std::numeric_limits<double>::infinity();
  }

  // Continued fraction for Q(a, x), modified Lentz.
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < max_iter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return std::min(0.0, log_prefix - std::lgamma(a) + std::log(h));
}

LogP chi_sq_upper_tail_ln(double x, int df) {
  if (df < 1) throw Error(ErrorKind::invalid_argument, "chi_sq_upper_tail_ln: df must be >= 1");
  if (std::isnan(x) || x < 0.0) throw Error(ErrorKind::invalid_argument, "chi_sq_upper_tail_ln: x must be >= 0");
  if (df == 2) return LogP(-0.5 * x);
  return LogP(log_gamma_q(0.5 * df, 0.5 * x));
}

double log_choose(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) {
    throw Error(ErrorKind::invalid_argument,
                "log_choose: need 0 <= k <= n, got n=" + std::to_string(n) + " k=" + std::to_string(k));
  }
  const std::int64_t m = std::min(k, n - k);
  if (m == 0) return 0.0;
  // lgamma differences lose absolute precision for large n; a direct product of ratios
  // stays accurate when the smaller side is short.
  if (m <= 2000) {
    double acc = 0.0;
    const double base = static_cast<double>(n - m);
    for (std::int64_t i = 1; i <= m; ++i) {
      acc += std::log1p(base / static_cast<double>(i));
    }
    return acc;
  }
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

double log_sum_exp(std::span<const double> values) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) hi = std::max(hi, v);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

}  // namespace rankmerge
