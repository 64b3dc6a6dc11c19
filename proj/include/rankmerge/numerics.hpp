#pragma once

#include <cstdint>
#include <span>

namespace rankmerge {

/// A probability stored as its natural logarithm, so that p-values far below
/// the smallest representable double (1e-300 and beyond) stay ordered and finite.
class LogP {
 public:
  constexpr LogP() = default;
  /// Throws if ln_p > 0 or is NaN.
  explicit LogP(double ln_p);

  static LogP from_probability(double p);
  static constexpr LogP one() { return LogP(); }

  constexpr double ln() const noexcept { return ln_p_; }
  double log10() const noexcept;
  /// Linear probability; 0 when it underflows.
  double probability() const noexcept;
  /// True when the linear form cannot be printed as a normal double above 1e-308.
  bool underflows() const noexcept;

  friend constexpr bool operator==(LogP a, LogP b) noexcept { return a.ln_p_ == b.ln_p_; }
  friend constexpr auto operator<=>(LogP a, LogP b) noexcept { return a.ln_p_ <=> b.ln_p_; }

 private:
  double ln_p_ = 0.0;
};

/// Standard normal CDF.
double norm_cdf(double z);

/// Standard normal quantile (Wichura's AS241, double-precision branch).
/// Throws Error(invalid_argument) unless 0 < p < 1.
double inv_norm_cdf(double p);

/// ln P(Z >= z) for a standard normal Z, finite for every finite z.
LogP norm_upper_tail_ln(double z);

/// ln P(chi^2_df >= x).
LogP chi_sq_upper_tail_ln(double x, int df);

/// ln of the regularized upper incomplete gamma function Q(a, x).
double log_gamma_q(double a, double x);

/// ln C(n, k).
double log_choose(std::int64_t n, std::int64_t k);

/// ln(exp(a) + exp(b)) without overflow; handles -inf operands.
double log_add_exp(double a, double b);

/// ln(sum exp(v_i)).
double log_sum_exp(std::span<const double> values);

}  // namespace rankmerge
