#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankmerge/matrix.hpp"
#include "rankmerge/numerics.hpp"

namespace rankmerge {

enum class CorrelationMethod { pearson, spearman };
CorrelationMethod parse_correlation_method(std::string_view text);
const char* to_string(CorrelationMethod method);

enum class Sidedness { one, two };

enum class Direction { over, under, none };
const char* to_string(Direction d);
Direction parse_direction(std::string_view text);

/// Outcome of one per-feature test.
struct TestResult {
  std::string feature;
  /// H for Kruskal-Wallis; standardized U (no continuity correction) for Wilcoxon.
  double statistic = 0.0;
  /// Absent when the feature was degenerate (e.g. every value tied).
  std::optional<LogP> p_raw;
  std::optional<LogP> p_adjusted;
  Direction direction = Direction::none;
};

struct GeneSet {
  std::string name;
  std::string description;
  std::vector<std::string> symbols;
};

// --- correlation ------------------------------------------------------------

/// Product-moment correlation over pairwise-complete entries.
/// Throws Error(invalid_argument) for fewer than 3 complete pairs or zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of midranks (pairwise-complete).
double spearman(std::span<const double> x, std::span<const double> y);

double correlation(std::span<const double> x, std::span<const double> y, CorrelationMethod method);

/// Critical correlation z_{1-alpha} / sqrt(n - 1) (alpha halved when two-sided).
double correlation_threshold(std::size_t n, double alpha, Sidedness sided);

/// Correlation between two per-feature median vectors aligned on the same symbols.
double median_correlation(std::span<const double> a, std::span<const double> b,
                          CorrelationMethod method = CorrelationMethod::pearson);

// --- location tests -----------------------------------------------------------

/// Kruskal-Wallis H with tie correction; p from chi-square with k-1 df.
/// group[i] in [0, k) labels values[i]; missing values are ignored.
/// Throws Error(degenerate) when a group is empty or every value is tied.
TestResult kruskal_wallis(std::span<const double> values, std::span<const std::size_t> group, std::size_t k);

/// Convenience overload: one span per group.
TestResult kruskal_wallis(std::span<const std::vector<double>> groups);

struct KwBatch {
  std::vector<TestResult> results;
  std::size_t degenerate = 0;
};

/// One Kruskal-Wallis test per common feature, each matrix acting as one group.
/// Degenerate features come back with direction none and no p-value.
KwBatch kw_per_feature(std::span<const DataMatrix> groups, unsigned threads = 1);

enum class Alternative { a_greater, a_less };
Alternative parse_alternative(std::string_view text);

struct MannWhitney {
  double u = 0.0;          ///< U of group A
  double mean = 0.0;
  double variance = 0.0;   ///< tie-corrected
  bool ties = false;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

/// U statistic and its null moments from pooled midranks (missing values ignored).
MannWhitney mann_whitney(std::span<const double> a, std::span<const double> b);

/// One-sided p from the normal approximation with continuity correction 0.5.
LogP wilcoxon_normal_p(const MannWhitney& mw, Alternative alt);

/// One-sided p from the exact null distribution of U (no ties).
LogP wilcoxon_exact_p(const MannWhitney& mw, Alternative alt);

/// Largest n_a + n_b for which the exact path is taken (tie-free samples only).
inline constexpr std::size_t kWilcoxonExactMaxN = 12;

/// One-sided Wilcoxon rank-sum test. Exact when n_a + n_b <= 12 without ties,
/// otherwise normal approximation. Throws Error(degenerate) when all values tie.
TestResult wilcoxon_one_sided(std::span<const double> a, std::span<const double> b, Alternative alt);

struct WilcoxonBatch {
  std::vector<TestResult> results;
  std::size_t degenerate = 0;
};

/// Per-feature Wilcoxon of the samples matching keyword against all other samples.
WilcoxonBatch wilcoxon_group_vs_rest(const Dataset& ds, std::string_view field, std::string_view keyword,
                                     MatchMode mode, Alternative alt, unsigned threads = 1);

/// Per-feature Wilcoxon between two column subsets of one matrix.
WilcoxonBatch wilcoxon_per_feature(const DataMatrix& m, std::span<const std::size_t> cols_a,
                                   std::span<const std::size_t> cols_b, Alternative alt, unsigned threads = 1);

// --- multiplicity ---------------------------------------------------------------

/// Harmonic number c(m) = sum_{h=1..m} 1/h.
double harmonic_number(std::size_t m);

/// Benjamini-Yekutieli adjusted p-values, in input order, computed in log domain.
std::vector<LogP> benjamini_yekutieli(std::span<const LogP> p_raw);

/// Fills p_adjusted for every result with a raw p-value.
void apply_benjamini_yekutieli(std::vector<TestResult>& results);

/// Results with adjusted p strictly below threshold, order preserved.
/// Throws Error(invalid_argument) if a result with a raw p lacks an adjusted one.
std::vector<TestResult> significant_features(std::span<const TestResult> results, double threshold = 0.05);

enum class RankBy { p, statistic };
RankBy parse_rank_by(std::string_view text);

/// Stable ranking; ties by feature name. By p: ascending raw p (the adjusted
/// order is the same, with fewer ties), degenerate results last. By statistic: descending |statistic| for two-sided
/// tests, descending signed statistic for "over" and ascending for "under".
std::vector<TestResult> rank_features(std::span<const TestResult> results, RankBy by);

// --- enrichment -----------------------------------------------------------------

/// P(X >= overlap) for X ~ Hypergeometric(universe, selected, reference).
LogP fisher_enrichment(std::int64_t universe, std::int64_t selected, std::int64_t reference, std::int64_t overlap);

/// GMT lines: name, description, symbols... (tab separated).
std::vector<GeneSet> parse_gmt(std::istream& in);

// --- result tables --------------------------------------------------------------

/// Columns: feature, statistic, p_raw, log10_p_raw, p_adj, log10_p_adj, direction.
void write_results_tsv(std::ostream& out, std::span<const TestResult> results);
std::vector<TestResult> read_results_tsv(std::istream& in);

}  // namespace rankmerge
