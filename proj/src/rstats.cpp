#include "rankmerge/rstats.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "rankmerge/error.hpp"
#include "rankmerge/parallel.hpp"
#include "rankmerge/text.hpp"
#include "rankmerge/transform.hpp"

namespace rankmerge {

namespace {

// Pairwise-complete copies of x and y.
std::pair<std::vector<double>, std::vector<double>> complete_pairs(std::span<const double> x,
                                                                   std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::invalid_argument, "correlation: vectors have different lengths (" +
                                                 std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  xs.reserve(x.size());
  ys.reserve(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (is_missing(x[i]) || is_missing(y[i])) continue;
    xs.push_back(x[i]);
    ys.push_back(y[i]);
  }
  if (xs.size() < 3) throw Error(ErrorKind::invalid_argument, "correlation: fewer than 3 complete pairs");
  return {std::move(xs), std::move(ys)};
}

double pearson_complete(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::invalid_argument, "correlation: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

CorrelationMethod parse_correlation_method(std::string_view text) {
  if (text == "pearson") return CorrelationMethod::pearson;
  if (text == "spearman") return CorrelationMethod::spearman;
  throw Error(ErrorKind::invalid_argument, "unknown correlation method: " + std::string(text));
}

const char* to_string(CorrelationMethod method) {
  return method == CorrelationMethod::pearson ? "pearson" : "spearman";
}

const char* to_string(Direction d) {
  switch (d) {
    case Direction::over: return "over";
    case Direction::under: return "under";
    case Direction::none: return "none";
  }
  return "none";
}

Direction parse_direction(std::string_view text) {
  if (text == "over") return Direction::over;
  if (text == "under") return Direction::under;
  if (text == "none") return Direction::none;
  throw Error(ErrorKind::invalid_argument, "unknown direction: " + std::string(text));
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const auto [xs, ys] = complete_pairs(x, y);
  return pearson_complete(xs, ys);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto [xs, ys] = complete_pairs(x, y);
  return pearson_complete(midrank(xs).ranks, midrank(ys).ranks);
}

double correlation(std::span<const double> x, std::span<const double> y, CorrelationMethod method) {
  return method == CorrelationMethod::pearson ? pearson(x, y) : spearman(x, y);
}

double correlation_threshold(std::size_t n, double alpha, Sidedness sided) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "alpha must lie in (0,1), got " + std::to_string(alpha));
  }
  if (n < 10) throw Error(ErrorKind::invalid_argument, "correlation_threshold needs n >= 10");
  const double tail = sided == Sidedness::two ? alpha / 2.0 : alpha;
  return inv_norm_cdf(1.0 - tail) / std::sqrt(static_cast<double>(n) - 1.0);
}

double median_correlation(std::span<const double> a, std::span<const double> b, CorrelationMethod method) {
  return correlation(a, b, method);
}

// ---------------------------------------------------------------------------
// Kruskal-Wallis

TestResult kruskal_wallis(std::span<const double> values, std::span<const std::size_t> group, std::size_t k) {
  if (values.size() != group.size()) {
    throw Error(ErrorKind::invalid_argument, "kruskal_wallis: values and labels differ in length");
  }
  if (k < 2) throw Error(ErrorKind::degenerate, "kruskal_wallis: need at least 2 groups");

  std::vector<double> pooled;
  std::vector<std::size_t> labels;
  pooled.reserve(values.size());
  labels.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (group[i] >= k) throw Error(ErrorKind::invalid_argument, "kruskal_wallis: group label out of range");
    if (is_missing(values[i])) continue;
    pooled.push_back(values[i]);
    labels.push_back(group[i]);
  }
  const std::size_t n_total = pooled.size();
  if (n_total < k + 1) throw Error(ErrorKind::degenerate, "kruskal_wallis: need at least k+1 observations");

  const auto ranks = midrank(pooled);
  std::vector<double> rank_sum(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < n_total; ++i) {
    rank_sum[labels[i]] += ranks.ranks[i];
    ++count[labels[i]];
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (count[j] == 0) throw Error(ErrorKind::degenerate, "kruskal_wallis: group " + std::to_string(j) + " is empty");
  }

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_sum = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<double>(j - i);
    tie_sum += t * t * t - t;
    i = j;
  }
  const auto n = static_cast<double>(n_total);
  const double tie_factor = 1.0 - tie_sum / (n * n * n - n);
  if (tie_factor <= 0.0) throw Error(ErrorKind::degenerate, "kruskal_wallis: all values are tied");

  double ss = 0.0;
  for (std::size_t j = 0; j < k; ++j) ss += rank_sum[j] * rank_sum[j] / static_cast<double>(count[j]);
  const double h = std::max(0.0, (12.0 / (n * (n + 1.0)) * ss - 3.0 * (n + 1.0)) / tie_factor);

  TestResult out;
  out.statistic = h;
  out.p_raw = chi_sq_upper_tail_ln(h, static_cast<int>(k - 1));
  return out;
}

TestResult kruskal_wallis(std::span<const std::vector<double>> groups) {
  std::vector<double> values;
  std::vector<std::size_t> labels;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    values.insert(values.end(), groups[g].begin(), groups[g].end());
    labels.insert(labels.end(), groups[g].size(), g);
  }
  return kruskal_wallis(values, labels, groups.size());
}

KwBatch kw_per_feature(std::span<const DataMatrix> groups, unsigned threads) {
  if (groups.size() < 2) throw Error(ErrorKind::degenerate, "kw_per_feature: need at least 2 groups");
  const auto symbols = common_rows(groups);

  std::vector<std::vector<std::size_t>> row_maps;
  std::vector<std::size_t> labels;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto index = groups[g].row_index();
    std::vector<std::size_t> map;
    map.reserve(symbols.size());
    for (const auto& s : symbols) map.push_back(index.at(s));
    row_maps.push_back(std::move(map));
    labels.insert(labels.end(), groups[g].cols(), g);
  }

  KwBatch batch;
  batch.results.resize(symbols.size());
  parallel_for(symbols.size(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> values;
    values.reserve(labels.size());
    for (std::size_t f = begin; f < end; ++f) {
      values.clear();
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto row = groups[g].row(row_maps[g][f]);
        values.insert(values.end(), row.begin(), row.end());
      }
      TestResult r;
      try {
        r = kruskal_wallis(values, labels, groups.size());
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate) throw;
      }
      r.feature = symbols[f];
      batch.results[f] = std::move(r);
    }
  });
  for (const auto& r : batch.results) {
    if (!r.p_raw) ++batch.degenerate;
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Wilcoxon / Mann-Whitney

Alternative parse_alternative(std::string_view text) {
  if (text == "greater" || text == "A_greater" || text == "a_greater") return Alternative::a_greater;
  if (text == "less" || text == "A_less" || text == "a_less") return Alternative::a_less;
  throw Error(ErrorKind::invalid_argument, "unknown alternative: " + std::string(text));
}

MannWhitney mann_whitney(std::span<const double> a, std::span<const double> b) {
  std::vector<double> pooled;
  pooled.reserve(a.size() + b.size());
  MannWhitney mw;
  for (double v : a) {
    if (!is_missing(v)) pooled.push_back(v);
  }
  mw.n_a = pooled.size();
  for (double v : b) {
    if (!is_missing(v)) pooled.push_back(v);
  }
  mw.n_b = pooled.size() - mw.n_a;
  if (mw.n_a == 0 || mw.n_b == 0) throw Error(ErrorKind::degenerate, "wilcoxon: a group has no values");

  const auto ranks = midrank(pooled);
  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < mw.n_a; ++i) rank_sum_a += ranks.ranks[i];

  std::sort(pooled.begin(), pooled.end());
  double tie_sum = 0.0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i + 1;
    while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
    const auto t = static_cast<double>(j - i);
    tie_sum += t * t * t - t;
    i = j;
  }

  const auto na = static_cast<double>(mw.n_a);
  const auto nb = static_cast<double>(mw.n_b);
  const double n = na + nb;
  mw.u = rank_sum_a - na * (na + 1.0) / 2.0;
  mw.mean = na * nb / 2.0;
  mw.variance = na * nb / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
  mw.ties = tie_sum > 0.0;
  return mw;
}

LogP wilcoxon_normal_p(const MannWhitney& mw, Alternative alt) {
  if (!(mw.variance > 0.0)) throw Error(ErrorKind::degenerate, "wilcoxon: all values are tied");
  const double sd = std::sqrt(mw.variance);
  if (alt == Alternative::a_greater) return norm_upper_tail_ln((mw.u - mw.mean - 0.5) / sd);
  return norm_upper_tail_ln(-(mw.u - mw.mean + 0.5) / sd);
}

LogP wilcoxon_exact_p(const MannWhitney& mw, Alternative alt) {
  if (mw.ties) throw Error(ErrorKind::invalid_argument, "wilcoxon: exact distribution requires tie-free samples");
  const std::size_t n = mw.n_a + mw.n_b;
  const std::size_t m = mw.n_a;
  // ways[j][u]: number of j-subsets of the first i ranks with U-contribution u,
  // where U = rank sum - j(j+1)/2; built by adding one rank at a time.
  const std::size_t max_u = mw.n_a * mw.n_b;
  std::vector<std::vector<double>> ways(m + 1, std::vector<double>(max_u + 1, 0.0));
  ways[0][0] = 1.0;
  for (std::size_t i = 1; i <= n; ++i) {
    // Choosing rank i as the j-th smallest member adds (i - j) to U.
    for (std::size_t j = std::min(i, m); j >= 1; --j) {
      const std::size_t shift = i - j;
      if (shift > max_u) continue;
      for (std::size_t u = max_u; u + 1 > shift; --u) ways[j][u] += ways[j - 1][u - shift];
    }
  }
  const double total = std::accumulate(ways[m].begin(), ways[m].end(), 0.0);
  const auto observed = static_cast<std::size_t>(std::llround(mw.u));
  double tail = 0.0;
  if (alt == Alternative::a_greater) {
    for (std::size_t u = observed; u <= max_u; ++u) tail += ways[m][u];
  } else {
    for (std::size_t u = 0; u <= observed; ++u) tail += ways[m][u];
  }
  return LogP(std::min(0.0, std::log(tail / total)));
}

TestResult wilcoxon_one_sided(std::span<const double> a, std::span<const double> b, Alternative alt) {
  const auto mw = mann_whitney(a, b);
  if (mw.n_a + mw.n_b < 4) throw Error(ErrorKind::degenerate, "wilcoxon: need at least 4 values in total");
  if (!(mw.variance > 0.0)) throw Error(ErrorKind::degenerate, "wilcoxon: all values are tied");

  TestResult out;
  out.statistic = (mw.u - mw.mean) / std::sqrt(mw.variance);
  out.direction = alt == Alternative::a_greater ? Direction::over : Direction::under;
  const bool exact = !mw.ties && mw.n_a + mw.n_b <= kWilcoxonExactMaxN;
  out.p_raw = exact ? wilcoxon_exact_p(mw, alt) : wilcoxon_normal_p(mw, alt);
  return out;
}

WilcoxonBatch wilcoxon_per_feature(const DataMatrix& m, std::span<const std::size_t> cols_a,
                                   std::span<const std::size_t> cols_b, Alternative alt, unsigned threads) {
  if (cols_a.empty() || cols_b.empty()) throw Error(ErrorKind::degenerate, "wilcoxon: one side has no samples");
  WilcoxonBatch batch;
  batch.results.resize(m.rows());
  parallel_for(m.rows(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> a(cols_a.size());
    std::vector<double> b(cols_b.size());
    for (std::size_t r = begin; r < end; ++r) {
      const auto row = m.row(r);
      for (std::size_t i = 0; i < cols_a.size(); ++i) a[i] = row[cols_a[i]];
      for (std::size_t i = 0; i < cols_b.size(); ++i) b[i] = row[cols_b[i]];
      TestResult res;
      try {
        res = wilcoxon_one_sided(a, b, alt);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate) throw;
      }
      res.feature = m.row_names()[r];
      batch.results[r] = std::move(res);
    }
  });
  for (const auto& r : batch.results) {
    if (!r.p_raw) ++batch.degenerate;
  }
  return batch;
}

WilcoxonBatch wilcoxon_group_vs_rest(const Dataset& ds, std::string_view field, std::string_view keyword,
                                     MatchMode mode, Alternative alt, unsigned threads) {
  const auto mask = match_samples(ds, field, keyword, mode);
  std::vector<std::size_t> in;
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < mask.size(); ++c) (mask[c] ? in : out).push_back(c);
  if (in.empty()) throw Error(ErrorKind::degenerate, "no sample matches '" + std::string(keyword) + "'");
  if (out.empty()) throw Error(ErrorKind::degenerate, "every sample matches '" + std::string(keyword) + "'");
  return wilcoxon_per_feature(ds.data(), in, out, alt, threads);
}

// ---------------------------------------------------------------------------
// Multiplicity

double harmonic_number(std::size_t m) {
  double c = 0.0;
  // Smallest terms first.
  for (std::size_t h = m; h >= 1; --h) c += 1.0 / static_cast<double>(h);
  return c;
}

std::vector<LogP> benjamini_yekutieli(std::span<const LogP> p_raw) {
  const std::size_t m = p_raw.size();
  std::vector<LogP> out(m);
  if (m == 0) return out;

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_raw[a] < p_raw[b]; });

  const double log_scale = std::log(static_cast<double>(m)) + std::log(harmonic_number(m));
  double running = 0.0;  // ln 1
  for (std::size_t i = m; i >= 1; --i) {
    const std::size_t idx = order[i - 1];
    const double candidate = p_raw[idx].ln() + log_scale - std::log(static_cast<double>(i));
    running = std::min(running, candidate);
    out[idx] = LogP(std::min(0.0, running));
  }
  return out;
}

void apply_benjamini_yekutieli(std::vector<TestResult>& results) {
  std::vector<LogP> raw;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].p_raw) {
      raw.push_back(*results[i].p_raw);
      where.push_back(i);
    }
  }
  const auto adjusted = benjamini_yekutieli(raw);
  for (std::size_t i = 0; i < where.size(); ++i) results[where[i]].p_adjusted = adjusted[i];
}

std::vector<TestResult> significant_features(std::span<const TestResult> results, double threshold) {
  const double ln_threshold = std::log(threshold);
  std::vector<TestResult> out;
  for (const auto& r : results) {
    if (!r.p_raw) continue;
    if (!r.p_adjusted) throw Error(ErrorKind::invalid_argument, "significant_features: FDR correction not applied");
    if (r.p_adjusted->ln() < ln_threshold) out.push_back(r);
  }
  return out;
}

RankBy parse_rank_by(std::string_view text) {
  if (text == "p") return RankBy::p;
  if (text == "statistic") return RankBy::statistic;
  throw Error(ErrorKind::invalid_argument, "unknown ranking key: " + std::string(text));
}

std::vector<TestResult> rank_features(std::span<const TestResult> results, RankBy by) {
  std::vector<TestResult> out(results.begin(), results.end());
  const auto key = [by](const TestResult& r) {
    if (by == RankBy::p) return r.p_raw ? r.p_raw->ln() : std::numeric_limits<double>::infinity();
    switch (r.direction) {
      case Direction::over: return -r.statistic;
      case Direction::under: return r.statistic;
      case Direction::none: return -std::fabs(r.statistic);
    }
    return 0.0;
  };
  std::stable_sort(out.begin(), out.end(), [&](const TestResult& a, const TestResult& b) {
    const bool a_valid = a.p_raw.has_value();
    const bool b_valid = b.p_raw.has_value();
    if (a_valid != b_valid) return a_valid;
    const double ka = key(a);
    const double kb = key(b);
    if (ka != kb) return ka < kb;
    return a.feature < b.feature;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Enrichment

LogP fisher_enrichment(std::int64_t universe, std::int64_t selected, std::int64_t reference, std::int64_t overlap) {
  if (universe < 0 || selected < 0 || reference < 0 || overlap < 0 || selected > universe || reference > universe ||
      overlap > std::min(selected, reference)) {
    throw Error(ErrorKind::invalid_argument, "fisher_enrichment: inconsistent counts (N=" + std::to_string(universe) +
                                                 ", a=" + std::to_string(selected) + ", b=" +
                                                 std::to_string(reference) + ", k=" + std::to_string(overlap) + ")");
  }
  const std::int64_t lowest = std::max<std::int64_t>(0, selected + reference - universe);
  if (overlap <= lowest) return LogP::one();

  const double log_total = log_choose(universe, selected);
  std::vector<double> terms;
  for (std::int64_t x = overlap; x <= std::min(selected, reference); ++x) {
    terms.push_back(log_choose(reference, x) + log_choose(universe - reference, selected - x) - log_total);
  }
  return LogP(std::min(0.0, log_sum_exp(terms)));
}

std::vector<GeneSet> parse_gmt(std::istream& in) {
  std::vector<GeneSet> sets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = chomp_cr(line);
    if (trim(text).empty()) continue;
    const auto cells = split(text, '\t');
    if (cells.size() < 3) {
      throw ParseError(ParseErrorCode::ragged_row, line_no, "GMT line needs name, description and symbols");
    }
    GeneSet gs;
    gs.name = std::string(trim(cells[0]));
    gs.description = std::string(cells[1]);
    std::unordered_set<std::string> seen;
    for (std::size_t i = 2; i < cells.size(); ++i) {
      const auto sym = trim(cells[i]);
      if (sym.empty()) continue;
      if (seen.emplace(sym).second) gs.symbols.emplace_back(sym);
    }
    if (gs.symbols.empty()) {
      throw ParseError(ParseErrorCode::ragged_row, line_no, "gene set '" + gs.name + "' has no symbols");
    }
    sets.push_back(std::move(gs));
  }
  return sets;
}

// ---------------------------------------------------------------------------
// Result tables

void write_results_tsv(std::ostream& out, std::span<const TestResult> results) {
  out << "feature\tstatistic\tp_raw\tlog10_p_raw\tp_adj\tlog10_p_adj\tdirection\n";
  for (const auto& r : results) {
    out << r.feature << '\t' << format_double(r.statistic) << '\t';
    if (r.p_raw) {
      out << format_p(*r.p_raw) << '\t' << format_log10_p(*r.p_raw) << '\t';
    } else {
      out << "NA\tNA\t";
    }
    if (r.p_adjusted) {
      out << format_p(*r.p_adjusted) << '\t' << format_log10_p(*r.p_adjusted) << '\t';
    } else {
      out << "NA\tNA\t";
    }
    out << to_string(r.direction) << '\n';
  }
}

std::vector<TestResult> read_results_tsv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(ParseErrorCode::missing_header, 1, "empty results table");
  const auto header = split(chomp_cr(line), '\t');
  const auto column = [&](std::string_view name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw ParseError(ParseErrorCode::missing_header, 1, "results table lacks column '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_feature = column("feature");
  const std::size_t c_stat = column("statistic");
  const std::size_t c_lraw = column("log10_p_raw");
  const std::size_t c_ladj = column("log10_p_adj");
  const std::size_t c_dir = column("direction");

  const auto to_logp = [&](std::string_view cell) -> std::optional<LogP> {
    const auto v = parse_cell(cell);
    if (!v) throw ParseError(ParseErrorCode::bad_number, line_no, "bad number '" + std::string(cell) + "'");
    if (is_missing(*v)) return std::nullopt;
    return LogP(std::min(0.0, *v * std::numbers::ln10));
  };

  std::vector<TestResult> results;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = chomp_cr(line);
    if (text.empty()) continue;
    const auto cells = split(text, '\t');
    if (cells.size() != header.size()) {
      throw ParseError(ParseErrorCode::ragged_row, line_no,
                       "expected " + std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
    }
    TestResult r;
    r.feature = std::string(cells[c_feature]);
    const auto stat = parse_cell(cells[c_stat]);
    if (!stat) throw ParseError(ParseErrorCode::bad_number, line_no, "bad statistic");
    r.statistic = *stat;
    r.p_raw = to_logp(cells[c_lraw]);
    r.p_adjusted = to_logp(cells[c_ladj]);
    r.direction = parse_direction(cells[c_dir]);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace rankmerge
