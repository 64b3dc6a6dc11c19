#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rankmerge {

/// Missing cells are stored as quiet NaN.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// Dense features x samples matrix, row-major.
///
/// Column names are always unique. Row names may repeat only in the raw form
/// produced by annotation; every other operation expects unique rows and
/// checks for it.
class DataMatrix {
 public:
  DataMatrix() = default;
  DataMatrix(std::vector<std::string> row_names, std::vector<std::string> col_names, std::vector<double> values);

  std::size_t rows() const noexcept { return row_names_.size(); }
  std::size_t cols() const noexcept { return col_names_.size(); }
  const std::vector<std::string>& row_names() const noexcept { return row_names_; }
  const std::vector<std::string>& col_names() const noexcept { return col_names_; }
  std::span<const double> values() const noexcept { return values_; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }
  std::vector<double> column(std::size_t c) const;

  bool has_unique_rows() const;
  /// Row name -> index. Requires unique rows.
  std::unordered_map<std::string, std::size_t> row_index() const;
  std::optional<std::size_t> find_row(std::string_view name) const;

  DataMatrix select_rows(std::span<const std::size_t> rows) const;
  DataMatrix select_columns(std::span<const std::size_t> cols) const;
  DataMatrix with_col_names(std::vector<std::string> names) const;

  /// Missing cells compare equal to each other.
  friend bool operator==(const DataMatrix& a, const DataMatrix& b);

 private:
  std::vector<std::string> row_names_;
  std::vector<std::string> col_names_;
  std::vector<double> values_;
};

/// Per-sample string metadata, fields x samples.
class InfoMatrix {
 public:
  InfoMatrix() = default;
  InfoMatrix(std::vector<std::string> field_names, std::vector<std::string> col_names, std::vector<std::string> cells);

  std::size_t fields() const noexcept { return field_names_.size(); }
  std::size_t cols() const noexcept { return col_names_.size(); }
  const std::vector<std::string>& field_names() const noexcept { return field_names_; }
  const std::vector<std::string>& col_names() const noexcept { return col_names_; }

  const std::string& operator()(std::size_t f, std::size_t c) const { return cells_[f * cols() + c]; }
  std::optional<std::size_t> find_field(std::string_view name) const;

  InfoMatrix select_columns(std::span<const std::size_t> cols) const;
  InfoMatrix with_col_names(std::vector<std::string> names) const;

  friend bool operator==(const InfoMatrix&, const InfoMatrix&) = default;

 private:
  std::vector<std::string> field_names_;
  std::vector<std::string> col_names_;
  std::vector<std::string> cells_;
};

enum class ScoreKind { none, ecdf, vdw };

const char* to_string(ScoreKind kind);
ScoreKind parse_score_kind(std::string_view text);

struct DatasetMeta {
  ScoreKind score = ScoreKind::none;
  std::string source;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

/// A data matrix and its information matrix over the same samples, in the same order.
class Dataset {
 public:
  Dataset() = default;
  Dataset(DataMatrix data, InfoMatrix info, std::string name, DatasetMeta meta = {});

  const DataMatrix& data() const noexcept { return data_; }
  const InfoMatrix& info() const noexcept { return info_; }
  const std::string& name() const noexcept { return name_; }
  const DatasetMeta& meta() const noexcept { return meta_; }
  std::size_t samples() const noexcept { return data_.cols(); }

  Dataset select_columns(std::span<const std::size_t> cols) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  DataMatrix data_;
  InfoMatrix info_;
  std::string name_;
  DatasetMeta meta_;
};

/// Type-7 (linear interpolation) sample quantile of already sorted values.
double quantile_type7(std::span<const double> sorted, double prob);

/// Q3 - Q1 over the non-missing entries; NaN when every entry is missing.
double interquartile_range(std::span<const double> values);

/// Median of the non-missing entries; NaN when every entry is missing.
double median(std::span<const double> values);

struct ReducedMatrix {
  DataMatrix matrix;
  /// Symbols whose rows were all missing and were therefore dropped.
  std::vector<std::string> dropped_symbols;
};

/// Keeps, for every symbol, the row with the largest interquartile range
/// (first occurrence on ties). Output rows follow first-occurrence order.
ReducedMatrix reduce_duplicates(const DataMatrix& raw, unsigned threads = 1);

/// Sorted intersection of row names. Throws Error(no_common_features) if empty.
std::vector<std::string> common_rows(std::span<const DataMatrix> matrices);
std::vector<std::string> common_rows(std::span<const Dataset> datasets);

/// Rows of m in the given order; every symbol must be present.
DataMatrix restrict_rows(const DataMatrix& m, std::span<const std::string> symbols);

/// Common rows, columns concatenated in input order. Column names must be globally unique.
DataMatrix merge_data(std::span<const DataMatrix> matrices);

/// Union of fields (first-seen order), columns concatenated; absent cells are empty.
InfoMatrix merge_info(std::span<const InfoMatrix> infos);

/// Prefixes every column with "name:" (unless it already carries a prefix) and merges
/// data and information matrices. All inputs must share the same score state.
Dataset merge_datasets(std::span<const Dataset> datasets);

enum class MatchMode { exact, substring };

MatchMode parse_match_mode(std::string_view text);

/// Per-sample match of field value against keyword, case-insensitive.
std::vector<bool> match_samples(const Dataset& ds, std::string_view field, std::string_view keyword, MatchMode mode);

Dataset select_samples(const Dataset& ds, std::string_view field, std::string_view keyword, MatchMode mode);
Dataset exclude_samples(const Dataset& ds, std::string_view field, std::string_view keyword, MatchMode mode);

/// Seeded permutation of the samples split into consecutive blocks of the given sizes.
std::vector<Dataset> random_partition(const Dataset& ds, std::span<const std::size_t> sizes, std::uint64_t seed);

/// Seeded Fisher-Yates permutation of 0..n-1, identical on every platform.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

/// Per-row median over non-missing entries. Throws naming the first all-missing row.
std::vector<double> median_column(const DataMatrix& m, unsigned threads = 1);

}  // namespace rankmerge
