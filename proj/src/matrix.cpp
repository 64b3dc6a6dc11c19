#include "rankmerge/matrix.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <unordered_set>

#include "rankmerge/error.hpp"
#include "rankmerge/parallel.hpp"
#include "rankmerge/text.hpp"

namespace rankmerge {

namespace {

void require_unique(const std::vector<std::string>& names, const char* what) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(names.size());
  for (const auto& n : names) {
    if (!seen.insert(n).second) {
      throw Error(ErrorKind::invalid_argument, std::string("duplicate ") + what + " name: " + n);
    }
  }
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// DataMatrix

DataMatrix::DataMatrix(std::vector<std::string> row_names, std::vector<std::string> col_names,
                       std::vector<double> values)
    : row_names_(std::move(row_names)), col_names_(std::move(col_names)), values_(std::move(values)) {
  if (values_.size() != row_names_.size() * col_names_.size()) {
    throw Error(ErrorKind::invalid_argument, "data matrix has " + std::to_string(values_.size()) +
                                                 " values for " + std::to_string(row_names_.size()) + " x " +
                                                 std::to_string(col_names_.size()) + " cells");
  }
  require_unique(col_names_, "column");
}

std::vector<double> DataMatrix::column(std::size_t c) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = (*this)(r, c);
  return out;
}

bool DataMatrix::has_unique_rows() const {
  std::unordered_set<std::string_view> seen;
  for (const auto& n : row_names_) {
    if (!seen.insert(n).second) return false;
  }
  return true;
}

std::unordered_map<std::string, std::size_t> DataMatrix::row_index() const {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(rows());
  for (std::size_t r = 0; r < rows(); ++r) {
    if (!index.emplace(row_names_[r], r).second) {
      throw Error(ErrorKind::invalid_argument, "duplicate row name: " + row_names_[r]);
    }
  }
  return index;
}

std::optional<std::size_t> DataMatrix::find_row(std::string_view name) const {
  const auto it = std::find(row_names_.begin(), row_names_.end(), name);
  if (it == row_names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - row_names_.begin());
}

DataMatrix DataMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::string> names;
  std::vector<double> values;
  names.reserve(rows.size());
  values.reserve(rows.size() * cols());
  for (auto r : rows) {
    names.push_back(row_names_.at(r));
    const auto src = row(r);
    values.insert(values.end(), src.begin(), src.end());
  }
  return DataMatrix(std::move(names), col_names_, std::move(values));
}

DataMatrix DataMatrix::select_columns(std::span<const std::size_t> cols) const {
  std::vector<std::string> names;
  names.reserve(cols.size());
  for (auto c : cols) names.push_back(col_names_.at(c));
  std::vector<double> values;
  values.reserve(rows() * cols.size());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (auto c : cols) values.push_back((*this)(r, c));
  }
  return DataMatrix(row_names_, std::move(names), std::move(values));
}

DataMatrix DataMatrix::with_col_names(std::vector<std::string> names) const {
  if (names.size() != cols()) throw Error(ErrorKind::invalid_argument, "column rename changes the column count");
  return DataMatrix(row_names_, std::move(names), values_);
}

bool operator==(const DataMatrix& a, const DataMatrix& b) {
  if (a.row_names_ != b.row_names_ || a.col_names_ != b.col_names_) return false;
  return std::equal(a.values_.begin(), a.values_.end(), b.values_.begin(), b.values_.end(),
                    [](double x, double y) { return x == y || (is_missing(x) && is_missing(y)); });
}

// ---------------------------------------------------------------------------
// InfoMatrix

InfoMatrix::InfoMatrix(std::vector<std::string> field_names, std::vector<std::string> col_names,
                       std::vector<std::string> cells)
    : field_names_(std::move(field_names)), col_names_(std::move(col_names)), cells_(std::move(cells)) {
  if (cells_.size() != field_names_.size() * col_names_.size()) {
    throw Error(ErrorKind::invalid_argument, "information matrix cell count does not match its shape");
  }
  require_unique(field_names_, "field");
  require_unique(col_names_, "column");
}

std::optional<std::size_t> InfoMatrix::find_field(std::string_view name) const {
  const auto it = std::find(field_names_.begin(), field_names_.end(), name);
  if (it == field_names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - field_names_.begin());
}

InfoMatrix InfoMatrix::select_columns(std::span<const std::size_t> cols) const {
  std::vector<std::string> names;
  names.reserve(cols.size());
  for (auto c : cols) names.push_back(col_names_.at(c));
  std::vector<std::string> cells;
  cells.reserve(fields() * cols.size());
  for (std::size_t f = 0; f < fields(); ++f) {
    for (auto c : cols) cells.push_back((*this)(f, c));
  }
  return InfoMatrix(field_names_, std::move(names), std::move(cells));
}

InfoMatrix InfoMatrix::with_col_names(std::vector<std::string> names) const {
  if (names.size() != cols()) throw Error(ErrorKind::invalid_argument, "column rename changes the column count");
  return InfoMatrix(field_names_, std::move(names), cells_);
}

// ---------------------------------------------------------------------------
// Dataset

const char* to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::none: return "none";
    case ScoreKind::ecdf: return "ecdf";
    case ScoreKind::vdw: return "vdw";
  }
  return "none";
}

ScoreKind parse_score_kind(std::string_view text) {
  if (text == "none") return ScoreKind::none;
  if (text == "ecdf") return ScoreKind::ecdf;
  if (text == "vdw") return ScoreKind::vdw;
  throw Error(ErrorKind::invalid_argument, "unknown score kind: " + std::string(text));
}

Dataset::Dataset(DataMatrix data, InfoMatrix info, std::string name, DatasetMeta meta)
    : data_(std::move(data)), info_(std::move(info)), name_(std::move(name)), meta_(std::move(meta)) {
  if (data_.col_names() != info_.col_names()) {
    throw Error(ErrorKind::invalid_argument,
                "dataset '" + name_ + "': data and information matrices have different columns");
  }
}

Dataset Dataset::select_columns(std::span<const std::size_t> cols) const {
  return Dataset(data_.select_columns(cols), info_.select_columns(cols), name_, meta_);
}

// ---------------------------------------------------------------------------
// Row statistics

double quantile_type7(std::span<const double> sorted, double prob) {
  if (sorted.empty()) return kMissing;
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

std::vector<double> sorted_present(std::span<const double> values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) {
    if (!is_missing(v)) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

double interquartile_range(std::span<const double> values) {
  const auto s = sorted_present(values);
  if (s.empty()) return kMissing;
  return quantile_type7(s, 0.75) - quantile_type7(s, 0.25);
}

double median(std::span<const double> values) {
  const auto s = sorted_present(values);
  if (s.empty()) return kMissing;
  const std::size_t n = s.size();
  return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

ReducedMatrix reduce_duplicates(const DataMatrix& raw, unsigned threads) {
  if (raw.rows() == 0) throw Error(ErrorKind::invalid_argument, "reduce_duplicates: matrix has no rows");

  std::vector<double> iqr(raw.rows());
  parallel_for(raw.rows(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) iqr[r] = interquartile_range(raw.row(r));
  });

  // symbol -> (slot in first-occurrence order)
  std::unordered_map<std::string_view, std::size_t> slot_of;
  std::vector<std::string_view> symbols;
  std::vector<std::optional<std::size_t>> best;
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    const std::string_view sym = raw.row_names()[r];
    auto [it, inserted] = slot_of.emplace(sym, symbols.size());
    if (inserted) {
      symbols.push_back(sym);
      best.emplace_back();
    }
    if (is_missing(iqr[r])) continue;
    auto& b = best[it->second];
    if (!b || iqr[r] > iqr[*b]) b = r;
  }

  ReducedMatrix out;
  std::vector<std::size_t> keep;
  keep.reserve(symbols.size());
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    if (best[s]) {
      keep.push_back(*best[s]);
    } else {
      out.dropped_symbols.emplace_back(symbols[s]);
    }
  }
  out.matrix = raw.select_rows(keep);
  return out;
}

// ---------------------------------------------------------------------------
// Merging

namespace {

template <class GetMatrix, class Range>
std::vector<std::string> common_rows_impl(const Range& items, GetMatrix get) {
  if (items.empty()) throw Error(ErrorKind::invalid_argument, "common_rows: no matrices given");
  std::set<std::string> acc(get(items[0]).row_names().begin(), get(items[0]).row_names().end());
  for (std::size_t i = 1; i < items.size() && !acc.empty(); ++i) {
    const auto& names = get(items[i]).row_names();
    const std::unordered_set<std::string_view> present(names.begin(), names.end());
    std::erase_if(acc, [&](const std::string& s) { return !present.contains(s); });
  }
  if (acc.empty()) throw Error(ErrorKind::no_common_features, "no common features");
  return {acc.begin(), acc.end()};
}

}  // namespace

std::vector<std::string> common_rows(std::span<const DataMatrix> matrices) {
  return common_rows_impl(matrices, [](const DataMatrix& m) -> const DataMatrix& { return m; });
}

std::vector<std::string> common_rows(std::span<const Dataset> datasets) {
  return common_rows_impl(datasets, [](const Dataset& d) -> const DataMatrix& { return d.data(); });
}

DataMatrix restrict_rows(const DataMatrix& m, std::span<const std::string> symbols) {
  const auto index = m.row_index();
  std::vector<std::size_t> rows;
  rows.reserve(symbols.size());
  for (const auto& s : symbols) {
    const auto it = index.find(s);
    if (it == index.end()) throw Error(ErrorKind::unknown_feature, "feature not present: " + s);
    rows.push_back(it->second);
  }
  return m.select_rows(rows);
}

DataMatrix merge_data(std::span<const DataMatrix> matrices) {
  const auto symbols = common_rows(matrices);

  std::vector<std::string> cols;
  std::unordered_set<std::string> seen;
  for (const auto& m : matrices) {
    for (const auto& c : m.col_names()) {
      if (!seen.insert(c).second) {
        throw Error(ErrorKind::invalid_argument, "merge: duplicate sample column '" + c + "'");
      }
      cols.push_back(c);
    }
  }

  std::vector<std::vector<std::size_t>> row_maps;
  row_maps.reserve(matrices.size());
  for (const auto& m : matrices) {
    const auto index = m.row_index();
    std::vector<std::size_t> map;
    map.reserve(symbols.size());
    for (const auto& s : symbols) map.push_back(index.at(s));
    row_maps.push_back(std::move(map));
  }

  std::vector<double> values;
  values.reserve(symbols.size() * cols.size());
  for (std::size_t r = 0; r < symbols.size(); ++r) {
    for (std::size_t i = 0; i < matrices.size(); ++i) {
      const auto src = matrices[i].row(row_maps[i][r]);
      values.insert(values.end(), src.begin(), src.end());
    }
  }
  return DataMatrix(symbols, std::move(cols), std::move(values));
}

InfoMatrix merge_info(std::span<const InfoMatrix> infos) {
  std::vector<std::string> fields;
  std::unordered_map<std::string, std::size_t> field_slot;
  std::vector<std::string> cols;
  for (const auto& info : infos) {
    for (const auto& f : info.field_names()) {
      if (field_slot.emplace(f, fields.size()).second) fields.push_back(f);
    }
    cols.insert(cols.end(), info.col_names().begin(), info.col_names().end());
  }

  std::vector<std::string> cells(fields.size() * cols.size());
  std::size_t col_offset = 0;
  for (const auto& info : infos) {
    for (std::size_t f = 0; f < info.fields(); ++f) {
      const std::size_t dst = field_slot.at(info.field_names()[f]);
      for (std::size_t c = 0; c < info.cols(); ++c) {
        cells[dst * cols.size() + col_offset + c] = info(f, c);
      }
    }
    col_offset += info.cols();
  }
  // The constructor rejects colliding column names.
  try {
    return InfoMatrix(std::move(fields), std::move(cols), std::move(cells));
  } catch (const Error& e) {
    throw Error(ErrorKind::invalid_argument, std::string("merge: ") + e.what());
  }
}

Dataset merge_datasets(std::span<const Dataset> datasets) {
  if (datasets.empty()) throw Error(ErrorKind::invalid_argument, "merge: no datasets given");
  const ScoreKind score = datasets.front().meta().score;
  std::vector<DataMatrix> data;
  std::vector<InfoMatrix> infos;
  std::vector<std::string> names;
  for (const auto& ds : datasets) {
    if (ds.meta().score != score) {
      throw Error(ErrorKind::score_state, "merge: datasets carry different score states ('" +
                                              std::string(to_string(score)) + "' vs '" +
                                              to_string(ds.meta().score) + "')");
    }
    std::vector<std::string> cols;
    cols.reserve(ds.samples());
    for (const auto& c : ds.data().col_names()) {
      cols.push_back(c.find(':') == std::string::npos ? ds.name() + ":" + c : c);
    }
    data.push_back(ds.data().with_col_names(cols));
    infos.push_back(ds.info().with_col_names(std::move(cols)));
    names.push_back(ds.name());
  }
  DatasetMeta meta;
  meta.score = score;
  meta.source = "merge(" + join(names, ",") + ")";
  return Dataset(merge_data(data), merge_info(infos), join(names, "+"), std::move(meta));
}

// ---------------------------------------------------------------------------
// Sample selection

MatchMode parse_match_mode(std::string_view text) {
  if (text == "exact") return MatchMode::exact;
  if (text == "substring") return MatchMode::substring;
  throw Error(ErrorKind::invalid_argument, "unknown match mode: " + std::string(text));
}

std::vector<bool> match_samples(const Dataset& ds, std::string_view field, std::string_view keyword,
                                MatchMode mode) {
  const auto f = ds.info().find_field(field);
  if (!f) {
    throw Error(ErrorKind::invalid_argument,
                "unknown information field '" + std::string(field) + "'; available: " +
                    join(ds.info().field_names(), ", "));
  }
  std::vector<bool> hit(ds.samples());
  for (std::size_t c = 0; c < ds.samples(); ++c) {
    const auto& value = ds.info()(*f, c);
    hit[c] = mode == MatchMode::exact ? iequals(value, keyword) : icontains(value, keyword);
  }
  return hit;
}

namespace {

std::string value_inventory(const Dataset& ds, std::string_view field) {
  const auto f = *ds.info().find_field(field);
  std::set<std::string> values;
  for (std::size_t c = 0; c < ds.samples(); ++c) values.insert(ds.info()(f, c));
  return join({values.begin(), values.end()}, ", ");
}

std::vector<std::size_t> indices_where(const std::vector<bool>& mask, bool want) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == want) out.push_back(i);
  }
  return out;
}

}  // namespace

Dataset select_samples(const Dataset& ds, std::string_view field, std::string_view keyword, MatchMode mode) {
  const auto keep = indices_where(match_samples(ds, field, keyword, mode), true);
  if (keep.empty()) {
    throw Error(ErrorKind::degenerate, "no sample has " + std::string(field) + " matching '" +
                                           std::string(keyword) + "'; available values: " +
                                           value_inventory(ds, field));
  }
  return ds.select_columns(keep);
}

Dataset exclude_samples(const Dataset& ds, std::string_view field, std::string_view keyword, MatchMode mode) {
  const auto keep = indices_where(match_samples(ds, field, keyword, mode), false);
  if (keep.empty()) {
    throw Error(ErrorKind::degenerate, "excluding " + std::string(field) + " matching '" + std::string(keyword) +
                                           "' removes every sample");
  }
  return ds.select_columns(keep);
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  // mt19937_64 output is fixed by the standard; the bounded draw below is too,
  // unlike std::uniform_int_distribution.
  std::mt19937_64 rng(seed);
  const auto draw = [&rng](std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
      const std::uint64_t r = rng();
      if (r >= threshold) return r % bound;
    }
  };
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(draw(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::vector<Dataset> random_partition(const Dataset& ds, std::span<const std::size_t> sizes, std::uint64_t seed) {
  std::size_t total = 0;
  for (auto s : sizes) {
    if (s == 0) throw Error(ErrorKind::invalid_argument, "random_partition: sizes must be positive");
    total += s;
  }
  if (total != ds.samples()) {
    throw Error(ErrorKind::invalid_argument, "random_partition: sizes sum to " + std::to_string(total) +
                                                 " but the dataset has " + std::to_string(ds.samples()) +
                                                 " samples");
  }
  const auto perm = seeded_permutation(ds.samples(), seed);
  std::vector<Dataset> parts;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::span<const std::size_t> cols(perm.data() + offset, sizes[i]);
    offset += sizes[i];
    DatasetMeta meta = ds.meta();
    meta.seed = seed;
    meta.source = "partition(" + ds.name() + ")";
    parts.emplace_back(ds.data().select_columns(cols), ds.info().select_columns(cols),
                       ds.name() + "#" + std::to_string(i + 1), std::move(meta));
  }
  return parts;
}

std::vector<double> median_column(const DataMatrix& m, unsigned threads) {
  std::vector<double> out(m.rows());
  parallel_for(m.rows(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) out[r] = median(m.row(r));
  });
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (is_missing(out[r])) throw Error(ErrorKind::invalid_argument, "row '" + m.row_names()[r] + "' is all missing");
  }
  return out;
}

}  // namespace rankmerge
