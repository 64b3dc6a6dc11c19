#include "rankmerge/transform.hpp"

#include <algorithm>
#include <numeric>

#include "rankmerge/error.hpp"
#include "rankmerge/numerics.hpp"
#include "rankmerge/parallel.hpp"

namespace rankmerge {

RankVector midrank(std::span<const double> column) {
  std::vector<std::size_t> order;
  order.reserve(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (!is_missing(column[i])) order.push_back(i);
  }
  if (order.empty()) throw Error(ErrorKind::invalid_argument, "cannot rank a column with no values");
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });

  RankVector out;
  out.n = order.size();
  out.ranks.assign(column.size(), kMissing);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && column[order[j]] == column[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) out.ranks[order[k]] = rank;
    i = j;
  }
  return out;
}

std::vector<double> ecdf_score(std::span<const double> column) {
  auto r = midrank(column);
  const auto n = static_cast<double>(r.n);
  for (double& v : r.ranks) {
    if (!is_missing(v)) v /= n;
  }
  return std::move(r.ranks);
}

std::vector<double> vdw_score(std::span<const double> column) {
  auto r = midrank(column);
  const auto n1 = static_cast<double>(r.n + 1);
  for (double& v : r.ranks) {
    if (!is_missing(v)) v = inv_norm_cdf(v / n1);
  }
  return std::move(r.ranks);
}

DataMatrix score_columns(const DataMatrix& m, ScoreKind kind, unsigned threads) {
  if (kind == ScoreKind::none) throw Error(ErrorKind::score_state, "score kind 'none' is not a transform");
  std::vector<double> values(m.values().begin(), m.values().end());
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  parallel_for(cols, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> column(rows);
    for (std::size_t c = begin; c < end; ++c) {
      for (std::size_t r = 0; r < rows; ++r) column[r] = values[r * cols + c];
      try {
        const auto scored = kind == ScoreKind::ecdf ? ecdf_score(column) : vdw_score(column);
        for (std::size_t r = 0; r < rows; ++r) values[r * cols + c] = scored[r];
      } catch (const Error&) {
        throw Error(ErrorKind::invalid_argument, "column '" + m.col_names()[c] + "' has no values to score");
      }
    }
  });
  return DataMatrix(m.row_names(), m.col_names(), std::move(values));
}

Dataset score_dataset(const Dataset& ds, ScoreKind kind, unsigned threads) {
  if (ds.meta().score != ScoreKind::none) {
    throw Error(ErrorKind::score_state, "dataset '" + ds.name() + "' is already scored (" +
                                            to_string(ds.meta().score) + ")");
  }
  DatasetMeta meta = ds.meta();
  meta.score = kind;
  return Dataset(score_columns(ds.data(), kind, threads), ds.info(), ds.name(), std::move(meta));
}

}  // namespace rankmerge
