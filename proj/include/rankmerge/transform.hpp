#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rankmerge/matrix.hpp"

namespace rankmerge {

/// Midranks of one column. Missing entries stay missing; n counts the rest.
struct RankVector {
  std::vector<double> ranks;
  std::size_t n = 0;
};

/// Ranks 1..n, ties sharing the mean of the ranks they span.
/// Throws Error(invalid_argument) if every entry is missing.
RankVector midrank(std::span<const double> column);

/// R_i / n.
std::vector<double> ecdf_score(std::span<const double> column);

/// inv_norm_cdf(R_i / (n + 1)).
std::vector<double> vdw_score(std::span<const double> column);

/// Transforms every column independently. Throws Error(score_state) if the
/// dataset is already scored or kind is ScoreKind::none.
Dataset score_dataset(const Dataset& ds, ScoreKind kind, unsigned threads = 1);

/// Column-wise scores of a bare matrix.
DataMatrix score_columns(const DataMatrix& m, ScoreKind kind, unsigned threads = 1);

}  // namespace rankmerge
