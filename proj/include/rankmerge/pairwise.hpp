#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "rankmerge/matrix.hpp"
#include "rankmerge/rstats.hpp"

namespace rankmerge {

struct PairwiseOptions {
  CorrelationMethod method = CorrelationMethod::pearson;
  unsigned threads = 1;
  /// Rows of the outer loop whose pairs are buffered before emission.
  std::size_t chunk_rows = 64;
};

struct PairwiseSummary {
  std::uint64_t emitted = 0;
  /// Pairs not emitted because a row had zero variance (or too few complete values).
  std::uint64_t skipped = 0;
  std::vector<std::size_t> constant_rows;
};

/// Receives (row a, row b, r) with a < b.
using PairSink = std::function<void(std::size_t, std::size_t, double)>;

/// C(rows, 2).
constexpr std::uint64_t pair_count(std::uint64_t rows) { return rows < 2 ? 0 : rows * (rows - 1) / 2; }

/// Streams the correlation of every unordered row pair in lexicographic (a, b)
/// order. Memory is bounded by chunk_rows * rows values; the emitted sequence is
/// identical for any thread count.
PairwiseSummary pairwise_row_correlations(const DataMatrix& m, const PairwiseOptions& options, const PairSink& sink);

}  // namespace rankmerge
