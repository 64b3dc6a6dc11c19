#include "rankmerge/pairwise.hpp"

#include <algorithm>
#include <cmath>

#include "rankmerge/error.hpp"
#include "rankmerge/parallel.hpp"
#include "rankmerge/transform.hpp"

namespace rankmerge {

namespace {

constexpr double kSkipped = std::numeric_limits<double>::quiet_NaN();

// Fixed four-lane accumulation order, so every thread count produces the same bits.
double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

bool has_missing(const DataMatrix& m) {
  return std::any_of(m.values().begin(), m.values().end(), [](double v) { return is_missing(v); });
}

}  // namespace

PairwiseSummary pairwise_row_correlations(const DataMatrix& m, const PairwiseOptions& options, const PairSink& sink) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  if (rows < 2) throw Error(ErrorKind::invalid_argument, "pairwise correlations need at least 2 rows");
  if (cols < 3) throw Error(ErrorKind::invalid_argument, "pairwise correlations need at least 3 columns");

  const bool complete = !has_missing(m);
  const std::size_t chunk = std::max<std::size_t>(1, options.chunk_rows);

  // Dense path: centered rows (of values or midranks) and their squared norms.
  std::vector<double> centered;
  std::vector<double> sumsq;
  std::vector<bool> constant(rows, false);
  if (complete) {
    centered.resize(rows * cols);
    sumsq.resize(rows);
    parallel_for(rows, options.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) {
        double* dst = centered.data() + r * cols;
        if (options.method == CorrelationMethod::spearman) {
          const auto rk = midrank(m.row(r));
          std::copy(rk.ranks.begin(), rk.ranks.end(), dst);
        } else {
          const auto src = m.row(r);
          std::copy(src.begin(), src.end(), dst);
        }
        double mean = 0.0;
        for (std::size_t c = 0; c < cols; ++c) mean += dst[c];
        mean /= static_cast<double>(cols);
        for (std::size_t c = 0; c < cols; ++c) dst[c] -= mean;
        sumsq[r] = dot(dst, dst, cols);
        constant[r] = sumsq[r] == 0.0;
      }
    });
  }

  const auto pair_value = [&](std::size_t a, std::size_t b) -> double {
    if (complete) {
      if (constant[a] || constant[b]) return kSkipped;
      const double r = dot(centered.data() + a * cols, centered.data() + b * cols, cols) / std::sqrt(sumsq[a] * sumsq[b]);
      return std::clamp(r, -1.0, 1.0);
    }
    try {
      return correlation(m.row(a), m.row(b), options.method);
    } catch (const Error&) {
      return kSkipped;
    }
  };

  PairwiseSummary summary;
  std::vector<double> buffer;
  std::vector<std::size_t> offsets;
  for (std::size_t block = 0; block + 1 < rows; block += chunk) {
    const std::size_t block_end = std::min(block + chunk, rows - 1);
    offsets.assign(block_end - block + 1, 0);
    for (std::size_t a = block; a < block_end; ++a) offsets[a - block + 1] = offsets[a - block] + (rows - 1 - a);
    buffer.resize(offsets.back());

    parallel_for(block_end - block, options.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t a = block + i;
        double* out = buffer.data() + offsets[i];
        for (std::size_t b = a + 1; b < rows; ++b) *out++ = pair_value(a, b);
      }
    });

    for (std::size_t a = block; a < block_end; ++a) {
      const double* in = buffer.data() + offsets[a - block];
      for (std::size_t b = a + 1; b < rows; ++b, ++in) {
        if (std::isnan(*in)) {
          ++summary.skipped;
        } else {
          sink(a, b, *in);
          ++summary.emitted;
        }
      }
    }
  }

  if (complete) {
    for (std::size_t r = 0; r < rows; ++r) {
      if (constant[r]) summary.constant_rows.push_back(r);
    }
  } else {
    for (std::size_t r = 0; r < rows; ++r) {
      const auto row = m.row(r);
      double first = kSkipped;
      bool varies = false;
      for (double v : row) {
        if (is_missing(v)) continue;
        if (std::isnan(first)) first = v;
        else if (v != first) varies = true;
      }
      if (!varies) summary.constant_rows.push_back(r);
    }
  }
  return summary;
}

}  // namespace rankmerge
