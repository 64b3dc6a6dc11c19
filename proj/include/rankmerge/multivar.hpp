#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rankmerge/matrix.hpp"

namespace rankmerge {

/// Dense row-major matrix used for PCA inputs and outputs.
struct Table {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Table() = default;
  Table(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Principal components of an individuals x variables table.
struct PcaResult {
  std::vector<double> eigenvalues;  ///< non-increasing, clamped at 0
  Table loadings;                   ///< variables x components, orthonormal columns
  Table scores;                     ///< individuals x components
  std::vector<double> centers;      ///< per-variable mean
  std::vector<double> scalings;     ///< per-variable divisor (1 when unscaled)

  std::size_t components() const noexcept { return eigenvalues.size(); }
};

/// Covariance PCA (divisor n-1) of mean-centred, optionally unit-variance data.
/// In every loading column the entry of largest magnitude is positive.
/// Throws Error(invalid_argument) for fewer than 2 individuals, missing cells,
/// or a constant variable when scale is true.
PcaResult pca(const Table& data, bool scale = false);

struct PlanePoint {
  std::string id;
  double pc1 = 0.0;
  double pc2 = 0.0;
  std::string label;
};

/// First two score columns, one point per individual.
std::vector<PlanePoint> project_first_plane(const PcaResult& p, std::span<const std::string> ids,
                                            std::span<const std::string> labels);

struct VariablePoint {
  std::string name;
  double c1 = 0.0;
  double c2 = 0.0;
};

/// Projection of dataset median vectors (features x datasets) onto the first
/// principal plane as variables: coordinates are loading * sqrt(eigenvalue),
/// i.e. correlations with the components when use_correlation is true.
/// Throws Error(invalid_argument) naming a dataset whose median vector is constant.
std::vector<VariablePoint> factor_plot_medians(const Table& median_vectors, std::span<const std::string> names,
                                               bool use_correlation = true);

/// Samples x features table of the given feature rows (transposed).
Table samples_by_features(const DataMatrix& m, std::span<const std::size_t> feature_rows);

}  // namespace rankmerge
