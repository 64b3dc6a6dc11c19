#include "rankmerge/multivar.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "rankmerge/error.hpp"

namespace rankmerge {

namespace {

using MatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kEigenFloor = 1e-10;

}  // namespace

PcaResult pca(const Table& data, bool scale) {
  const std::size_t n = data.rows;
  const std::size_t p = data.cols;
  if (n < 2) throw Error(ErrorKind::invalid_argument, "pca needs at least 2 individuals");
  if (p < 1) throw Error(ErrorKind::invalid_argument, "pca needs at least 1 variable");
  if (std::any_of(data.values.begin(), data.values.end(), [](double v) { return is_missing(v); })) {
    throw Error(ErrorKind::invalid_argument, "pca input contains missing values");
  }

  Eigen::Map<const MatrixXd> x(data.values.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));

  PcaResult out;
  out.centers.resize(p);
  out.scalings.assign(p, 1.0);
  MatrixXd centered = x;
  for (std::size_t j = 0; j < p; ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    out.centers[j] = x.col(col).mean();
    centered.col(col).array() -= out.centers[j];
    if (scale) {
      const double sd = std::sqrt(centered.col(col).squaredNorm() / static_cast<double>(n - 1));
      if (!(sd > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "pca: variable " + std::to_string(j) + " is constant");
      }
      out.scalings[j] = sd;
      centered.col(col) /= sd;
    }
  }

  const MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::invalid_argument, "pca: eigen-decomposition failed");

  // Eigen sorts ascending; components are reported largest first.
  const auto& evals = solver.eigenvalues();
  const auto& evecs = solver.eigenvectors();
  out.eigenvalues.resize(p);
  out.loadings = Table(p, p);
  for (std::size_t k = 0; k < p; ++k) {
    const auto src = static_cast<Eigen::Index>(p - 1 - k);
    // Rounding noise below the floor (relative to the largest eigenvalue) is reported as 0.
    const double lambda = evals(src);
    out.eigenvalues[k] = lambda > kEigenFloor * evals(static_cast<Eigen::Index>(p - 1)) ? lambda : 0.0;

    Eigen::Index arg_max = 0;
    evecs.col(src).cwiseAbs().maxCoeff(&arg_max);
    const double sign = evecs(arg_max, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < p; ++j) out.loadings(j, k) = sign * evecs(static_cast<Eigen::Index>(j), src);
  }

  Eigen::Map<const MatrixXd> loadings(out.loadings.values.data(), static_cast<Eigen::Index>(p),
                                      static_cast<Eigen::Index>(p));
  const MatrixXd scores = centered * loadings;
  out.scores = Table(n, p);
  Eigen::Map<MatrixXd>(out.scores.values.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p)) = scores;
  return out;
}

std::vector<PlanePoint> project_first_plane(const PcaResult& p, std::span<const std::string> ids,
                                            std::span<const std::string> labels) {
  if (p.components() < 2) throw Error(ErrorKind::invalid_argument, "first principal plane needs 2 components");
  if (ids.size() != p.scores.rows || labels.size() != p.scores.rows) {
    throw Error(ErrorKind::invalid_argument, "project_first_plane: one id and one label per individual required");
  }
  std::vector<PlanePoint> out(p.scores.rows);
  for (std::size_t i = 0; i < p.scores.rows; ++i) {
    out[i] = {ids[i], p.scores(i, 0), p.scores(i, 1), labels[i]};
  }
  return out;
}

std::vector<VariablePoint> factor_plot_medians(const Table& median_vectors, std::span<const std::string> names,
                                               bool use_correlation) {
  const std::size_t features = median_vectors.rows;
  const std::size_t datasets = median_vectors.cols;
  if (datasets < 3) throw Error(ErrorKind::invalid_argument, "factor plot needs at least 3 datasets");
  if (features < 3) throw Error(ErrorKind::invalid_argument, "factor plot needs at least 3 features");
  if (names.size() != datasets) throw Error(ErrorKind::invalid_argument, "factor plot: one name per dataset required");

  for (std::size_t j = 0; j < datasets; ++j) {
    const double first = median_vectors(0, j);
    bool varies = false;
    for (std::size_t i = 1; i < features && !varies; ++i) varies = median_vectors(i, j) != first;
    if (!varies) throw Error(ErrorKind::invalid_argument, "median vector of dataset '" + names[j] + "' is constant");
  }

  const auto res = pca(median_vectors, use_correlation);
  std::vector<VariablePoint> out(datasets);
  const double s1 = std::sqrt(res.eigenvalues[0]);
  const double s2 = res.components() > 1 ? std::sqrt(res.eigenvalues[1]) : 0.0;
  for (std::size_t j = 0; j < datasets; ++j) {
    out[j] = {names[j], res.loadings(j, 0) * s1, res.loadings(j, 1) * s2};
  }
  return out;
}

Table samples_by_features(const DataMatrix& m, std::span<const std::size_t> feature_rows) {
  Table t(m.cols(), feature_rows.size());
  for (std::size_t f = 0; f < feature_rows.size(); ++f) {
    const auto row = m.row(feature_rows[f]);
    for (std::size_t s = 0; s < m.cols(); ++s) t(s, f) = row[s];
  }
  return t;
}

}  // namespace rankmerge
